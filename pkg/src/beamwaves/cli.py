"""Command-line front end.

Exit codes: 0 success, 1 valid run with a negative answer, 2 usage or
malformed configuration, 3 exact method refused, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    ConfigurationError,
    DomainError,
    MethodRefusedError,
    NearSingularError,
    NonConvergenceError,
    PreconditionError,
)
from .evolution import State, energy, energy_rate, evolve, travelling_state
from .params import (
    check_membership_S,
    check_membership_Sprime,
    params_from_json,
    params_to_json,
    running_example,
    sample_dense,
    standing_hypothesis,
)
from .resonance import critical_frequencies, enumerate_resonances, scan_rows
from .solver import Branch, PathSpec, WaveSolution, continue_branch, solve_wave
from .spectral import FourierField, sobolev_norm

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_REFUSED, EXIT_NUMERIC = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    params: object
    geom: object
    N: int = 16
    inner_tol: float = 1e-11
    outer_tol: float = 1e-10
    varrho: float | None = None
    output_dir: str = "."
    seed: int = 0
    precision: int = 50

    def to_json(self) -> dict:
        d = params_to_json(self.params, self.geom)
        d.update(N=self.N, inner_tol=self.inner_tol, outer_tol=self.outer_tol, varrho=self.varrho,
                 seed=self.seed, precision=self.precision)
        return d

    def validate(self):
        if self.inner_tol <= 0 or self.outer_tol <= 0:
            raise UsageError("tolerances must be positive")
        if self.N < max(self.params.jstar):
            raise UsageError(f"N={self.N} below max(j*)={max(self.params.jstar)}")
        if self.varrho is not None and self.varrho <= 0:
            raise UsageError("varrho must be positive")
        if self.precision < 15:
            raise UsageError("precision must be at least 15 digits")


def _load_config(args) -> RunConfig:
    base = params_to_json(*running_example())
    extra = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if "config" in loaded and isinstance(loaded["config"], dict):
            loaded = loaded["config"]
        base.update({k: v for k, v in loaded.items() if k in base})
        extra = {k: v for k, v in loaded.items() if k not in base}
    for flag, key in (("mu", "mu"), ("m", "m"), ("L1", "L1"), ("L2", "L2"), ("lam", "lambda"), ("p", "p")):
        val = getattr(args, flag, None)
        if val is not None:
            base[key] = val
    if getattr(args, "jstar", None):
        base["jstar"] = list(args.jstar)
    try:
        params, geom = params_from_json(base)
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise UsageError(f"malformed parameters: {exc}") from exc
    cfg = RunConfig(
        params, geom,
        N=int(_pick(args, "N", extra, 16)),
        inner_tol=float(_pick(args, "inner_tol", extra, 1e-11)),
        outer_tol=float(_pick(args, "tol", extra, None) or extra.get("outer_tol", 1e-10)),
        varrho=_pick(args, "varrho", extra, None),
        output_dir=getattr(args, "out", None) or extra.get("output_dir", "."),
        seed=int(_pick(args, "seed", extra, 0)),
        precision=int(_pick(args, "precision", extra, 50)),
    )
    cfg.validate()
    return cfg


def _pick(args, name, extra, default):
    val = getattr(args, name, None)
    if val is not None:
        return val
    return extra.get(name, default)


def _out_path(cfg: RunConfig, name: str) -> Path:
    d = Path(cfg.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header, rows, cfg: RunConfig):
    with open(path, "w", newline="") as fh:
        fh.write("# config: " + json.dumps(cfg.to_json(), sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _write_json(path: Path, payload, cfg: RunConfig):
    with open(path, "w") as fh:
        json.dump({"config": cfg.to_json(), "result": payload}, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _write_dat(path: Path, pairs):
    with open(path, "w") as fh:
        for a, b in pairs:
            fh.write(f"{a!r} {b!r}\n")


def _say(args, text):
    if not getattr(args, "quiet", False):
        print(text)


# -- subcommands ------------------------------------------------------------------------

def cmd_params(args) -> int:
    cfg = _load_config(args)
    if args.action == "check":
        if not standing_hypothesis(cfg.params, cfg.geom):
            raise UsageError("standing hypothesis nu1*j1* != nu2*j2* violated")
        reports = {}
        if args.set in ("S", "auto"):
            reports["S"] = check_membership_S(cfg.params, cfg.geom).to_json()
        if args.set in ("Sprime", "S'", "auto"):
            reports["S'"] = check_membership_Sprime(cfg.params, cfg.geom).to_json()
        member = any(r["member"] for r in reports.values())
        print(json.dumps({"member": member, "reports": reports}, sort_keys=True))
        return EXIT_OK if member else EXIT_NEGATIVE
    set_id = "S'" if args.set in ("Sprime", "S'") else "S"
    res = sample_dense(tuple(args.target), args.eps, set_id, cfg.geom, cfg.params.jstar, cfg.params.lam,
                       cfg.params.p)
    payload = {"success": res.success, "attempts": res.attempts, "message": res.message, "set_id": set_id}
    if res.success:
        payload["params"] = params_to_json(res.params, cfg.geom)
        payload["report"] = res.report.to_json()
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK if res.success else EXIT_NEGATIVE


def cmd_resonance(args) -> int:
    cfg = _load_config(args)
    if args.radius < 1:
        raise UsageError("radius must be a positive integer")
    method = "floating" if args.floating else "exact"
    scan = enumerate_resonances(cfg.params, cfg.geom, args.radius, method, args.scan_tol)
    path = _out_path(cfg, "resonance.csv")
    _write_csv(path, ("j1", "j2", "re_theta", "im_theta", "is_kernel"), scan_rows(scan, cfg.params, cfg.geom), cfg)
    _say(args, f"kernel size: {scan.kernel_size} (method {scan.method}, radius {scan.radius}); wrote {path}")
    if scan.rejected:
        _say(args, f"rejected by exact recheck: {list(scan.rejected)}")
    return EXIT_OK if scan.kernel_size == 4 else EXIT_NEGATIVE


def _solve_kw(cfg):
    return {"inner_tol": cfg.inner_tol, "varrho": cfg.varrho}


def cmd_solve(args) -> int:
    cfg = _load_config(args)
    sol = solve_wave(tuple(args.rho), cfg.params, cfg.geom, cfg.N, cfg.outer_tol, **_solve_kw(cfg))
    path = _out_path(cfg, "wave.json")
    _write_json(path, sol.to_json(), cfg)
    _say(args, f"omega={sol.omega} alpha={sol.alpha!r} gamma={sol.gamma!r} residual_full={sol.residual_full:.3e}; wrote {path}")
    return EXIT_OK


def cmd_continue(args) -> int:
    cfg = _load_config(args)
    if args.steps < 0 or args.max <= 0:
        raise UsageError("need --max > 0 and --steps >= 0")
    if args.geometric:
        spec = PathSpec.geometric(args.path, args.min, args.max, args.steps)
    else:
        spec = PathSpec.linear(args.path, args.max, args.steps)
    branch = continue_branch(spec, cfg.params, cfg.geom, cfg.N, cfg.outer_tol, **_solve_kw(cfg))
    path = _out_path(cfg, "branch.csv")
    _write_csv(path, Branch.CSV_HEADER, branch.rows(), cfg)
    if args.plot_data:
        w1, w2 = critical_frequencies(cfg.params, cfg.geom, cfg.precision).omega_star
        sig = [max(s.rho) for s in branch.points]
        _write_dat(_out_path(cfg, "rho_alpha.dat"), [(a, s.alpha) for a, s in zip(sig, branch.points)])
        _write_dat(_out_path(cfg, "rho_gamma.dat"), [(a, s.gamma) for a, s in zip(sig, branch.points)])
        _write_dat(_out_path(cfg, "rho_domega.dat"),
                   [(a, math.hypot(s.omega[0] - w1, s.omega[1] - w2)) for a, s in zip(sig, branch.points)])
    _say(args, f"branch status {branch.status}: {len(branch)} points; wrote {path}")
    if branch.status != "complete":
        _say(args, branch.message)
        return EXIT_NUMERIC
    return EXIT_OK


def _load_wave(path):
    with open(path) as fh:
        obj = json.load(fh)
    return WaveSolution.from_json(obj.get("result", obj))


def _load_state(path):
    with open(path) as fh:
        obj = json.load(fh)
    obj = obj.get("result", obj)
    return State(FourierField.from_json(obj["u"]), FourierField.from_json(obj["ut"]), float(obj.get("t", 0.0)))


def cmd_evolve(args) -> int:
    cfg = _load_config(args)
    if args.dt <= 0:
        raise UsageError("dt must be positive")
    if args.source:
        sol = _load_wave(args.source)
        if sol.N != cfg.N:
            cfg.N = sol.N
        T = args.periods * 2 * math.pi / min(sol.omega) if args.T is None else args.T
        phi, omega = sol.phi, sol.omega
        start = travelling_state(phi, omega)
        alpha, gamma = sol.alpha, sol.gamma

        def observer(st):
            ref = travelling_state(phi, omega, st.t)
            return max(sobolev_norm(st.u - ref.u, 0.0), sobolev_norm(st.ut - ref.ut, 0.0))
    elif args.state:
        start = _load_state(args.state)
        T = args.T if args.T is not None else 1.0
        alpha, gamma = args.alpha, args.gamma
        observer = None
    else:
        raise UsageError("evolve needs --from WAVE.json or --state STATE.json")
    traj = evolve(start, T, args.dt, cfg.params, cfg.geom, alpha, gamma, sample_every=T / args.samples,
                  observer=observer)
    path = _out_path(cfg, "trajectory.csv")
    _write_csv(path, traj.CSV_HEADER, traj.rows(cfg.params, cfg.geom), cfg)
    if args.plot_data:
        _write_dat(_out_path(cfg, "t_energy.dat"), [(r[0], r[1]) for r in traj.rows(cfg.params, cfg.geom)])
    worst = max(traj.deviations) if traj.deviations else float("nan")
    _say(args, f"{len(traj.states)} samples, max deviation {worst:.3e}, blowup={traj.blowup}; wrote {path}")
    return EXIT_NUMERIC if traj.blowup else EXIT_OK


def cmd_energy(args) -> int:
    cfg = _load_config(args)
    if args.source:
        sol = _load_wave(args.source)
        st = travelling_state(sol.phi, sol.omega)
        alpha, gamma = sol.alpha, sol.gamma
    elif args.state:
        st = _load_state(args.state)
        alpha, gamma = args.alpha, args.gamma
    else:
        raise UsageError("energy needs --from WAVE.json or --state STATE.json")
    out = {"energy": energy(st, cfg.params, cfg.geom),
           "energy_rate": energy_rate(st, cfg.params, cfg.geom, alpha, gamma)}
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------

def _common():
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--config", metavar="PATH", default=S, help="JSON run configuration")
    p.add_argument("--out", metavar="DIR", default=S, help="output directory")
    p.add_argument("--precision", metavar="DIGITS", type=int, default=S, help="digits for critical frequencies")
    p.add_argument("--quiet", action="store_true", default=S)
    p.add_argument("--mu", default=S, help="e.g. 1, 3/2, sqrt(2), 1/2*root(2,4)")
    p.add_argument("--m", default=S)
    p.add_argument("--L1", default=S)
    p.add_argument("--L2", default=S)
    p.add_argument("--lambda", dest="lam", type=float, default=S)
    p.add_argument("--p", type=int, default=S)
    p.add_argument("--jstar", type=int, nargs=2, default=S)
    p.add_argument("--N", type=int, default=S)
    p.add_argument("--tol", type=float, default=S, help="outer (full residual) tolerance")
    p.add_argument("--inner-tol", dest="inner_tol", type=float, default=S)
    p.add_argument("--varrho", type=float, default=S)
    p.add_argument("--seed", type=int, default=S)
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="beamwaves", parents=[common],
                                     description="Travelling waves of damped beams on rectangular tori")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("params", parents=[common], help="membership checks and dense sampling")
    sp.add_argument("action", choices=("check", "sample"))
    sp.add_argument("--set", default="auto", choices=("auto", "S", "Sprime", "S'"))
    sp.add_argument("--target", type=float, nargs=2, default=(1.0, 1.0))
    sp.add_argument("--eps", type=float, default=0.1)
    sp.set_defaults(func=cmd_params)

    sr = sub.add_parser("resonance", parents=[common], help="resonant lattice modes at the critical frequency")
    sr.add_argument("--radius", type=int, default=200)
    sr.add_argument("--floating", action="store_true")
    sr.add_argument("--scan-tol", dest="scan_tol", type=float, default=1e-8)
    sr.set_defaults(func=cmd_resonance)

    ss = sub.add_parser("solve", parents=[common], help="solve one travelling wave")
    ss.add_argument("--rho", type=float, nargs=2, required=True)
    ss.set_defaults(func=cmd_solve)

    sc = sub.add_parser("continue", parents=[common], help="continue a branch in rho")
    sc.add_argument("--path", choices=("axis1", "axis2", "diagonal"), default="diagonal")
    sc.add_argument("--max", type=float, default=1e-2)
    sc.add_argument("--min", type=float, default=1e-4)
    sc.add_argument("--steps", type=int, default=10)
    sc.add_argument("--geometric", action="store_true")
    sc.add_argument("--plot-data", dest="plot_data", action="store_true")
    sc.set_defaults(func=cmd_continue)

    se = sub.add_parser("evolve", parents=[common], help="integrate the beam equation in time")
    se.add_argument("--from", dest="source")
    se.add_argument("--state")
    se.add_argument("--periods", type=float, default=5.0)
    se.add_argument("--T", type=float)
    se.add_argument("--dt", type=float, default=1e-3)
    se.add_argument("--samples", type=int, default=50)
    se.add_argument("--alpha", type=float, default=0.0)
    se.add_argument("--gamma", type=float, default=0.0)
    se.add_argument("--plot-data", dest="plot_data", action="store_true")
    se.set_defaults(func=cmd_evolve)

    sg = sub.add_parser("energy", parents=[common], help="energy and its rate for a state or wave")
    sg.add_argument("--from", dest="source")
    sg.add_argument("--state")
    sg.add_argument("--alpha", type=float, default=0.0)
    sg.add_argument("--gamma", type=float, default=0.0)
    sg.set_defaults(func=cmd_energy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, PreconditionError, DomainError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MethodRefusedError as exc:
        print(f"refused: {exc} (use --floating)", file=sys.stderr)
        return EXIT_REFUSED
    except (NonConvergenceError, NearSingularError) as exc:
        last = getattr(exc, "last_residual", float("nan"))
        print(f"numerical failure: {exc}; last residual {last}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
