"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from beamwaves.evolution import State, energy, evolve, verify_travelling
from beamwaves.exact import Radical
from beamwaves.params import (
    TorusGeometry,
    random_targets,
    running_example,
    sample_dense,
)
from beamwaves.resonance import (
    bifurcation_matrix,
    compute_K,
    critical_frequencies,
    enumerate_resonances,
    theta_values,
)
from beamwaves.solver import (
    PathSpec,
    RangeContext,
    bifurcation_residual,
    continue_branch,
    cubic_damping_oracle,
    full_residual,
    reduced_residual_1d,
    solve_range,
    solve_wave,
)
from beamwaves.spectral import FourierField, sobolev_norm

CASE_GEOMETRIES = {
    1: (1, 1),
    2: (Radical(1, 2, 4), 1),
    3: (1, Radical(1, 3, 4)),
    4: (Radical(1, 2, 4), Radical(1, 3, 4)),
    5: (Radical(1, 2, 8), Radical(Fraction(3, 2), 2, 8)),
    6: (Radical(1, 2, 8), Radical(1, 18, 8)),
}


def report(capsys, label, ok, detail):
    with capsys.disabled():
        sys.stdout.write(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}\n")
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="module")
def setup():
    return running_example()


@pytest.fixture(scope="module")
def diagonal_branch(setup):
    params, geom = setup
    t0 = time.perf_counter()
    br = continue_branch(PathSpec.geometric("diagonal", 10 ** -3.5, 1e-2, 6), params, geom)
    return br, time.perf_counter() - t0


def test_criterion_01_resonance_exactness(capsys):
    t0 = time.perf_counter()
    kernel = {(1, 0), (-1, 0), (0, 2), (0, -2)}
    bad, n_s, n_sp = [], 0, 0
    targets = random_targets(40, 0.1, 10.0, seed=1)
    tuples = []
    for case, nu in CASE_GEOMETRIES.items():
        geom = TorusGeometry.from_nu(*nu)
        for t in targets[4 * (case - 1):4 * case]:
            tuples.append(("S", case, sample_dense(t, 1e-3, "S", geom), geom))
    geom = TorusGeometry.from_nu(1, 1)
    for t in targets[24:30]:
        tuples.append(("S'", 0, sample_dense(t, 1e-3, "S'", geom), geom))
    for set_id, case, res, geom in tuples:
        assert res.success
        ex = enumerate_resonances(res.params, geom, 200, "exact")
        fl = enumerate_resonances(res.params, geom, 200, "floating", tol=1e-8)
        if set(ex.hits) != kernel or set(fl.hits) != kernel or ex.set_id != set_id:
            bad.append((set_id, case, str(res.params.mu), str(res.params.m), ex.hits, fl.hits))
        if set_id == "S":
            n_s += 1
        else:
            n_sp += 1
    dt = time.perf_counter() - t0
    ok = not bad and n_s >= 20 and n_sp >= 5 and dt <= 60
    report(capsys, "criterion 1 resonance exactness",
           ok, f"{n_s} S tuples (6 cases) + {n_sp} S' tuples, mismatches {len(bad)}, {dt:.1f}s")


def test_criterion_02_counterexample(capsys, setup):
    params, geom = setup
    t0 = time.perf_counter()
    scan = enumerate_resonances(params.replace(m=4), geom, 200, "floating", tol=1e-8)
    dt = time.perf_counter() - t0
    expected = {(1, 0), (-1, 0), (2, 0), (-2, 0), (0, 1), (0, -1), (0, 2), (0, -2)}
    ok = scan.kernel_size > 4 and set(scan.hits) == expected and dt <= 10
    report(capsys, "criterion 2 counterexample sensitivity", ok,
           f"{scan.kernel_size} resonances (expected 8), {dt:.2f}s")


def test_criterion_03_symbol_bound(capsys, setup):
    params, geom = setup
    K = compute_K(params, geom, 0.1)
    w_star = np.array(critical_frequencies(params, geom).omega_star)
    rng = np.random.default_rng(3)
    R = math.isqrt(4 * K) + 1
    J1, J2 = np.meshgrid(np.arange(-R, R + 1), np.arange(-R, R + 1), indexing="ij")
    r2 = J1 ** 2 + J2 ** 2
    sel = (r2 >= K) & (r2 <= 4 * K)
    violations, worst = 0, np.inf
    for _ in range(100):
        w = w_star + rng.uniform(-0.1, 0.1, 2)
        a, g = rng.uniform(-10, 10, 2)
        th = np.abs(theta_values(J1[sel], J2[sel], w, a, g, params, geom))
        violations += int(np.sum(th < r2[sel]))
        worst = min(worst, float(np.min(th / r2[sel])))
    report(capsys, "criterion 3 symbol bound", violations == 0 and K == 11,
           f"K={K}, {int(sel.sum())} modes x 100 draws, violations {violations}, min |Theta|/|j|^2 = {worst:.3f}")


def test_criterion_04_jacobian_matrix(capsys, setup):
    params, geom = setup
    t0 = time.perf_counter()
    om = critical_frequencies(params, geom).omega_star
    ctx = RangeContext().resolved(params, geom)
    bm = bifurcation_matrix(params, geom)
    A = bm.entries

    def res(x):
        w = solve_range((0, 0), (x[0], x[1]), x[2], x[3], params, geom)
        return bifurcation_residual((0, 0), (x[0], x[1]), x[2], x[3], w, params, geom, ctx)

    x0 = np.array([*om, 0.0, 0.0])
    h = 1e-6
    J = np.column_stack([(res(x0 + h * e) - res(x0 - h * e)) / (2 * h) for e in np.eye(4)])
    nz = A != 0
    rel = float(np.max(np.abs(J - A)[nz] / np.abs(A[nz])))
    zero_abs = float(np.max(np.abs(J[~nz]))) / float(np.max(np.abs(A)))
    det_rel = abs(bm.det_numeric - bm.det_closed) / abs(bm.det_closed)
    dt = time.perf_counter() - t0
    ok = rel <= 1e-6 and zero_abs <= 1e-6 and det_rel <= 1e-12 and abs(bm.det_closed + 2970) <= 1e-9 and dt <= 10
    report(capsys, "criterion 4 Jacobian / matrix A", ok,
           f"entry rel err {rel:.1e}, zero entries {zero_abs:.1e} of max|A|, det {bm.det_closed:.10g} "
           f"(numeric rel diff {det_rel:.1e}), {dt:.2f}s")


def test_criterion_05_solution_certificate(capsys, setup):
    params, geom = setup
    t0 = time.perf_counter()
    s = solve_wave((1e-2, 1e-2), params, geom, N=16)
    r32 = full_residual(s.rho, s.omega, s.alpha, s.gamma, s.w, params, geom, N=32)
    dt = time.perf_counter() - t0
    ok = s.residual_full <= 1e-10 and r32 <= 1e-9 and dt <= 60
    report(capsys, "criterion 5 solution certificate", ok,
           f"residual N=16 {s.residual_full:.2e}, N=32 {r32:.2e}, {s.iterations} Newton steps, {dt:.2f}s")


def test_criterion_06_amplitude_laws(capsys, setup, diagonal_branch):
    params, geom = setup
    br, elapsed = diagonal_branch
    pts = [s for s in br.points if s.rho[0] > 0]
    sig = np.log([s.rho[0] for s in pts])
    om = np.array(critical_frequencies(params, geom).omega_star)

    def slope(vals):
        return float(np.polyfit(sig, np.log(vals), 1)[0])

    s_om = slope([np.linalg.norm(np.array(s.omega) - om) for s in pts])
    s_a = slope([abs(s.alpha) for s in pts])
    s_g = slope([abs(s.gamma) for s in pts])
    s_w = slope([sobolev_norm(s.w, 0) for s in pts])
    t0 = time.perf_counter()
    at = solve_wave((1e-3, 1e-3), params, geom)
    a0, g0 = cubic_damping_oracle((1e-3, 1e-3), params, geom)
    ea, eg = abs(at.alpha / a0 - 1), abs(at.gamma / g0 - 1)
    elapsed += time.perf_counter() - t0
    ok = (br.status == "complete" and s_om >= 1.9 and abs(s_a - 2) <= 0.1 and abs(s_g - 2) <= 0.1
          and abs(s_w - 3) <= 0.1 and ea <= 0.05 and eg <= 0.05 and elapsed <= 180)
    report(capsys, "criterion 6 amplitude laws", ok,
           f"{len(pts)} points, slopes |w-w*| {s_om:.3f}, alpha {s_a:.3f}, gamma {s_g:.3f}, |w|_0 {s_w:.3f}; "
           f"oracle rel err alpha {ea:.1e}, gamma {eg:.1e}; {elapsed:.1f}s")


def test_criterion_07_sign_check(capsys, diagonal_branch):
    br, _ = diagonal_branch
    pts = [s for s in br.points if max(s.rho) > 0]
    bad = [s.rho for s in pts if not max(s.alpha, s.gamma) > 0]
    report(capsys, "criterion 7 sign check", not bad and len(pts) > 0,
           f"{len(pts)} nontrivial solutions, violations {len(bad)}")


def test_criterion_08_rotating_waves(capsys, setup):
    params, geom = setup
    worst_c, worst_r, worst_full = 0.0, 0.0, 0.0
    ok = True
    for kind, axis in (("axis1", 1), ("axis2", 2)):
        br = continue_branch(PathSpec.linear(kind, 1e-2, 10), params, geom)
        ok &= br.status == "complete" and len(br) == 11
        for s in br.points:
            N = s.N
            j = np.arange(-N, N + 1)
            off = (j[None, :] != 0) if axis == 1 else (j[:, None] != 0)
            off = np.broadcast_to(off, s.w.coeffs.shape)
            worst_c = max(worst_c, float(np.max(np.abs(s.w.coeffs[off]))))
            worst_r = max(worst_r, reduced_residual_1d(s, params, geom, axis))
            worst_full = max(worst_full, s.residual_full)
    ok &= worst_c <= 1e-12 and worst_r <= 1e-10 and worst_full <= 1e-10
    report(capsys, "criterion 8 rotating-wave degeneration", ok,
           f"both axes, 11 points each; max off-axis |w_j| {worst_c:.1e}, 1-D residual {worst_r:.1e}, "
           f"full residual {worst_full:.1e}")


def test_criterion_09a_travelling_wave_evolution(capsys, setup):
    params, geom = setup
    t0 = time.perf_counter()
    s = solve_wave((1e-2, 1e-2), params, geom, N=16)
    T = 5 * 2 * math.pi / min(s.omega)
    dev = verify_travelling(s, T, 1e-3, params, geom)
    dt = time.perf_counter() - t0
    report(capsys, "criterion 9 (part 1) travelling-wave evolution", dev <= 1e-6 and dt <= 300,
           f"deviation {dev:.3e} over T={T:.2f} at dt=1e-3 (gamma={s.gamma:.2e} < 0), {dt:.1f}s")


def test_criterion_09b_conservative_limit(capsys, setup):
    params, geom = setup
    lin = params.replace(lam=0.0)
    N = 16
    rng = np.random.default_rng(9)
    c = [rng.standard_normal((2 * N + 1,) * 2) + 1j * rng.standard_normal((2 * N + 1,) * 2) for _ in range(2)]
    J = np.arange(-N, N + 1)
    decay = np.exp(-0.3 * (J[:, None] ** 2 + J[None, :] ** 2))
    s0 = State(FourierField(N, c[0] * decay).symmetrized(), FourierField(N, c[1] * decay).symmetrized())
    t0 = time.perf_counter()
    traj = evolve(s0, 100.0, 1e-3, lin, geom, sample_every=1.0)
    dt = time.perf_counter() - t0
    e = np.array([energy(x, lin, geom) for x in traj.states])
    drift = float(np.max(np.abs(e / e[0] - 1)))
    report(capsys, "criterion 9 (part 2) conservative energy", drift <= 1e-10 and dt <= 300,
           f"max relative drift {drift:.1e} over T=100, N=16, dt=1e-3, {dt:.1f}s")


def test_criterion_09c_energy_increasing(capsys, setup):
    params, geom = setup
    N = 8
    rng = np.random.default_rng(10)
    worst, runs = np.inf, 0
    t0 = time.perf_counter()
    for alpha, gamma in ((0.0, 0.0), (-0.1, 0.0), (0.0, -1e-4), (-0.1, -1e-4)):
        for _ in range(2):
            c = [np.zeros((2 * N + 1,) * 2, dtype=complex) for _ in range(2)]
            for x in c:
                x[N - 3:N + 4, N - 3:N + 4] = 1e-3 * (rng.standard_normal((7, 7)) + 1j * rng.standard_normal((7, 7)))
            s0 = State(FourierField(N, c[0]).symmetrized(), FourierField(N, c[1]).symmetrized())
            traj = evolve(s0, 5.0, 1e-2, params, geom, alpha, gamma, sample_every=0.05)
            assert not traj.blowup
            e = np.array([energy(x, params, geom) for x in traj.states])
            worst = min(worst, float(np.min(np.diff(e))))
            runs += 1
    dt = time.perf_counter() - t0
    report(capsys, "criterion 9 (part 3) energy nondecreasing", worst >= -1e-12,
           f"{runs} runs with alpha, gamma <= 0, smallest sample-to-sample change {worst:.2e}, {dt:.1f}s")


def test_criterion_10_density(capsys):
    geom = TorusGeometry.from_nu(1, 1)
    targets = random_targets(100, 0.1, 10.0, seed=10)
    t0 = time.perf_counter()
    fails = []
    for set_id in ("S", "S'"):
        for t in targets:
            res = sample_dense(t, 1e-3, set_id, geom)
            if not (res.success and abs(float(res.params.mu) - t[0]) < 1e-3 and abs(float(res.params.m) - t[1]) < 1e-3):
                fails.append((set_id, t))
    dt = time.perf_counter() - t0
    report(capsys, "criterion 10 density smoke test", not fails and dt <= 30,
           f"200 samples (100 per set), failures {len(fails)}, {dt:.2f}s")
