"""Lyapunov-Schmidt solve of the travelling-frame equation.

Unknowns: amplitudes ``rho`` (fixed by the caller), frequencies ``omega``,
friction coefficients ``alpha``, ``gamma`` and the range component ``w``.
The field is ``phi = v(rho) + w`` with ``v`` on the four kernel modes and
``w`` on the complement.  ``solve_range`` eliminates ``w``; the remaining four
real equations (real and imaginary parts of the kernel-mode equations) are
solved by an outer Newton iteration in ``(omega1, omega2, alpha, gamma)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError, NearSingularError, NonConvergenceError
from .params import ModelParams, TorusGeometry
from .resonance import bifurcation_matrix, compute_K, critical_frequencies
from .spectral import (
    FourierField,
    dealias_size,
    from_physical,
    kernel_field,
    make_split,
    multiplier,
    nonlinearity,
    sobolev_norm,
    theta_array,
    to_physical,
)

__all__ = [
    "RangeContext",
    "RangeResult",
    "WaveSolution",
    "Branch",
    "PathSpec",
    "solve_range",
    "solve_range_details",
    "bifurcation_residual",
    "full_residual",
    "solve_wave",
    "continue_branch",
    "reduced_residual_1d",
    "cubic_damping_oracle",
]

SINGULAR_TOL = 1e-8
RHO_ZERO = 1e-12
RHO_STEP = 1e-6


@dataclass(frozen=True)
class RangeContext:
    """Discretization shared by every range solve of one wave computation."""

    N: int = 16
    tol: float = 1e-11
    K: int | None = None
    max_sweeps: int = 50

    def resolved(self, params, geom, varrho=None) -> "RangeContext":
        if self.K is not None:
            return self
        return replace(self, K=compute_K(params, geom, varrho))


@dataclass
class RangeResult:
    w: FourierField
    residual: float
    sweeps: int
    history: list = field(default_factory=list)


def _w_residual(w, v, theta, mask_W, omega, params, M):
    F = nonlinearity(v + w, omega, params, M)
    R = np.where(mask_W, theta * w.coeffs - F.coeffs, 0)
    return F, R, sobolev_norm(FourierField(w.N, R), 0.0)


def _g_hat(phi, omega, params, M, G):
    """Centred coefficients of ``((w.grad) phi)^(2p)`` for offsets ``|d|_inf <= G``."""
    d = phi.scale_by(multiplier(phi.N, "grad", omega))
    x = to_physical(d, M)
    g = from_physical(_kernels.pow_scale(x, 2 * params.p, 1.0), G)
    return g.coeffs


def solve_range_details(rho, omega, alpha, gamma, params: ModelParams, geom: TorusGeometry,
                        ctx: RangeContext = RangeContext(), w0: FourierField | None = None) -> RangeResult:
    """Solve ``Pi_W (L w - F(v(rho) + w)) = 0``.

    High modes (``|j|^2 >= K``) are updated by the fixed point
    ``w = Theta^-1 Pi_Y F``; the finite low block is updated by a damped
    Newton step with the exact Jacobian of ``F`` restricted to that block.
    Iteration continues past ``tol`` until the residual stops improving, so
    the result is accurate to round-off rather than just to ``tol``.
    """
    ctx = ctx.resolved(params, geom)
    N, K = ctx.N, ctx.K
    if N < math.ceil(math.sqrt(K)):
        raise ConfigurationError(f"truncation N={N} below ceil(sqrt(K))={math.ceil(math.sqrt(K))}")
    split = make_split(N, K, params.jstar)
    theta = theta_array(N, omega, alpha, gamma, params, geom)
    tz = np.abs(theta[split.mask_Z])
    if tz.size and tz.min() < SINGULAR_TOL:
        idx = split.indices("Z")[int(np.argmin(tz))]
        raise NearSingularError(f"|Theta| = {tz.min():.3e} at j = {tuple(idx)} on the low block",
                                tuple(idx), float(tz.min()))
    v = kernel_field(rho, params.jstar, N)
    q = 2 * params.p + 1
    M = dealias_size(N, q)
    w = FourierField(N) if w0 is None else FourierField(N, np.where(split.mask_W, w0.resized(N).coeffs, 0))
    if rho[0] == 0 and rho[1] == 0 and w0 is None:
        return RangeResult(w, 0.0, 0, [0.0])

    zidx = split.indices("Z")
    theta_Z = theta[split.mask_Z]
    dk_Z = 1j * (omega[0] * zidx[:, 0] + omega[1] * zidx[:, 1])
    G = 2 * math.isqrt(K) + 2
    mask_Y, mask_Z, mask_W = split.mask_Y, split.mask_Z, split.mask_W
    theta_safe = np.where(mask_Y, theta, 1.0)

    F, R, res = _w_residual(w, v, theta, mask_W, omega, params, M)
    history = [res]
    for sweep in range(1, ctx.max_sweeps + 1):
        if not math.isfinite(res):
            raise NonConvergenceError("range solve diverged", res, sweep - 1, {"history": history})
        # fixed point on the high modes
        c = w.coeffs.copy()
        c[mask_Y] = (F.coeffs / theta_safe)[mask_Y]
        # Newton on the low block
        if zidx.size:
            gext = _g_hat(v + w, omega, params, M, G)
            J = _kernels.jacobian(zidx + 0, gext, G, theta_Z, dk_Z, params.lam * q)
            dz = np.linalg.solve(J, -R[mask_Z])
        else:
            dz = 0
        step = 1.0
        for _ in range(12):
            trial = c.copy()
            trial[mask_Z] = w.coeffs[mask_Z] + step * dz
            w_new = FourierField(N, trial).symmetrized()
            F_new, R_new, res_new = _w_residual(w_new, v, theta, mask_W, omega, params, M)
            if res_new <= res or res_new <= ctx.tol * 1e-3:
                break
            step *= 0.5
        improved = res_new < 0.5 * res
        w, F, R = w_new, F_new, R_new
        prev, res = res, res_new
        history.append(res)
        if res <= ctx.tol and (not improved or res == 0.0 or res <= 1e-15 * max(prev, 1e-300)):
            break
    else:
        if res > ctx.tol:
            raise NonConvergenceError(f"range solve stalled at residual {res:.3e}", res, ctx.max_sweeps,
                                      {"history": history})
    if res > ctx.tol:
        raise NonConvergenceError(f"range solve stalled at residual {res:.3e}", res, sweep, {"history": history})
    return RangeResult(w, res, sweep, history)


def solve_range(rho, omega, alpha, gamma, params, geom, N=16, tol=1e-11, K=None, w0=None) -> FourierField:
    ctx = RangeContext(N=N, tol=tol, K=K)
    return solve_range_details(rho, omega, alpha, gamma, params, geom, ctx, w0).w


def full_residual(rho, omega, alpha, gamma, w: FourierField, params, geom, N: int | None = None) -> float:
    """H0 norm of ``L (v + w) - F(v + w)`` on all retained modes (truncation ``N``)."""
    N = w.N if N is None else N
    ww = w.resized(N)
    phi = kernel_field(rho, params.jstar, N) + ww
    R = phi.scale_by(theta_array(N, omega, alpha, gamma, params, geom)) - nonlinearity(phi, omega, params)
    return sobolev_norm(R, 0.0)


def _mode_G(F: FourierField, jstar):
    """``(G1+, G1-, G2+, G2-)`` from the kernel-mode coefficients of ``F``."""
    j1, j2 = jstar
    c1, c2 = F[(j1, 0)], F[(0, j2)]
    return np.array([c1.real, -c1.imag, c2.real, -c2.imag])


def bifurcation_residual(rho, omega, alpha, gamma, w: FourierField, params: ModelParams, geom: TorusGeometry,
                         ctx: RangeContext | None = None) -> np.ndarray:
    """Four defects of the kernel-mode equations after division by ``rho_k``.

    For ``rho_k = 0`` the quotient ``G_k / rho_k`` is replaced by the one-sided
    difference quotient ``G_k(rho + h e_k) / h`` with ``h = 1e-6``; when ``ctx``
    is given the range component is re-solved at the shifted amplitude.
    """
    rho = (float(rho[0]), float(rho[1]))
    j1, j2 = params.jstar
    w1, w2 = omega
    n14, n24 = float(geom.nu1 ** 4), float(geom.nu2 ** 4)
    mu, m = params.mu_f, params.m_f
    N = w.N
    F = nonlinearity(kernel_field(rho, params.jstar, N) + w, omega, params)
    G = _mode_G(F, params.jstar)
    Gt = np.empty(4)
    for k in range(2):
        rk = rho[k]
        if rk > RHO_ZERO:
            Gt[2 * k:2 * k + 2] = G[2 * k:2 * k + 2] / rk
            continue
        if rk != 0.0:
            warnings.warn(f"rho_{k + 1} = {rk:.3e} treated as zero", RuntimeWarning, stacklevel=2)
        shifted = list(rho)
        shifted[k] = RHO_STEP
        ws = w
        if ctx is not None:
            ws = solve_range_details(tuple(shifted), omega, alpha, gamma, params, geom, ctx, w0=w).w
        Fs = nonlinearity(kernel_field(shifted, params.jstar, N) + ws, omega, params)
        Gt[2 * k:2 * k + 2] = _mode_G(Fs, params.jstar)[2 * k:2 * k + 2] / RHO_STEP
    return np.array([
        -w1 ** 2 * j1 ** 2 + mu * n14 * j1 ** 4 + m - Gt[0],
        -alpha * w1 * j1 - gamma * w1 * n14 * j1 ** 5 - Gt[1],
        -w2 ** 2 * j2 ** 2 + mu * n24 * j2 ** 4 + m - Gt[2],
        -alpha * w2 * j2 - gamma * w2 * n24 * j2 ** 5 - Gt[3],
    ])


@dataclass
class WaveSolution:
    rho: tuple
    omega: tuple
    alpha: float
    gamma: float
    w: FourierField
    residual_full: float
    residual_bif: np.ndarray
    N: int
    K: int
    iterations: int = 0

    jstar: tuple = (1, 2)

    @property
    def phi(self) -> FourierField:
        """Full profile ``v(rho) + w``."""
        return kernel_field(self.rho, self.jstar, self.N) + self.w

    def to_json(self) -> dict:
        return {
            "rho": list(self.rho),
            "omega": list(self.omega),
            "alpha": self.alpha,
            "gamma": self.gamma,
            "residual_full": self.residual_full,
            "residual_bif": [float(x) for x in self.residual_bif],
            "N": self.N,
            "K": self.K,
            "iterations": self.iterations,
            "jstar": list(self.jstar),
            "w": self.w.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "WaveSolution":
        return cls(
            tuple(obj["rho"]), tuple(obj["omega"]), float(obj["alpha"]), float(obj["gamma"]),
            FourierField.from_json(obj["w"]), float(obj["residual_full"]),
            np.array(obj["residual_bif"], dtype=float), int(obj["N"]), int(obj["K"]),
            int(obj.get("iterations", 0)), tuple(obj.get("jstar", (1, 2))),
        )


def solve_wave(rho, params: ModelParams, geom: TorusGeometry, N: int = 16, tol: float = 1e-10, init=None,
               inner_tol: float = 1e-11, varrho: float | None = None, max_iter: int = 30,
               fd_step: float = 1e-7, w0: FourierField | None = None) -> WaveSolution:
    """Solve for ``(omega, alpha, gamma, w)`` at fixed amplitude ``rho``.

    The first Newton step uses the bifurcation matrix as Jacobian, later steps
    a forward-difference Jacobian.  Iteration continues until the update
    reaches round-off level, then the full residual is checked against ``tol``.
    """
    rho = (float(rho[0]), float(rho[1]))
    if rho[0] < 0 or rho[1] < 0:
        raise DomainError(f"amplitudes must be nonnegative, got {rho}")
    crit = critical_frequencies(params, geom)
    ctx = RangeContext(N=N, tol=inner_tol).resolved(params, geom, varrho)
    x = np.array(init if init is not None else (*crit.omega_star, 0.0, 0.0), dtype=float)
    if rho == (0.0, 0.0) and init is None:
        w = FourierField(N)
        return WaveSolution(rho, crit.omega_star, 0.0, 0.0, w, 0.0, np.zeros(4), N, ctx.K, 0, params.jstar)

    def evaluate(xv, wstart):
        om = (xv[0], xv[1])
        rr = solve_range_details(rho, om, xv[2], xv[3], params, geom, ctx, w0=wstart)
        return rr.w, bifurcation_residual(rho, om, xv[2], xv[3], rr.w, params, geom, ctx)

    history = []
    try:
        w, r = evaluate(x, w0)
        for it in range(1, max_iter + 1):
            if it == 1:
                J = bifurcation_matrix(params, geom, (x[0], x[1])).entries
            else:
                J = np.empty((4, 4))
                for c in range(4):
                    xp = x.copy()
                    xp[c] += fd_step
                    _, rp = evaluate(xp, w)
                    J[:, c] = (rp - r) / fd_step
            dx = np.linalg.solve(J, -r)
            x_new = x + dx
            w_new, r_new = evaluate(x_new, w)
            history.append((it, float(np.max(np.abs(r_new))), float(np.max(np.abs(dx)))))
            x, w, r_prev, r = x_new, w_new, r, r_new
            small_step = np.max(np.abs(dx)) <= 1e-14 * max(1.0, np.max(np.abs(x)))
            stalled = np.max(np.abs(r)) >= 0.5 * np.max(np.abs(r_prev))
            if small_step or (it > 1 and stalled):
                break
        else:
            it = max_iter
    except (NonConvergenceError, NearSingularError) as exc:
        raise NonConvergenceError(f"inner solve failed: {exc}", getattr(exc, "last_residual", float("nan")),
                                  len(history), {"history": history, "x": x.tolist()}) from exc
    res_full = full_residual(rho, (x[0], x[1]), x[2], x[3], w, params, geom)
    if not res_full <= tol:
        raise NonConvergenceError(f"outer Newton ended with residual {res_full:.3e} > {tol:.1e}", res_full,
                                  len(history), {"history": history, "x": x.tolist()})
    return WaveSolution(rho, (float(x[0]), float(x[1])), float(x[2]), float(x[3]), w, res_full, r, N, ctx.K,
                        len(history), params.jstar)


# -- continuation ---------------------------------------------------------------------

@dataclass(frozen=True)
class PathSpec:
    """Amplitude path ``rho(sigma) = sigma * direction`` sampled at ``sigmas``.

    ``kind`` is ``axis1`` (rho2 = 0), ``axis2`` (rho1 = 0), ``diagonal`` or
    ``custom`` (explicit ``points``).
    """

    kind: str = "diagonal"
    sigmas: tuple = ()
    points: tuple = ()

    @classmethod
    def linear(cls, kind: str, rmax: float, steps: int) -> "PathSpec":
        if steps < 0:
            raise DomainError("steps must be nonnegative")
        if steps == 0:
            return cls(kind, ())
        return cls(kind, tuple(rmax * i / steps for i in range(steps + 1)))

    @classmethod
    def geometric(cls, kind: str, rmin: float, rmax: float, steps: int, include_zero: bool = True) -> "PathSpec":
        s = tuple(float(x) for x in np.geomspace(rmin, rmax, steps)) if steps > 0 else ()
        return cls(kind, ((0.0,) + s) if include_zero and s else s)

    @property
    def direction(self):
        return {"axis1": (1.0, 0.0), "axis2": (0.0, 1.0), "diagonal": (1.0, 1.0)}[self.kind]

    def rho_at(self, sigma: float):
        d = self.direction
        return (sigma * d[0], sigma * d[1])

    def rhos(self):
        if self.kind == "custom":
            return [tuple(map(float, p)) for p in self.points]
        return [self.rho_at(s) for s in self.sigmas]

    def to_json(self) -> dict:
        return {"kind": self.kind, "sigmas": list(self.sigmas), "points": [list(p) for p in self.points]}


@dataclass
class Branch:
    points: list
    origin: str
    path_spec: PathSpec
    status: str = "complete"
    message: str = ""

    def __len__(self):
        return len(self.points)

    CSV_HEADER = ("rho1", "rho2", "omega1", "omega2", "alpha", "gamma", "residual_full", "norm_w_H0", "N")

    def rows(self):
        return [
            (s.rho[0], s.rho[1], s.omega[0], s.omega[1], s.alpha, s.gamma, s.residual_full,
             sobolev_norm(s.w, 0.0), s.N)
            for s in self.points
        ]


def continue_branch(path_spec: PathSpec, params: ModelParams, geom: TorusGeometry, N: int = 16,
                    tol: float = 1e-10, min_step: float = 1e-6, **solve_kw) -> Branch:
    """Follow the path with warm starts; halve a failing step down to ``min_step``."""
    targets = path_spec.rhos()
    if not targets:
        return Branch([], "trivial", path_spec)
    first = targets[0]
    if first[0] != 0 and first[1] != 0:
        raise DomainError("a branch must start at rho = 0 or on a rotating-wave axis")
    origin = "trivial" if first == (0.0, 0.0) else "rotating"
    points = []
    prev = None
    for target in targets:
        if prev is None:
            try:
                sol = solve_wave(target, params, geom, N, tol, **solve_kw)
            except NonConvergenceError as exc:
                return Branch(points, origin, path_spec, "truncated", str(exc))
            points.append(sol)
            prev = sol
            continue
        # advance from the previous point to target, halving on failure
        start = prev.rho
        frac, h = 0.0, 1.0
        while frac < 1.0:
            h = min(h, 1.0 - frac)
            t = frac + h
            rho_t = tuple(s + t * (g - s) for s, g in zip(start, target))
            try:
                sol = solve_wave(rho_t, params, geom, N, tol, init=(*prev.omega, prev.alpha, prev.gamma),
                                 w0=prev.w, **solve_kw)
            except NonConvergenceError as exc:
                h *= 0.5
                span = max(abs(g - s) for s, g in zip(start, target))
                if h * span < min_step:
                    return Branch(points, origin, path_spec, "truncated", str(exc))
                continue
            frac = t
            prev = sol
            if frac >= 1.0:
                points.append(sol)
            h = min(2 * h, 1.0)
    return Branch(points, origin, path_spec)


# -- independent checks ----------------------------------------------------------------

def reduced_residual_1d(sol: WaveSolution, params: ModelParams, geom: TorusGeometry, axis: int = 1) -> float:
    """Residual of the one-dimensional equation obeyed by a rotating wave.

    For ``rho_other = 0`` the profile depends on ``theta_axis`` only and must solve
    ``-w^2 f'' + mu nu^4 f'''' + m f + (alpha + gamma nu^4 d^4) w f' = lam (w f')^(2p+1)``.
    Evaluated with its own 1-D transform, independently of the 2-D machinery.
    """
    N = sol.N
    k = axis - 1
    nu4 = float((geom.nu1 if axis == 1 else geom.nu2) ** 4)
    om = sol.omega[k]
    jstar = params.jstar
    phi = kernel_field(sol.rho, jstar, N) + sol.w
    line = phi.coeffs[:, N] if axis == 1 else phi.coeffs[N, :]
    j = np.arange(-N, N + 1, dtype=float)
    lin = -(om * j) ** 2 + params.mu_f * nu4 * j ** 4 + params.m_f + 1j * (sol.alpha + sol.gamma * nu4 * j ** 4) * om * j
    q = 2 * params.p + 1
    M = int(2 ** math.ceil(math.log2((q + 1) * N + 1)))
    buf = np.zeros(M, dtype=complex)
    buf[np.arange(-N, N + 1) % M] = 1j * om * j * line
    deriv = np.fft.ifft(buf).real * M
    Fh = np.fft.fft(params.lam * deriv ** q) / M
    F = Fh[np.arange(-N, N + 1) % M]
    R = lin * line - F
    return float(np.sqrt(np.sum(2.0 * np.abs(R) ** 2)))


def cubic_damping_oracle(rho, params: ModelParams, geom: TorusGeometry):
    """Leading-order ``(alpha, gamma)`` for p = 1 from the cubic projection.

    Solves ``alpha + gamma nu_k^4 j_k*^4 = 3 lam (rho_k^2 w_k^2 j_k*^2 + 2 rho_l^2 w_l^2 j_l*^2)``
    for k = 1, 2 (l the other index) at ``omega = omega*``.
    """
    if params.p != 1:
        raise DomainError("the cubic oracle applies to p = 1 only")
    w1, w2 = critical_frequencies(params, geom).omega_star
    j1, j2 = params.jstar
    P1 = rho[0] ** 2 * w1 ** 2 * j1 ** 2
    P2 = rho[1] ** 2 * w2 ** 2 * j2 ** 2
    a1 = float(geom.nu1 ** 4) * j1 ** 4
    a2 = float(geom.nu2 ** 4) * j2 ** 4
    lam = params.lam
    M = np.array([[1.0, a1], [1.0, a2]])
    b = 3 * lam * np.array([P1 + 2 * P2, P2 + 2 * P1])
    alpha, gamma = np.linalg.solve(M, b)
    return float(alpha), float(gamma)
