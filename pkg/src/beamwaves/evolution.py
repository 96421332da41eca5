"""Time integration of the damped beam equation in travelling-frame coordinates.

Per Fourier mode the linear part is the damped oscillator
``u'' + c_j u' + k_j u = 0`` with ``k_j = mu lam_j^2 + m`` and
``c_j = alpha + gamma lam_j^2``; its exact 2x2 propagator is applied in an
integrating-factor (Lawson) Runge-Kutta 4 scheme, so only the nonlinearity
``lam (u_t)^(2p+1)`` is discretized in time.

All integrals are means over the torus, evaluated by Parseval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError
from .params import ModelParams, TorusGeometry
from .spectral import (
    FourierField,
    dealias_size,
    from_physical,
    lattice,
    multiplier,
    sobolev_norm,
    to_physical,
)

__all__ = [
    "State",
    "Trajectory",
    "energy",
    "energy_rate",
    "evolve",
    "verify_travelling",
    "travelling_state",
    "propagator",
]


@dataclass
class State:
    u: FourierField
    ut: FourierField
    t: float = 0.0

    def __post_init__(self):
        if self.u.N != self.ut.N:
            raise DomainError("u and u_t must share the truncation N")

    @property
    def N(self):
        return self.u.N


@dataclass
class Trajectory:
    times: list
    states: list
    dt: float
    alpha: float = 0.0
    gamma: float = 0.0
    blowup: bool = False
    deviations: list = field(default_factory=list)

    CSV_HEADER = ("t", "energy", "energy_rate", "H0_norm_u", "H0_norm_ut", "deviation")

    def rows(self, params, geom):
        out = []
        for i, s in enumerate(self.states):
            dev = self.deviations[i] if i < len(self.deviations) else ""
            out.append((s.t, energy(s, params, geom), energy_rate(s, params, geom, self.alpha, self.gamma),
                        sobolev_norm(s.u, 0.0), sobolev_norm(s.ut, 0.0), dev))
        return out


def _lam_grid(N, geom):
    J1, J2 = lattice(N)
    a1, a2 = geom.nu_sq
    return a1 * J1 * J1 + a2 * J2 * J2


def energy(state: State, params: ModelParams, geom: TorusGeometry) -> float:
    """Mean over the torus of ``u_t^2/2 + mu (Lap u)^2 / 2 + m u^2 / 2``."""
    lam = _lam_grid(state.N, geom)
    u2 = np.abs(state.u.coeffs) ** 2
    v2 = np.abs(state.ut.coeffs) ** 2
    return float(0.5 * np.sum(v2 + (params.mu_f * lam * lam + params.m_f) * u2))


def energy_rate(state: State, params: ModelParams, geom: TorusGeometry, alpha: float = 0.0,
                gamma: float = 0.0) -> float:
    """Mean of ``-alpha u_t^2 - gamma (Lap u_t)^2 + lam u_t^(2p+2)``: the time derivative of ``energy``."""
    lam = _lam_grid(state.N, geom)
    v2 = np.abs(state.ut.coeffs) ** 2
    rate = -alpha * np.sum(v2) - gamma * np.sum(lam * lam * v2)
    if params.lam != 0.0:
        q = 2 * params.p + 2
        x = to_physical(state.ut, dealias_size(state.N, q))
        rate += params.lam * np.mean(x ** q)
    return float(rate)


def propagator(h: float, N: int, params: ModelParams, geom: TorusGeometry, alpha: float, gamma: float):
    """Entries ``(p11, p12, p21, p22)`` of ``exp(h [[0, 1], [-k_j, -c_j]])`` per mode."""
    lam = _lam_grid(N, geom).astype(np.float64)
    k = params.mu_f * lam * lam + params.m_f
    c = alpha + gamma * lam * lam
    s = np.sqrt((0.25 * c * c - k).astype(np.complex128))
    z = s * h
    decay = np.exp(-0.5 * c * h)
    ch = np.cosh(z)
    small = np.abs(z) < 1e-6
    # sinh(z)/z, with its series near z = 0
    shc = np.where(small, 1 + z * z / 6, np.sinh(np.where(small, 1.0, z)) / np.where(small, 1.0, z))
    a = decay * ch
    b = decay * shc * h
    p11 = (a + 0.5 * c * b).real
    p12 = b.real
    p21 = (-k * b).real
    p22 = (a - 0.5 * c * b).real
    return p11, p12, p21, p22


class _Stepper:
    def __init__(self, N, dt, params, geom, alpha, gamma):
        self.params = params
        self.N = N
        self.q = 2 * params.p + 1
        self.M = dealias_size(N, self.q)
        self.full = propagator(dt, N, params, geom, alpha, gamma)
        self.half = propagator(0.5 * dt, N, params, geom, alpha, gamma)
        self.dt = dt
        self.linear = params.lam == 0.0

    def forcing(self, v):
        """Fourier coefficients of ``lam * v^(2p+1)`` for velocity coefficients ``v``."""
        x = to_physical(FourierField(self.N, v), self.M)
        return from_physical(_kernels.pow_scale(x, self.q, self.params.lam), self.N).coeffs

    def apply(self, P, u, v):
        return _kernels.propagate(u, v, *P)

    def step(self, u, v):
        if self.linear:
            return self.apply(self.full, u, v)
        h = self.dt
        k1 = self.forcing(v)
        u2, v2 = self.apply(self.half, u, v + 0.5 * h * k1)
        k2 = self.forcing(v2)
        eu, ev = self.apply(self.half, u, v)
        u3, v3 = eu, ev + 0.5 * h * k2
        k3 = self.forcing(v3)
        a, b = self.apply(self.half, np.zeros_like(k3), k3)
        fu, fv = self.apply(self.full, u, v)
        u4, v4 = fu + h * a, fv + h * b
        k4 = self.forcing(v4)
        # u+ = E(h)u + h/6 (E(h)k1 + 2E(h/2)(k2 + k3) + k4), forcing acts on the velocity slot
        zero = np.zeros_like(k1)
        e1u, e1v = self.apply(self.full, zero, k1)
        e2u, e2v = self.apply(self.half, zero, k2 + k3)
        un = fu + h / 6 * (e1u + 2 * e2u)
        vn = fv + h / 6 * (e1v + 2 * e2v + k4)
        return un, vn


def evolve(state0: State, T: float, dt: float, params: ModelParams, geom: TorusGeometry, alpha: float = 0.0,
           gamma: float = 0.0, sample_every: float | None = None, check_dt: bool = True,
           observer=None) -> Trajectory:
    """Integrate from ``state0.t`` to ``state0.t + T``; sample every ``sample_every`` time units.

    The step is shrunk from ``dt`` so that ``T`` and the ``round(T/sample_every)``
    sample times fall exactly on the step grid.
    ``observer(state)`` may return a float recorded as the sample's deviation.
    """
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    if not T >= dt:
        raise ConfigurationError(f"horizon T={T} shorter than the time step {dt}")
    # sample count k divides the step count so samples fall on an exact grid
    k = 1 if sample_every is None else max(1, int(round(T / sample_every)))
    n = k * math.ceil(T / (k * dt) - 1e-9)
    h = T / n
    N = state0.N
    stepper = _Stepper(N, h, params, geom, alpha, gamma)
    u = state0.u.coeffs.copy()
    v = state0.ut.coeffs.copy()
    if check_dt and not stepper.linear:
        _check_step(stepper, u, v, params, geom, alpha, gamma)
    every = n // k
    t0 = state0.t
    traj = Trajectory([t0], [State(FourierField(N, u), FourierField(N, v), t0)], h, alpha, gamma)
    if observer is not None:
        traj.deviations.append(observer(traj.states[0]))
    for i in range(1, n + 1):
        # overflow is reported through the blowup flag below
        with np.errstate(over="ignore", invalid="ignore"):
            u, v = stepper.step(u, v)
        if i % every == 0 or i == n:
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
                traj.blowup = True
                break
            st = State(FourierField(N, u).symmetrized(), FourierField(N, v).symmetrized(), t0 + i * h)
            u, v = st.u.coeffs.copy(), st.ut.coeffs.copy()
            traj.times.append(st.t)
            traj.states.append(st)
            if observer is not None:
                traj.deviations.append(observer(st))
    return traj


def _check_step(stepper, u, v, params, geom, alpha, gamma):
    """Step-doubling estimate of the per-step error of the nonlinear update."""
    if not np.any(u) and not np.any(v):
        return
    one = stepper.step(u, v)
    halfstep = _Stepper(stepper.N, 0.5 * stepper.dt, params, geom, alpha, gamma)
    two = halfstep.step(*halfstep.step(u, v))
    scale = math.sqrt(np.sum(np.abs(one[0]) ** 2 + np.abs(one[1]) ** 2)) or 1.0
    err = math.sqrt(np.sum(np.abs(one[0] - two[0]) ** 2 + np.abs(one[1] - two[1]) ** 2))
    if err > 1e-2 * scale:
        raise ConfigurationError(
            f"time step {stepper.dt:g} exceeds the accuracy budget (step-doubling difference {err / scale:.2e}); "
            "reduce dt")


def travelling_state(phi: FourierField, omega, t: float = 0.0) -> State:
    """``u = phi(theta + omega t)``, ``u_t = (omega.grad) phi(theta + omega t)``."""
    u = phi.translated(omega[0] * t, omega[1] * t)
    ut = u.scale_by(multiplier(phi.N, "grad", omega))
    return State(u, ut, t)


def verify_travelling(solution, T: float, dt: float, params: ModelParams, geom: TorusGeometry,
                      sample_every: float | None = None, return_trajectory: bool = False):
    """Largest H0 distance between the evolved wave and its exact translate.

    The distance at a sample is ``max(|u - u_exact|_0, |u_t - u_t,exact|_0)``;
    a run that overflows reports ``inf``.
    """
    phi = solution.phi
    omega = solution.omega
    start = travelling_state(phi, omega, 0.0)

    def deviation(st):
        ref = travelling_state(phi, omega, st.t)
        return max(sobolev_norm(st.u - ref.u, 0.0), sobolev_norm(st.ut - ref.ut, 0.0))

    if sample_every is None:
        sample_every = T / 50
    traj = evolve(start, T, dt, params, geom, solution.alpha, solution.gamma, sample_every=sample_every,
                  observer=deviation)
    devs = [d for d in traj.deviations if math.isfinite(d)]
    worst = float("inf") if traj.blowup or len(devs) < len(traj.deviations) else max(devs)
    return (worst, traj) if return_trajectory else worst
