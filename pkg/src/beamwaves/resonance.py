"""Dispersion analysis at the critical frequency.

The symbol of the linear operator is

    Theta(j, w, a, g) = -(w.j)^2 + mu*lam_j^2 + m + i*(a + g*lam_j^2)*(w.j),
    lam_j = nu1^2 j1^2 + nu2^2 j2^2,

and the resonant set is ``{j : Theta(j, w*, 0, 0) = 0}``.  Exact enumeration
works in the field generated by square roots of rationals (see ``exact``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import _kernels
from .errors import DomainError, MethodRefusedError
from .exact import SurdSum, is_perfect_square
from .params import ModelParams, TorusGeometry, check_membership_S, check_membership_Sprime

__all__ = [
    "CriticalData",
    "critical_frequencies",
    "theta_symbol",
    "theta_values",
    "ExactSymbol",
    "exact_symbol",
    "theta_vanishes_exactly",
    "ResonanceScan",
    "enumerate_resonances",
    "coercive_radius_sq",
    "compute_K",
    "default_varrho",
    "BifurcationMatrix",
    "bifurcation_matrix",
    "scan_rows",
]


@dataclass(frozen=True)
class CriticalData:
    omega_star: tuple
    kernel_modes: tuple
    precision: int
    omega_star_mp: tuple = field(default=(), repr=False)


def critical_frequencies(params: ModelParams, geom: TorusGeometry, precision: int = 50) -> CriticalData:
    """``w_k* = sqrt((mu nu_k^4 j_k*^4 + m) / j_k*^2)`` at ``precision`` digits."""
    j1, j2 = params.jstar
    with mpmath.workdps(precision):
        mu, m = params.mu.mp(), params.m.mp()
        out = []
        for nu, j in ((geom.nu1, j1), (geom.nu2, j2)):
            out.append(mpmath.sqrt((mu * (nu ** 4).mp() * j ** 4 + m) / j ** 2))
        omega = tuple(float(w) for w in out)
        omp = tuple(+w for w in out)
    kernel = ((j1, 0), (-j1, 0), (0, j2), (0, -j2))
    return CriticalData(omega, kernel, precision, omp)


def _float_coeffs(params, geom):
    a1, a2 = geom.nu_sq
    return params.mu_f, params.m_f, a1, a2


def theta_symbol(j, omega, alpha, gamma, params: ModelParams, geom: TorusGeometry) -> complex:
    j1, j2 = j
    return complex(theta_values(np.array([j1]), np.array([j2]), omega, alpha, gamma, params, geom)[0])


def theta_values(J1, J2, omega, alpha, gamma, params, geom):
    """Vectorized symbol on integer arrays ``J1``, ``J2`` (broadcasting)."""
    mu, m, a1, a2 = _float_coeffs(params, geom)
    J1 = np.asarray(J1, dtype=np.float64)
    J2 = np.asarray(J2, dtype=np.float64)
    lam = a1 * J1 * J1 + a2 * J2 * J2
    dot = omega[0] * J1 + omega[1] * J2
    return (-dot * dot + mu * lam * lam + m) + 1j * (alpha + gamma * lam * lam) * dot


# -- exact symbol ----------------------------------------------------------------

@dataclass(frozen=True)
class ExactSymbol:
    """Exact coefficients of ``E(j) = Re Theta(j, w*, 0, 0) + 2 j1 j2 w1 w2``.

    ``E = A j1^4 + B j2^4 + 2C j1^2 j2^2 + m - a1 j1^2 - a2 j2^2`` with
    ``A = mu nu1^4``, ``B = mu nu2^4``, ``C = mu nu1^2 nu2^2``, ``a_k = w_k*^2``.
    """

    A: SurdSum
    B: SurdSum
    C: SurdSum
    m: SurdSum
    a1: SurdSum
    a2: SurdSum

    def E(self, j1: int, j2: int) -> SurdSum:
        x, y = j1 * j1, j2 * j2
        return self.A * (x * x) + self.B * (y * y) + self.C * (2 * x * y) + self.m - self.a1 * x - self.a2 * y


def exact_symbol(params: ModelParams, geom: TorusGeometry) -> ExactSymbol:
    """Build the exact symbol; refuses when a coefficient is not a quadratic surd."""
    n1, n2 = geom.nu1, geom.nu2
    rads = {
        "A": params.mu * n1 ** 4,
        "B": params.mu * n2 ** 4,
        "C": params.mu * n1 ** 2 * n2 ** 2,
        "m": params.m,
    }
    bad = [k for k, v in rads.items() if not v.is_quadratic]
    if bad:
        raise MethodRefusedError(f"coefficients {bad} are not quadratic surds; exact symbol unavailable")
    A, B, C, m = (SurdSum.from_radical(rads[k]) for k in ("A", "B", "C", "m"))
    j1, j2 = params.jstar
    a1 = A * (j1 * j1) + m * Fraction(1, j1 * j1)
    a2 = B * (j2 * j2) + m * Fraction(1, j2 * j2)
    return ExactSymbol(A, B, C, m, a1, a2)


def _sgn(x: int) -> int:
    return (x > 0) - (x < 0)


def theta_vanishes_exactly(j, params: ModelParams, geom: TorusGeometry, es: ExactSymbol | None = None,
                           precision: int = 50) -> bool:
    """Decide ``Theta(j, w*, 0, 0) == 0``.

    Off the axes ``Theta = 0`` iff ``E^2 = 4 j1^2 j2^2 a1 a2`` and
    ``sign(E) = sign(j1 j2)``, which keeps everything inside the surd field.
    When the coefficients are not quadratic surds the test falls back to an
    mpmath evaluation at ``precision`` digits.
    """
    j1, j2 = int(j[0]), int(j[1])
    try:
        es = es or exact_symbol(params, geom)
    except MethodRefusedError:
        return _theta_vanishes_mp(j1, j2, params, geom, precision)
    E = es.E(j1, j2)
    if j1 == 0 or j2 == 0:
        return E.is_zero()
    D = E * E - es.a1 * es.a2 * (4 * j1 * j1 * j2 * j2)
    if not D.is_zero():
        return False
    return E.sign() == _sgn(j1 * j2)


def _theta_vanishes_mp(j1, j2, params, geom, precision):
    crit = critical_frequencies(params, geom, precision)
    with mpmath.workdps(precision):
        lam = (geom.nu1 ** 2).mp() * j1 ** 2 + (geom.nu2 ** 2).mp() * j2 ** 2
        dot = crit.omega_star_mp[0] * j1 + crit.omega_star_mp[1] * j2
        th = -dot ** 2 + params.mu.mp() * lam ** 2 + params.m.mp()
        return abs(th) < mpmath.mpf(10) ** (-(precision - 10))


def coercive_radius_sq(es: ExactSymbol) -> int:
    """Rigorous integer bound: every zero of Theta(., w*, 0, 0) has ``|j|^2`` at most this.

    From ``-(w.j)^2 + mu lam_j^2 + m > 0`` whenever ``min(A, B) |j|^2 > |w|^2``.
    """
    _, hi = (es.a1 + es.a2).bounds()
    lo = min(es.A.bounds()[0], es.B.bounds()[0])
    if lo <= 0:
        raise MethodRefusedError("could not bound mu * min(nu)^4 away from zero")
    return math.floor(hi / lo)


# -- resonance scans ----------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceScan:
    radius: int
    hits: tuple
    method: str
    rejected: tuple = ()
    set_id: str | None = None
    note: str = ""

    @property
    def kernel_size(self) -> int:
        return len(self.hits)


def _square_class(d: int, reps: list):
    """Return ``(rep, factor)`` with ``sqrt(d) = factor * sqrt(rep)``; extends ``reps``."""
    if is_perfect_square(d):
        return 1, Fraction(math.isqrt(d))
    for e in reps:
        prod = d * e
        s = math.isqrt(prod)
        if s * s == prod:
            return e, Fraction(s, e)
    reps.append(d)
    return d, Fraction(1)


def _grouped_polynomials(es: ExactSymbol, omega_product: SurdSum):
    """Theta(j, w*, 0, 0) split by square class: ``{rep: {(a, b): coeff}}`` for ``j1^a j2^b``."""
    monomials = [
        ((4, 0), es.A), ((0, 4), es.B), ((2, 2), es.C * 2), ((0, 0), es.m),
        ((2, 0), -es.a1), ((0, 2), -es.a2), ((1, 1), omega_product * (-2)),
    ]
    reps, groups = [], {}
    for mono, coeff in monomials:
        for d, c in coeff.terms.items():
            rep, f = _square_class(d, reps)
            g = groups.setdefault(rep, {})
            g[mono] = g.get(mono, Fraction(0)) + c * f
    return {rep: {k: v for k, v in g.items() if v != 0} for rep, g in groups.items()}


def _axis_roots(Ak: Fraction, ak: Fraction, m: Fraction):
    """Positive integers ``n`` with ``Ak n^4 - ak n^2 + m = 0``."""
    disc = ak * ak - 4 * Ak * m
    if disc < 0:
        return []
    if not (is_perfect_square(disc.numerator) and is_perfect_square(disc.denominator)):
        return []
    sd = Fraction(math.isqrt(disc.numerator), math.isqrt(disc.denominator))
    out = []
    for x in {(ak + sd) / (2 * Ak), (ak - sd) / (2 * Ak)}:
        if x > 0 and x.denominator == 1 and is_perfect_square(x.numerator):
            out.append(math.isqrt(x.numerator))
    return sorted(out)


def _exact_hits_S(params, geom, es):
    """Radius-free resonant set for S: rational/irrational split, then the axis quadratics."""
    a1a2 = es.a1 * es.a2
    if not a1a2.is_rational():
        raise MethodRefusedError("w1*^2 w2*^2 is irrational; S-split does not apply")
    groups = _grouped_polynomials(es, SurdSum.sqrt_rational(a1a2.rational_part()))
    separating = any(
        rep != 1 and len(poly) == 1 and all(e >= 1 for e in next(iter(poly)))
        for rep, poly in groups.items()
    )
    hits = set()
    for Ak, ak, axis in ((es.A, es.a1, 0), (es.B, es.a2, 1)):
        if not (Ak.is_rational() and ak.is_rational() and es.m.is_rational()):
            raise MethodRefusedError("axis coefficients are irrational; S-split does not apply")
        for n in _axis_roots(Ak.rational_part(), ak.rational_part(), es.m.rational_part()):
            hits.update({(n, 0), (-n, 0)} if axis == 0 else {(0, n), (0, -n)})
    note = "off-axis excluded by an irrational monomial group"
    if not separating:
        # irrational groups do not isolate j1 j2; decide the off-axis points of the coercive disk
        hits.update(_disk_hits(params, geom, es, off_axis_only=True))
        note = "off-axis points decided exactly on the coercive disk"
    return hits, note


def _disk_points(bound: int, off_axis_only=False):
    r = math.isqrt(bound)
    for j1 in range(-r, r + 1):
        for j2 in range(-r, r + 1):
            if j1 * j1 + j2 * j2 > bound or (j1 == 0 and j2 == 0):
                continue
            if off_axis_only and (j1 == 0 or j2 == 0):
                continue
            yield j1, j2


def _disk_hits(params, geom, es, off_axis_only=False):
    bound = coercive_radius_sq(es)
    return {j for j in _disk_points(bound, off_axis_only) if theta_vanishes_exactly(j, params, geom, es)}


def enumerate_resonances(params: ModelParams, geom: TorusGeometry, radius: int, method: str = "exact",
                         tol: float = 1e-8, fallback: bool = False) -> ResonanceScan:
    """Lattice points ``|j|_inf <= radius`` where ``Theta(j, w*, 0, 0) = 0``.

    ``exact`` needs the parameters to lie in S or S'; otherwise it refuses,
    or runs the floating scan when ``fallback`` is set.  The floating scan
    keeps only hits that survive an exact recheck and lists the others under
    ``rejected``.
    """
    radius = int(radius)
    if radius < 1:
        raise DomainError(f"radius must be a positive integer, got {radius}")
    if method == "exact":
        rep_s = check_membership_S(params, geom)
        rep_sp = check_membership_Sprime(params, geom)
        if rep_s.member:
            es = exact_symbol(params, geom)
            hits, note = _exact_hits_S(params, geom, es)
            set_id = "S"
        elif rep_sp.member:
            es = exact_symbol(params, geom)
            hits = _disk_hits(params, geom, es)
            note = "Diophantine pair decided on the coercive disk"
            set_id = "S'"
        else:
            if fallback:
                return enumerate_resonances(params, geom, radius, "floating", tol)
            raise MethodRefusedError(
                "parameters lie in neither S nor S'; failed "
                f"S: {list(rep_s.failed_conditions + rep_s.skipped_conditions)}, "
                f"S': {list(rep_sp.failed_conditions)}"
            )
        inside = tuple(sorted(j for j in hits if max(abs(j[0]), abs(j[1])) <= radius))
        return ResonanceScan(radius, inside, "exact", (), set_id, note)
    if method != "floating":
        raise DomainError(f"unknown method {method!r}")
    crit = critical_frequencies(params, geom)
    mu, m, a1, a2 = _float_coeffs(params, geom)
    raw = _kernels.theta_hits(radius, crit.omega_star[0], crit.omega_star[1], mu, m, a1, a2, tol)
    es = None
    try:
        es = exact_symbol(params, geom)
    except MethodRefusedError:
        pass
    hits, rejected = [], []
    for j in map(tuple, raw.tolist()):
        (hits if theta_vanishes_exactly(j, params, geom, es) else rejected).append(j)
    return ResonanceScan(radius, tuple(sorted(hits)), "floating", tuple(sorted(rejected)), None,
                         f"tolerance {tol:g}")


def scan_rows(scan: ResonanceScan, params, geom):
    """CSV rows ``j1, j2, re_theta, im_theta, is_kernel`` for every hit."""
    crit = critical_frequencies(params, geom)
    kernel = set(crit.kernel_modes)
    rows = []
    for j in scan.hits:
        th = theta_symbol(j, crit.omega_star, 0.0, 0.0, params, geom)
        rows.append((j[0], j[1], th.real, th.imag, int(j in kernel)))
    return rows


# -- coercivity bound ----------------------------------------------------------------

def default_varrho(params, geom) -> float:
    return 0.1 * min(critical_frequencies(params, geom).omega_star)


def compute_K(params: ModelParams, geom: TorusGeometry, varrho: float | None = None) -> int:
    """``K = ceil((2C^2 + 1) / (mu min(nu)^4))`` with ``C = max w_k* + varrho``.

    For ``|j|^2 >= K`` and ``|w - w*|_inf <= varrho`` this guarantees
    ``|Theta(j, w, a, g)| >= |j|^2`` for every real ``a``, ``g``.
    """
    if varrho is None:
        varrho = default_varrho(params, geom)
    varrho = float(varrho)
    if not varrho > 0:
        raise DomainError(f"varrho must be positive, got {varrho}")
    crit = critical_frequencies(params, geom)
    C = max(crit.omega_star) + varrho
    nu_min4 = min(float(geom.nu1 ** 4), float(geom.nu2 ** 4))
    return max(1, math.ceil((2 * C * C + 1) / (params.mu_f * nu_min4)))


# -- bifurcation matrix ----------------------------------------------------------------

@dataclass(frozen=True)
class BifurcationMatrix:
    entries: np.ndarray
    det_closed: float
    det_numeric: float


def bifurcation_matrix(params: ModelParams, geom: TorusGeometry, omega=None) -> BifurcationMatrix:
    """Linearization of the four bifurcation equations in ``(w1, w2, a, g)``.

    Rows: frequency equation k=1, damping equation k=1, then the same for k=2.
    """
    if omega is None:
        omega = critical_frequencies(params, geom).omega_star
    w1, w2 = omega
    j1, j2 = params.jstar
    n1, n2 = geom.nu
    n14, n24 = float(geom.nu1 ** 4), float(geom.nu2 ** 4)
    A = np.array([
        [-2 * w1 * j1 ** 2, 0.0, 0.0, 0.0],
        [0.0, 0.0, -w1 * j1, -w1 * n14 * j1 ** 5],
        [0.0, -2 * w2 * j2 ** 2, 0.0, 0.0],
        [0.0, 0.0, -w2 * j2, -w2 * n24 * j2 ** 5],
    ])
    n1s, n2s = geom.nu_sq
    closed = (-4 * w1 ** 2 * j1 ** 3 * w2 ** 2 * j2 ** 3
              * (n2s * j2 ** 2 + n1s * j1 ** 2) * (n2 * j2 + n1 * j1) * (n2 * j2 - n1 * j1))
    return BifurcationMatrix(A, float(closed), float(np.linalg.det(A)))
