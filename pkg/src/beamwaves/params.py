"""Model parameters, torus geometry and the admissible parameter sets S and S'.

Every (ir)rationality question is decided with :mod:`beamwaves.exact`, so a
membership report never depends on floating-point rounding.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, PreconditionError
from .exact import Radical, as_fraction, sqrt_is_irrational, parse_radical

__all__ = [
    "TorusGeometry",
    "ModelParams",
    "MembershipReport",
    "SampleResult",
    "sqrt_is_irrational",
    "standing_hypothesis",
    "check_membership_S",
    "check_membership_Sprime",
    "classify_case",
    "sample_dense",
    "params_to_json",
    "params_from_json",
    "to_radical",
    "running_example",
    "random_targets",
    "check_membership",
]


def to_radical(x) -> Radical:
    """Accept a Radical, int, Fraction, ``"p/q"``/``"sqrt(2)"`` string or JSON dict."""
    if isinstance(x, Radical):
        return x
    if isinstance(x, dict):
        return Radical.from_json(x)
    if isinstance(x, str):
        return parse_radical(x)
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction or a string like '1/2'")
    return Radical(as_fraction(x))


@dataclass(frozen=True)
class TorusGeometry:
    """Rectangular torus with generators L1, L2; ``nu_k = 1 / L_k``."""

    L1: Radical
    L2: Radical

    def __post_init__(self):
        object.__setattr__(self, "L1", to_radical(self.L1))
        object.__setattr__(self, "L2", to_radical(self.L2))

    @classmethod
    def from_nu(cls, nu1, nu2) -> "TorusGeometry":
        return cls(to_radical(nu1).inverse(), to_radical(nu2).inverse())

    @property
    def nu1(self) -> Radical:
        return self.L1.inverse()

    @property
    def nu2(self) -> Radical:
        return self.L2.inverse()

    @property
    def nu(self):
        return float(self.nu1), float(self.nu2)

    @property
    def nu_sq(self):
        return float(self.nu1 ** 2), float(self.nu2 ** 2)

    def swapped(self) -> "TorusGeometry":
        return TorusGeometry(self.L2, self.L1)


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the beam equation that do not vary along a branch.

    ``lam`` may be zero so that conservative runs share the same type.
    """

    mu: Radical
    m: Radical
    lam: float = 1.0
    p: int = 1
    jstar: tuple = (1, 2)

    def __post_init__(self):
        object.__setattr__(self, "mu", to_radical(self.mu))
        object.__setattr__(self, "m", to_radical(self.m))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "jstar", tuple(int(j) for j in self.jstar))
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise DomainError(f"friction coefficient must be finite and >= 0, got {self.lam}")
        if int(self.p) != self.p or self.p < 1:
            raise DomainError(f"nonlinearity degree must be a positive integer, got {self.p}")
        object.__setattr__(self, "p", int(self.p))
        if len(self.jstar) != 2 or min(self.jstar) < 1:
            raise DomainError(f"jstar must be two positive integers, got {self.jstar}")

    @property
    def mu_f(self) -> float:
        return float(self.mu)

    @property
    def m_f(self) -> float:
        return float(self.m)

    def replace(self, **kw) -> "ModelParams":
        d = dict(mu=self.mu, m=self.m, lam=self.lam, p=self.p, jstar=self.jstar)
        d.update(kw)
        return ModelParams(**d)

    def swapped(self) -> "ModelParams":
        return self.replace(jstar=self.jstar[::-1])


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    set_id: str
    case_id: int | None = None
    failed_conditions: tuple = ()
    skipped_conditions: tuple = ()

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "set_id": self.set_id,
            "case_id": self.case_id,
            "failed_conditions": list(self.failed_conditions),
            "skipped_conditions": list(self.skipped_conditions),
        }


def standing_hypothesis(params: ModelParams, geom: TorusGeometry) -> bool:
    """True iff ``nu1 * j1* != nu2 * j2*`` exactly."""
    j1, j2 = params.jstar
    return not (geom.nu1 * j1 == geom.nu2 * j2)


def _require_standing(params, geom):
    if not standing_hypothesis(params, geom):
        j1, j2 = params.jstar
        raise PreconditionError(f"standing hypothesis violated: nu1*j1* = nu2*j2* = {geom.nu1 * j1}")


def _is_natural(x: Radical) -> bool:
    return x.is_rational and x.r.denominator == 1 and x.r >= 1


def classify_case(geom: TorusGeometry):
    """Geometry case 1..6 of the admissible set S, or None if nu2^4/nu1^4 is irrational."""
    n1, n2 = geom.nu1, geom.nu2
    if not (n2 ** 4 / n1 ** 4).is_rational:
        return None
    sq_ratio_rational = (n2 ** 2 / n1 ** 2).is_rational
    if (n1 ** 4).is_rational:
        r1, r2 = (n1 ** 2).is_rational, (n2 ** 2).is_rational
        if (r1 and r2) or (not r1 and not r2 and sq_ratio_rational):
            return 1
        if not r1 and r2:
            return 2
        if r1 and not r2:
            return 3
        return 4
    return 5 if sq_ratio_rational else 6


def _s_conditions(params, geom):
    """Named exact predicates of S, in canonical order.

    Each entry is ``(name, thunk)``; a thunk returns True/False, or None when
    a prerequisite failed and the condition cannot be evaluated.
    """
    j1, j2 = params.jstar
    n1, n2 = geom.nu1, geom.nu2
    A = params.mu * n1 ** 4
    B = params.mu * n2 ** 4
    m = params.m

    def ratio():
        if not (A.is_rational and B.is_rational and m.is_rational):
            return None
        return (A.r * j1 ** 4 + m.r) / (B.r * j2 ** 4 + m.r)

    def sqrt_ratio_irr():
        q = ratio()
        return None if q is None else sqrt_is_irrational(q)

    def scaled_irr():
        q = ratio()
        if q is None:
            return None
        return not ((n1 ** 2 / n2 ** 2) * Radical(q).sqrt()).is_rational

    return [
        ("nu4_ratio_rational", lambda: (n2 ** 4 / n1 ** 4).is_rational),
        ("mu_nu1_4_rational", lambda: A.is_rational),
        ("m_rational", lambda: m.is_rational),
        ("m_over_mu_nu1_4_not_natural", lambda: not _is_natural(m / A)),
        ("m_over_mu_nu2_4_not_natural", lambda: not _is_natural(m / B)),
        ("sqrt_ratio_irrational", sqrt_ratio_irr),
        ("scaled_sqrt_ratio_irrational", scaled_irr),
    ]


def _sprime_conditions(params, geom):
    n1, n2 = geom.nu1, geom.nu2
    mu, m = params.mu, params.m
    return [
        ("mu_squared_rational", lambda: (mu ** 2).is_rational),
        ("m_squared_rational", lambda: (m ** 2).is_rational),
        ("m_over_mu_irrational", lambda: not (m / mu).is_rational),
        ("nu1_4_rational", lambda: (n1 ** 4).is_rational),
        ("nu2_4_rational", lambda: (n2 ** 4).is_rational),
        ("nu2_2_over_nu1_2_rational", lambda: (n2 ** 2 / n1 ** 2).is_rational),
    ]


def _evaluate(conditions, order=None):
    names = [c[0] for c in conditions]
    idx = list(range(len(conditions))) if order is None else list(order)
    outcome = {}
    for i in idx:
        name, thunk = conditions[i]
        outcome[name] = thunk()
    failed = tuple(n for n in names if outcome[n] is False)
    skipped = tuple(n for n in names if outcome[n] is None)
    return failed, skipped


def check_membership_S(params: ModelParams, geom: TorusGeometry, order=None) -> MembershipReport:
    """Exact membership in S; ``order`` permutes the evaluation sequence only."""
    _require_standing(params, geom)
    failed, skipped = _evaluate(_s_conditions(params, geom), order)
    return MembershipReport(
        member=not failed and not skipped,
        set_id="S",
        case_id=classify_case(geom),
        failed_conditions=failed,
        skipped_conditions=skipped,
    )


def check_membership_Sprime(params: ModelParams, geom: TorusGeometry, order=None) -> MembershipReport:
    """Exact membership in S'. Geometry failures are reported, not raised."""
    _require_standing(params, geom)
    failed, skipped = _evaluate(_sprime_conditions(params, geom), order)
    return MembershipReport(member=not failed, set_id="S'", failed_conditions=failed, skipped_conditions=skipped)


def check_membership(params, geom, set_id: str) -> MembershipReport:
    if set_id == "S":
        return check_membership_S(params, geom)
    if set_id in ("S'", "Sprime"):
        return check_membership_Sprime(params, geom)
    raise DomainError(f"unknown set id {set_id!r}")


# -- dense sampling -----------------------------------------------------------

@dataclass
class SampleResult:
    success: bool
    params: ModelParams | None
    attempts: int
    message: str = ""
    report: MembershipReport | None = field(default=None, repr=False)


def _near_fractions(x: float, den: int, radius: int):
    """Fractions n/den with n near x*den, nearest first, all positive."""
    c = round(x * den)
    for k in range(radius + 1):
        for n in ((c,) if k == 0 else (c - k, c + k)):
            if n > 0:
                yield Fraction(n, den)


def sample_dense(target, epsilon, set_id, geom: TorusGeometry, jstar=(1, 2), lam=1.0, p=1,
                 max_levels: int = 40, scan_radius: int = 8) -> SampleResult:
    """Find an admissible (mu, m) within ``epsilon`` of ``target`` in each coordinate.

    Rationals of denominator ``den = ceil(4/eps) * 2**level`` are scanned around
    the target; the denominator grows geometrically until a candidate passes
    the exact membership check or ``max_levels`` is exhausted.
    """
    mu0, m0 = (float(t) for t in target)
    eps = float(epsilon)
    if not eps > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if not (mu0 > 0 and m0 > 0):
        raise DomainError(f"target must lie in the open positive quadrant, got {target}")
    set_id = "S'" if set_id in ("S'", "Sprime") else set_id
    if set_id not in ("S", "S'"):
        raise DomainError(f"unknown set id {set_id!r}")
    base = math.ceil(4.0 / eps)
    nu1_4 = geom.nu1 ** 4
    attempts = 0
    last = None
    for level in range(max_levels):
        den = base * 2 ** level
        for mu_candidate in _mu_candidates(mu0, den, set_id, nu1_4, scan_radius):
            if abs(float(mu_candidate) - mu0) >= eps:
                continue
            for m_candidate in _m_candidates(m0, den, set_id, scan_radius):
                if abs(float(m_candidate) - m0) >= eps:
                    continue
                attempts += 1
                cand = ModelParams(mu_candidate, m_candidate, lam, p, jstar)
                try:
                    rep = check_membership(cand, geom, set_id)
                except PreconditionError as exc:
                    return SampleResult(False, None, attempts, str(exc))
                last = rep
                if rep.member:
                    return SampleResult(True, cand, attempts, "ok", rep)
                if _geometry_failure(rep):
                    return SampleResult(False, None, attempts, f"geometry incompatible with {set_id}: {rep.failed_conditions}", rep)
    return SampleResult(False, None, attempts, "search budget exhausted", last)


_GEOMETRY_CONDITIONS = {"nu4_ratio_rational", "nu1_4_rational", "nu2_4_rational", "nu2_2_over_nu1_2_rational"}


def _geometry_failure(rep):
    return bool(_GEOMETRY_CONDITIONS.intersection(rep.failed_conditions))


def _mu_candidates(mu0, den, set_id, nu1_4, radius):
    if set_id == "S":
        # mu * nu1^4 rational: mu = q / nu1^4
        target_q = mu0 * float(nu1_4)
        for q in _near_fractions(target_q, den, radius):
            yield Radical(q) / nu1_4
    else:
        for q in _near_fractions(mu0, den, radius):
            yield Radical(q)


_SAMPLE_PRIMES = (2, 3, 5, 7, 11, 13)


def _m_candidates(m0, den, set_id, radius):
    if set_id == "S":
        for q in _near_fractions(m0, den, radius):
            yield Radical(q)
    else:
        # m = r * sqrt(prime) with r rational: m^2 rational, m/mu irrational
        for prime in _SAMPLE_PRIMES:
            for q in _near_fractions(m0 / math.sqrt(prime), den, radius):
                yield Radical(q, prime, 2)


def random_targets(n, lo=0.1, hi=10.0, seed=0):
    rng = random.Random(seed)
    return [(rng.uniform(lo, hi), rng.uniform(lo, hi)) for _ in range(n)]


# -- serialization ------------------------------------------------------------

def params_to_json(params: ModelParams, geom: TorusGeometry) -> dict:
    return {
        "mu": params.mu.to_json(),
        "m": params.m.to_json(),
        "L1": geom.L1.to_json(),
        "L2": geom.L2.to_json(),
        "lambda": params.lam,
        "p": params.p,
        "jstar": list(params.jstar),
    }


def params_from_json(obj: dict):
    geom = TorusGeometry(to_radical(obj.get("L1", 1)), to_radical(obj.get("L2", 1)))
    params = ModelParams(
        to_radical(obj["mu"]),
        to_radical(obj["m"]),
        float(obj.get("lambda", 1.0)),
        int(obj.get("p", 1)),
        tuple(obj.get("jstar", (1, 2))),
    )
    return params, geom


def running_example():
    """mu = 1, m = 1/2, nu = (1, 1), j* = (1, 2), p = 1, lambda = 1."""
    return ModelParams(Radical(1), Radical(Fraction(1, 2)), 1.0, 1, (1, 2)), TorusGeometry(Radical(1), Radical(1))
