"""Exact arithmetic on radicals ``r * d**(1/k)`` and sums of square roots.

Two number types cover every (ir)rationality question the package asks:

* :class:`Radical` -- a positive monomial ``r * d**(1/k)`` with ``r`` rational
  and ``d`` a positive integer.  Closed under ``*``, ``/``, integer powers and
  integer roots, so torus frequencies like ``2**(1/8)`` and quantities such as
  ``nu1**2 / nu2**2`` stay exact.
* :class:`SurdSum` -- a finite sum ``sum_i c_i * sqrt(d_i)`` with rational
  ``c_i``.  Square roots of distinct square-free integers are linearly
  independent over Q, so a sum in canonical form is zero iff every coefficient
  is zero.  Canonical merging only needs perfect-square tests, never integer
  factorisation, which keeps large sampled denominators cheap.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import mpmath

from .errors import DomainError

_SMALL_PRIMES = [p for p in range(2, 1000) if all(p % q for q in range(2, int(p ** 0.5) + 1))]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction (no floats)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def iroot(n: int, k: int) -> int:
    """Floor of the integer k-th root of ``n >= 0``."""
    if n < 0:
        raise DomainError("iroot of a negative integer")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def is_perfect_power(n: int, k: int) -> bool:
    return n >= 0 and iroot(n, k) ** k == n


def is_perfect_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def fraction_to_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@lru_cache(maxsize=4096)
def _normal_form(d: int, k: int):
    """Split ``d**(1/k)`` into ``(integer factor, reduced d, reduced k)``.

    Small primes are extracted by trial division; the remaining cofactor is
    treated as an opaque base after removing its largest perfect-power part.
    The value is always exact; the form is canonical whenever ``d`` factors
    over the small-prime table.
    """
    out = 1
    parts = []
    rest = d
    for p in _SMALL_PRIMES:
        if p * p > rest:
            break
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        if e:
            out *= p ** (e // k)
            if e % k:
                parts.append((p, e % k))
    if rest > 1:
        g = 1
        for cand in range(max(2, k), 1, -1):
            t = iroot(rest, cand)
            if t ** cand == rest:
                rest, g = t, cand
                break
        out *= rest ** (g // k)
        if g % k:
            parts.append((rest, g % k))
    kk = k
    common = kk
    for _, e in parts:
        common = math.gcd(common, e)
    if parts and common > 1:
        kk //= common
        parts = [(b, e // common) for b, e in parts]
    dd = 1
    for b, e in parts:
        dd *= b ** e
    if dd == 1:
        kk = 1
    return out, dd, kk


class Radical:
    """Positive real ``r * d**(1/k)``; ``k <= 2`` is a quadratic surd."""

    __slots__ = ("r", "d", "k")

    def __init__(self, r, d: int = 1, k: int = 1):
        r = as_fraction(r)
        d = int(d)
        k = int(k)
        if r <= 0:
            raise DomainError(f"radical coefficient must be positive, got {r}")
        if d < 1 or k < 1:
            raise DomainError(f"radicand and index must be positive, got d={d}, k={k}")
        factor, d, k = _normal_form(d, k)
        self.r = r * factor
        self.d = d
        self.k = k

    # -- construction helpers -------------------------------------------------
    @classmethod
    def rational(cls, q) -> "Radical":
        return cls(q, 1, 1)

    @classmethod
    def coerce(cls, x) -> "Radical":
        if isinstance(x, Radical):
            return x
        return cls(as_fraction(x), 1, 1)

    # -- predicates -----------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.k == 1

    @property
    def is_quadratic(self) -> bool:
        return self.k <= 2

    def to_fraction(self) -> Fraction:
        if not self.is_rational:
            raise DomainError(f"{self} is irrational")
        return self.r

    # -- arithmetic -----------------------------------------------------------
    def __mul__(self, other):
        if not isinstance(other, Radical):
            try:
                other = Radical.coerce(other)
            except (TypeError, DomainError):
                return NotImplemented
        L = self.k * other.k // math.gcd(self.k, other.k)
        d = self.d ** (L // self.k) * other.d ** (L // other.k)
        return Radical(self.r * other.r, d, L)

    __rmul__ = __mul__

    def inverse(self) -> "Radical":
        return Radical(1 / (self.r * self.d), self.d ** (self.k - 1), self.k)

    def __truediv__(self, other):
        if not isinstance(other, Radical):
            try:
                other = Radical.coerce(other)
            except (TypeError, DomainError):
                return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Radical.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "Radical":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return Radical(1)
        return Radical(self.r ** n, self.d ** n, self.k)

    def root(self, n: int) -> "Radical":
        """Exact positive n-th root."""
        a, b = self.r.numerator, self.r.denominator
        inner = (a * b ** (n - 1)) ** self.k * self.d
        return Radical(Fraction(1, b), inner, self.k * n)

    def sqrt(self) -> "Radical":
        return self.root(2)

    def __eq__(self, other):
        if not isinstance(other, Radical):
            try:
                other = Radical.coerce(other)
            except (TypeError, DomainError):
                return NotImplemented
        q = self / other
        return q.is_rational and q.r == 1

    __hash__ = None

    # -- conversion -----------------------------------------------------------
    def __float__(self) -> float:
        if self.d == 1:
            return float(self.r)
        return float(self.r) * math.exp(math.log(self.d) / self.k)

    def mp(self):
        """Value as an mpmath number at the caller's working precision."""
        val = mpmath.mpf(self.r.numerator) / self.r.denominator
        if self.d != 1:
            val *= mpmath.root(mpmath.mpf(self.d), self.k)
        return val

    def to_json(self) -> dict:
        return {"r": fraction_to_str(self.r), "d": self.d, "k": self.k}

    @classmethod
    def from_json(cls, obj) -> "Radical":
        if isinstance(obj, (int, str)):
            return parse_radical(str(obj))
        return cls(as_fraction(str(obj["r"])), int(obj.get("d", 1)), int(obj.get("k", 2)))

    def __repr__(self):
        return f"Radical({fraction_to_str(self.r)}, d={self.d}, k={self.k})"

    def __str__(self):
        head = str(self.r)
        if self.d == 1:
            return head
        tail = f"sqrt({self.d})" if self.k == 2 else f"root({self.d},{self.k})"
        return tail if self.r == 1 else f"{head}*{tail}"


def surd(r, d: int = 1) -> Radical:
    """Quadratic surd ``r * sqrt(d)``."""
    return Radical(r, d, 2)


def parse_radical(text: str) -> Radical:
    """Parse ``"3/2"``, ``"sqrt(2)"``, ``"1/2*sqrt(3)"`` or ``"2*root(18,8)"``."""
    s = text.replace(" ", "")
    coeff = Fraction(1)
    if "*" in s:
        head, s = s.split("*", 1)
        coeff = Fraction(head)
    if s.startswith("sqrt(") and s.endswith(")"):
        return Radical(coeff, int(s[5:-1]), 2)
    if s.startswith("root(") and s.endswith(")"):
        d, k = s[5:-1].split(",")
        return Radical(coeff, int(d), int(k))
    return Radical(coeff * Fraction(s), 1, 1)


def sqrt_is_irrational(q) -> bool:
    """True iff the square root of the positive rational ``q`` is irrational."""
    q = as_fraction(q)
    if q <= 0:
        raise DomainError(f"square root irrationality needs q > 0, got {q}")
    return not (is_perfect_square(q.numerator) and is_perfect_square(q.denominator))


def exact_sqrt(q) -> Fraction:
    """Rational square root of ``q``; raises if it is irrational."""
    q = as_fraction(q)
    if sqrt_is_irrational(q):
        raise DomainError(f"sqrt({q}) is irrational")
    return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))


class SurdSum:
    """Exact element ``sum c_d * sqrt(d)`` of a multi-quadratic field.

    Terms are stored with pairwise square-class-distinct radicands, so
    :meth:`is_zero` is a decision procedure rather than a numerical test.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for d, c in terms.items():
                self._add_term(int(d), as_fraction(c))

    def _add_term(self, d: int, c: Fraction):
        if c == 0:
            return
        if d < 1:
            raise DomainError("radicands must be positive")
        if d != 1 and is_perfect_square(d):
            c, d = c * math.isqrt(d), 1
        if d not in self.terms:
            for e in self.terms:
                if e == 1 and d != 1:
                    continue
                prod = d * e
                s = math.isqrt(prod)
                if s * s == prod:
                    # sqrt(d) = (s / e) * sqrt(e)
                    c, d = c * Fraction(s, e), e
                    break
        new = self.terms.get(d, Fraction(0)) + c
        if new == 0:
            self.terms.pop(d, None)
        else:
            self.terms[d] = new

    @classmethod
    def rational(cls, q) -> "SurdSum":
        return cls({1: as_fraction(q)})

    @classmethod
    def from_radical(cls, rad: Radical) -> "SurdSum":
        rad = Radical.coerce(rad)
        if rad.k > 2:
            raise DomainError(f"{rad} is not a quadratic surd")
        return cls({rad.d: rad.r})

    @classmethod
    def sqrt_rational(cls, q) -> "SurdSum":
        """Square root of a nonnegative rational as ``(1/b) * sqrt(a*b)``."""
        q = as_fraction(q)
        if q < 0:
            raise DomainError("square root of a negative rational")
        if q == 0:
            return cls()
        return cls({q.numerator * q.denominator: Fraction(1, q.denominator)})

    @classmethod
    def coerce(cls, x) -> "SurdSum":
        if isinstance(x, SurdSum):
            return x
        if isinstance(x, Radical):
            return cls.from_radical(x)
        return cls.rational(x)

    def copy(self) -> "SurdSum":
        out = SurdSum()
        out.terms = dict(self.terms)
        return out

    def __add__(self, other):
        other = SurdSum.coerce(other)
        out = self.copy()
        for d, c in other.terms.items():
            out._add_term(d, c)
        return out

    __radd__ = __add__

    def __neg__(self):
        out = SurdSum()
        out.terms = {d: -c for d, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-SurdSum.coerce(other))

    def __rsub__(self, other):
        return SurdSum.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            out = SurdSum()
            if other != 0:
                out.terms = {d: c * other for d, c in self.terms.items()}
            return out
        other = SurdSum.coerce(other)
        out = SurdSum()
        for d1, c1 in self.terms.items():
            for d2, c2 in other.terms.items():
                g = math.gcd(d1, d2)
                # sqrt(d1 d2) = g * sqrt(d1 d2 / g^2) when d1, d2 are square-class reps
                out._add_term(d1 * d2 // (g * g), c1 * c2 * g)
        return out

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return all(d == 1 for d in self.terms)

    def rational_part(self) -> Fraction:
        return self.terms.get(1, Fraction(0))

    def radicands(self):
        return sorted(self.terms)

    def bounds(self, bits: int = 64):
        """Rigorous enclosure ``lo <= value <= hi`` with Fractions."""
        lo = hi = Fraction(0)
        scale = 1 << bits
        for d, c in self.terms.items():
            if d == 1:
                lo += c
                hi += c
                continue
            s = math.isqrt(d << (2 * bits))
            a, b = Fraction(s, scale), Fraction(s + 1, scale)
            if c > 0:
                lo += c * a
                hi += c * b
            else:
                lo += c * b
                hi += c * a
        return lo, hi

    def sign(self) -> int:
        if self.is_zero():
            return 0
        bits = 64
        while True:
            lo, hi = self.bounds(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2

    def __float__(self) -> float:
        return float(sum(float(c) * math.sqrt(d) for d, c in self.terms.items()))

    def mp(self):
        return mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * mpmath.sqrt(d) for d, c in self.terms.items())

    def __eq__(self, other):
        try:
            return (self - SurdSum.coerce(other)).is_zero()
        except (TypeError, DomainError):
            return NotImplemented

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "SurdSum(0)"
        body = " + ".join(f"{c}" if d == 1 else f"{c}*sqrt({d})" for d, c in sorted(self.terms.items()))
        return f"SurdSum({body})"
