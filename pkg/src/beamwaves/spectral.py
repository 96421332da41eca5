"""Truncated Fourier fields on the 2-torus and the operators acting on them.

A field of truncation ``N`` stores ``c_j`` for ``|j|_inf <= N`` in a centred
``(2N+1, 2N+1)`` array, ``coeffs[j1 + N, j2 + N] = c_j``, so that
``phi(theta) = sum_j c_j exp(i j.theta)``.  Real fields satisfy
``c_{-j} = conj(c_j)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from . import _kernels
from .errors import ConfigurationError, DomainError
from .resonance import theta_values

__all__ = [
    "FourierField",
    "SpectralSplit",
    "kernel_field",
    "lattice",
    "theta_array",
    "apply_linear",
    "multiplier",
    "nonlinearity",
    "dealias_size",
    "to_physical",
    "from_physical",
    "sobolev_norm",
    "make_split",
    "project",
]


def lattice(N: int):
    """Integer arrays ``(J1, J2)`` of shape ``(2N+1, 2N+1)``, centred indexing."""
    j = np.arange(-N, N + 1)
    return np.meshgrid(j, j, indexing="ij")


class FourierField:
    """Immutable-by-convention truncated Fourier series of a real field."""

    __slots__ = ("N", "coeffs")

    def __init__(self, N: int, coeffs=None):
        N = int(N)
        if N < 0:
            raise DomainError("truncation N must be nonnegative")
        shape = (2 * N + 1, 2 * N + 1)
        if coeffs is None:
            c = np.zeros(shape, dtype=np.complex128)
        else:
            c = np.array(coeffs, dtype=np.complex128)
            if c.shape != shape:
                raise DomainError(f"coefficient array has shape {c.shape}, expected {shape}")
        self.N = N
        self.coeffs = c

    @classmethod
    def zeros(cls, N):
        return cls(N)

    @classmethod
    def from_modes(cls, N, modes: dict, hermitian=True):
        """Field with ``c_j = modes[j]`` (and ``c_{-j} = conj`` when ``hermitian``)."""
        f = cls(N)
        for (j1, j2), v in modes.items():
            f.coeffs[j1 + N, j2 + N] = v
            if hermitian:
                f.coeffs[-j1 + N, -j2 + N] = np.conj(v)
        return f

    def __getitem__(self, j):
        j1, j2 = j
        if max(abs(j1), abs(j2)) > self.N:
            return 0j
        return complex(self.coeffs[j1 + self.N, j2 + self.N])

    def _check(self, other):
        if not isinstance(other, FourierField):
            raise TypeError("expected a FourierField")
        if other.N != self.N:
            raise DomainError(f"truncations differ: {self.N} vs {other.N}")

    def __add__(self, other):
        self._check(other)
        return FourierField(self.N, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return FourierField(self.N, self.coeffs - other.coeffs)

    def __neg__(self):
        return FourierField(self.N, -self.coeffs)

    def __mul__(self, s):
        return FourierField(self.N, self.coeffs * s)

    __rmul__ = __mul__

    def scale_by(self, symbol):
        """Pointwise multiplication of coefficients by a multiplier array."""
        return FourierField(self.N, self.coeffs * symbol)

    def resized(self, N: int) -> "FourierField":
        """Zero-pad or truncate to truncation ``N``."""
        out = FourierField(N)
        k = min(N, self.N)
        out.coeffs[N - k:N + k + 1, N - k:N + k + 1] = self.coeffs[self.N - k:self.N + k + 1, self.N - k:self.N + k + 1]
        return out

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1, ::-1]))))

    def symmetrized(self) -> "FourierField":
        return FourierField(self.N, 0.5 * (self.coeffs + np.conj(self.coeffs[::-1, ::-1])))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def translated(self, c1: float, c2: float) -> "FourierField":
        """``phi(theta + c)``."""
        J1, J2 = lattice(self.N)
        return FourierField(self.N, self.coeffs * np.exp(1j * (J1 * c1 + J2 * c2)))

    def to_json(self) -> dict:
        """Upper half-lattice (``j1 > 0``, or ``j1 == 0`` and ``j2 >= 0``), nonzero entries."""
        rows = []
        N = self.N
        for j1 in range(0, N + 1):
            for j2 in range(-N, N + 1):
                if j1 == 0 and j2 < 0:
                    continue
                v = self.coeffs[j1 + N, j2 + N]
                if v != 0:
                    rows.append([j1, j2, float(v.real), float(v.imag)])
        return {"N": N, "coeffs": rows}

    @classmethod
    def from_json(cls, obj) -> "FourierField":
        modes = {(int(a), int(b)): complex(re, im) for a, b, re, im in obj["coeffs"]}
        f = cls.from_modes(int(obj["N"]), modes)
        N = f.N
        if (0, 0) in modes:
            f.coeffs[N, N] = modes[(0, 0)].real
        return f

    def __repr__(self):
        return f"FourierField(N={self.N}, max|c|={self.max_abs():.3e})"


def kernel_field(rho, jstar, N: int) -> FourierField:
    """``v(rho) = 2 rho1 cos(j1* theta1) + 2 rho2 cos(j2* theta2)``."""
    r1, r2 = float(rho[0]), float(rho[1])
    if r1 < 0 or r2 < 0:
        raise DomainError(f"kernel amplitudes must be nonnegative, got {rho}")
    j1, j2 = jstar
    if N < max(j1, j2):
        raise DomainError(f"truncation N={N} below max(j*)={max(j1, j2)}")
    modes = {}
    if r1:
        modes[(j1, 0)] = r1
    if r2:
        modes[(0, j2)] = r2
    return FourierField.from_modes(N, modes)


def theta_array(N, omega, alpha, gamma, params, geom):
    J1, J2 = lattice(N)
    return theta_values(J1, J2, omega, alpha, gamma, params, geom)


def multiplier(N, kind: str, omega=None, geom=None):
    """Symbols of the constituent operators on the centred lattice.

    ``grad``: ``i w.j``; ``lap``: ``-lam_j``; ``bilap``: ``lam_j^2``.
    """
    J1, J2 = lattice(N)
    if kind == "grad":
        return 1j * (omega[0] * J1 + omega[1] * J2)
    a1, a2 = geom.nu_sq
    lam = a1 * J1 * J1 + a2 * J2 * J2
    if kind == "lap":
        return -lam.astype(np.float64)
    if kind == "bilap":
        return (lam * lam).astype(np.float64)
    raise DomainError(f"unknown multiplier {kind!r}")


def apply_linear(field: FourierField, omega, alpha, gamma, params, geom) -> FourierField:
    return field.scale_by(theta_array(field.N, omega, alpha, gamma, params, geom))


def dealias_size(N: int, degree: int) -> int:
    """Smallest fast FFT length ``M >= (degree + 1) N + 1``."""
    return sfft.next_fast_len((degree + 1) * N + 1)


def _fft_index(N, M):
    return np.arange(-N, N + 1) % M


def to_physical(field: FourierField, M: int) -> np.ndarray:
    """Real values on the ``M x M`` grid ``theta = 2 pi (n1, n2) / M``."""
    if M < 2 * field.N + 1:
        raise ConfigurationError(f"grid {M} cannot hold truncation {field.N}")
    g = np.zeros((M, M), dtype=np.complex128)
    idx = _fft_index(field.N, M)
    g[np.ix_(idx, idx)] = field.coeffs
    return sfft.ifft2(g, norm="forward").real


def from_physical(values: np.ndarray, N: int) -> FourierField:
    M = values.shape[0]
    c = sfft.fft2(values, norm="forward")
    idx = _fft_index(N, M)
    return FourierField(N, c[np.ix_(idx, idx)]).symmetrized()


def nonlinearity(field: FourierField, omega, params, M: int | None = None) -> FourierField:
    """``lambda * ((w.grad) phi)^(2p+1)`` by alias-free pseudo-spectral evaluation."""
    q = 2 * params.p + 1
    N = field.N
    need = (q + 1) * N + 1
    if M is None:
        M = dealias_size(N, q)
    elif M < need:
        raise ConfigurationError(f"grid M={M} aliases a degree-{q} product at N={N}; need M >= {need}")
    if params.lam == 0.0:
        return FourierField(N)
    d = field.scale_by(multiplier(N, "grad", omega))
    x = to_physical(d, M)
    return from_physical(_kernels.pow_scale(x, q, params.lam), N)


def sobolev_norm(field: FourierField, s: float = 0.0) -> float:
    """``(sum_j (1 + |j|^(2s)) |c_j|^2)^(1/2)`` over retained modes."""
    if s < 0:
        raise DomainError(f"Sobolev index must be nonnegative, got {s}")
    J1, J2 = lattice(field.N)
    w = 1.0 + (J1 * J1 + J2 * J2).astype(np.float64) ** s
    return float(np.sqrt(np.sum(w * np.abs(field.coeffs) ** 2)))


@dataclass(frozen=True)
class SpectralSplit:
    """Index sets: kernel ``V``, ``J1 = {|j|^2 >= K} \\ V`` (Y part), ``J2`` the rest of W (Z part)."""

    N: int
    K: int
    jstar: tuple
    kernel_modes: tuple
    mask_V: np.ndarray
    mask_Y: np.ndarray
    mask_Z: np.ndarray

    @property
    def mask_W(self):
        return self.mask_Y | self.mask_Z

    def indices(self, which: str) -> np.ndarray:
        """Lattice points of a mask as an ``(n, 2)`` array in ``(j1, j2)``."""
        mask = {"V": self.mask_V, "W": self.mask_W, "Y": self.mask_Y, "Z": self.mask_Z}[which]
        J1, J2 = lattice(self.N)
        return np.stack([J1[mask], J2[mask]], axis=1)


def make_split(N: int, K: int, jstar) -> SpectralSplit:
    j1, j2 = jstar
    J1, J2 = lattice(N)
    kernel = ((j1, 0), (-j1, 0), (0, j2), (0, -j2))
    V = np.zeros(J1.shape, dtype=bool)
    for a, b in kernel:
        if max(abs(a), abs(b)) <= N:
            V[a + N, b + N] = True
    big = (J1 * J1 + J2 * J2) >= K
    return SpectralSplit(N, int(K), tuple(jstar), kernel, V, big & ~V, ~big & ~V)


def project(field: FourierField, target: str, split: SpectralSplit) -> FourierField:
    if split.N != field.N:
        raise DomainError("split and field truncations differ")
    mask = {"V": split.mask_V, "W": split.mask_W, "Y": split.mask_Y, "Z": split.mask_Z}.get(target)
    if mask is None:
        raise DomainError(f"unknown projection target {target!r}")
    return FourierField(field.N, np.where(mask, field.coeffs, 0))
