"""Hot loops, each with a numba and a pure-numpy implementation.

Set ``BEAMWAVES_DISABLE_NUMBA=1`` to force the numpy path.  The numba path is
also skipped silently when numba cannot be imported.  Both implementations
return identical results up to round-off; ``benchmarks/bench_kernels.py``
times one against the other.
"""
import os
import types

import numpy as np

_DISABLED = os.environ.get("BEAMWAVES_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


# -- numpy reference path -----------------------------------------------------

def _theta_hits_np(R, w1, w2, mu, m, a1, a2, tol):
    j = np.arange(-R, R + 1, dtype=np.float64)
    J1, J2 = np.meshgrid(j, j, indexing="ij")
    lam = a1 * J1 * J1 + a2 * J2 * J2
    dot = w1 * J1 + w2 * J2
    th = -dot * dot + mu * lam * lam + m
    mask = np.abs(th) < tol
    return np.stack([J1[mask], J2[mask]], axis=1).astype(np.int64)


def _propagate_np(u, v, p11, p12, p21, p22):
    return p11 * u + p12 * v, p21 * u + p22 * v


def _pow_scale_np(x, q, scale):
    return scale * x ** q


def _jacobian_np(idx, gext, offset, theta, dk, coef):
    d1 = idx[:, None, 0] - idx[None, :, 0] + offset
    d2 = idx[:, None, 1] - idx[None, :, 1] + offset
    J = -coef * gext[d1, d2] * dk[None, :]
    J[np.diag_indices_from(J)] += theta
    return J


numpy_impl = types.SimpleNamespace(
    theta_hits=_theta_hits_np,
    propagate=_propagate_np,
    pow_scale=_pow_scale_np,
    jacobian=_jacobian_np,
)


# -- numba path -----------------------------------------------------------------

def _build_numba():
    njit = numba.njit(cache=True, nogil=True)

    @njit
    def theta_hits(R, w1, w2, mu, m, a1, a2, tol):
        n = 2 * R + 1
        out = np.empty((n * n, 2), dtype=np.int64)
        c = 0
        for i1 in range(-R, R + 1):
            x1 = float(i1)
            for i2 in range(-R, R + 1):
                x2 = float(i2)
                lam = a1 * x1 * x1 + a2 * x2 * x2
                dot = w1 * x1 + w2 * x2
                th = -dot * dot + mu * lam * lam + m
                if abs(th) < tol:
                    out[c, 0] = i1
                    out[c, 1] = i2
                    c += 1
        return out[:c].copy()

    @njit
    def propagate(u, v, p11, p12, p21, p22):
        uf = u.ravel()
        vf = v.ravel()
        a = p11.ravel()
        b = p12.ravel()
        c = p21.ravel()
        d = p22.ravel()
        nu = np.empty_like(uf)
        nv = np.empty_like(vf)
        for i in range(uf.size):
            x = uf[i]
            y = vf[i]
            nu[i] = a[i] * x + b[i] * y
            nv[i] = c[i] * x + d[i] * y
        return nu.reshape(u.shape), nv.reshape(v.shape)

    @njit
    def pow_scale(x, q, scale):
        xf = x.ravel()
        out = np.empty_like(xf)
        for i in range(xf.size):
            base = xf[i]
            acc = 1.0
            for _ in range(q):
                acc *= base
            out[i] = scale * acc
        return out.reshape(x.shape)

    @njit
    def jacobian(idx, gext, offset, theta, dk, coef):
        n = idx.shape[0]
        J = np.empty((n, n), dtype=np.complex128)
        for a in range(n):
            for b in range(n):
                J[a, b] = -coef * gext[idx[a, 0] - idx[b, 0] + offset, idx[a, 1] - idx[b, 1] + offset] * dk[b]
            J[a, a] += theta[a]
        return J

    return types.SimpleNamespace(theta_hits=theta_hits, propagate=propagate, pow_scale=pow_scale, jacobian=jacobian)


numba_impl = _build_numba() if numba is not None else None

NUMBA_ENABLED = numba_impl is not None and not _DISABLED
active = numba_impl if NUMBA_ENABLED else numpy_impl


def theta_hits(R, w1, w2, mu, m, a1, a2, tol):
    """Lattice points ``|j|_inf <= R`` where ``|Theta(j, w, 0, 0)| < tol``.

    ``a_k`` is ``nu_k**2``; the result is an ``(n, 2)`` int64 array.
    """
    return active.theta_hits(int(R), float(w1), float(w2), float(mu), float(m), float(a1), float(a2), float(tol))


def propagate(u, v, p11, p12, p21, p22):
    """Apply per-mode 2x2 matrices ``[[p11, p12], [p21, p22]]`` to ``(u, v)``."""
    return active.propagate(u, v, p11, p12, p21, p22)


def pow_scale(x, q, scale):
    """``scale * x**q`` for a real array and positive integer ``q``."""
    return active.pow_scale(np.ascontiguousarray(x, dtype=np.float64), int(q), float(scale))


def jacobian(idx, gext, offset, theta, dk, coef):
    """Dense Jacobian ``diag(theta) - coef * g_hat[j_a - j_b] * dk_b`` on a finite mode set."""
    return active.jacobian(
        np.ascontiguousarray(idx, dtype=np.int64),
        np.ascontiguousarray(gext, dtype=np.complex128),
        int(offset),
        np.ascontiguousarray(theta, dtype=np.complex128),
        np.ascontiguousarray(dk, dtype=np.complex128),
        complex(coef),
    )
