"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run once to trigger compilation, then timed; outputs of the
two paths are compared before timing.
"""
import argparse
import timeit

import numpy as np

from beamwaves import _kernels


def cases(rng):
    N, M = 16, 72
    u = rng.standard_normal((33, 33)) + 1j * rng.standard_normal((33, 33))
    v = rng.standard_normal((33, 33)) + 1j * rng.standard_normal((33, 33))
    P = [rng.standard_normal((33, 33)) for _ in range(4)]
    x = rng.standard_normal((M, M))
    n = 40
    idx = rng.integers(-3, 4, size=(n, 2))
    G = 8
    gext = rng.standard_normal((2 * G + 1, 2 * G + 1)) + 0j
    theta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    dk = 1j * rng.standard_normal(n)
    w1, w2 = np.sqrt(1.5), np.sqrt(33 / 8)
    return {
        "theta_hits R=200": ("theta_hits", (200, w1, w2, 1.0, 0.5, 1.0, 1.0, 1e-8)),
        "theta_hits R=500": ("theta_hits", (500, w1, w2, 1.0, 0.5, 1.0, 1.0, 1e-8)),
        "propagate 33x33": ("propagate", (u, v, *P)),
        "pow_scale 72x72 q=3": ("pow_scale", (x, 3, 1.0)),
        "jacobian n=40": ("jacobian", (idx, gext, G, theta, dk, 3.0)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels.numba_impl is None:
        print("numba unavailable; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"numba active by default: {_kernels.NUMBA_ENABLED}")
    print(f"{'kernel':24s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for label, (name, a) in cases(rng).items():
        f_np = getattr(_kernels.numpy_impl, name)
        f_nb = getattr(_kernels.numba_impl, name)
        r_np, r_nb = f_np(*a), f_nb(*a)
        for p, q in zip(np.atleast_1d(r_np) if not isinstance(r_np, tuple) else r_np,
                        np.atleast_1d(r_nb) if not isinstance(r_nb, tuple) else r_nb):
            assert np.allclose(p, q, rtol=1e-12, atol=1e-12), label
        number = 3 if "R=500" in label else 50
        t_np = min(timeit.repeat(lambda: f_np(*a), number=number, repeat=args.repeat)) / number
        t_nb = min(timeit.repeat(lambda: f_nb(*a), number=number, repeat=args.repeat)) / number
        print(f"{label:24s} {1e3 * t_np:12.4f} {1e3 * t_nb:12.4f} {t_np / t_nb:8.1f}")


if __name__ == "__main__":
    main()
