"""Time the numba kernels against their numpy counterparts.

    python benchmarks/bench_kernels.py [--sizes 64x128 128x256 256x512] [--repeat 5]

Each kernel is warmed up once (JIT compilation is excluded) and the best of
``--repeat`` runs is reported.
"""

import argparse
import timeit

import numpy as np

from annulus_dirichlet import kernels
from annulus_dirichlet._accel import HAVE_NUMBA


def field(nr, nt, seed=0):
    rng = np.random.default_rng(seed)
    t = np.exp(np.linspace(0, np.log(2.125), nr))[:, None]
    tau = 2 * np.pi * np.arange(nt)[None, :] / nt
    w = (1 + 0.05 * rng.normal(size=(nr, nt))) * t * np.exp(2j * tau)
    w[0] /= np.abs(w[0])
    w[-1] *= 2.125 / np.abs(w[-1])
    return w


def cases(w):
    ax, at = 0.5, 2.0
    rng = np.random.default_rng(1)
    ys = rng.uniform(1.2, 1.9, 12) * np.exp(1j * rng.uniform(0, 2 * np.pi, 12))
    return {
        "edge_energy": lambda impl: impl(w, ax, at),
        "edge_gradient": lambda impl: impl(w, ax, at),
        "sor_sweeps x10": lambda impl: impl(w.copy(), ax, at, 1.5, 1.0, 2.125, 10),
        "preimage_count x12": lambda impl: impl(w, ys, 1e-12),
    }


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", nargs="+", default=["64x128", "128x256", "256x512"])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':<20} {'grid':>9} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for size in args.sizes:
        nr, nt = (int(v) for v in size.split("x"))
        w = field(nr, nt)
        for name, call in cases(w).items():
            base = name.split()[0]
            np_impl = getattr(kernels, base + "_np")
            nb_impl = getattr(kernels, base + "_nb")
            call(nb_impl)  # compile
            t_np = best(lambda: call(np_impl), args.repeat)
            t_nb = best(lambda: call(nb_impl), args.repeat)
            print(f"{name:<20} {size:>9} {1e3 * t_np:>10.3f} {1e3 * t_nb:>10.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
