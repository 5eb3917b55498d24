"""Time the residual/Jacobian kernels and a full implicit step per backend.

Run ``python3 benchmarks/bench_kernels.py [--sizes 300 600 1200]``.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from dhspec.evolve import _kernels_py, schemes
from dhspec.evolve.grid import make_grid, pushforward_perturb
from dhspec.evolve.simulate import mode_potential


def kernel_calls(kmod, n):
    grid = make_grid(1.5, n)
    v = pushforward_perturb(mode_potential(1, 0, 1.5), 0.05, 1.5, grid).values
    R = np.empty(n)
    ab3, ab5 = np.empty((3, n)), np.empty((5, n))
    x, cv, h = grid.x, grid.cv, grid.h
    return {
        "upwind (pme m=2)": lambda: kmod.assemble_upwind(v, v, x, cv, h, 1e-3, 2.0, 1e-12, R, ab3),
        "potential (thin film)": lambda: kmod.assemble_potential(v, v, x, cv, h, 1e-3, 0.0, 1.5, 1.0, 0.0,
                                                                 False, False, True, R, ab5),
    }


def best_of(fn, repeat=5):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[300, 600, 1200])
    args = ap.parse_args()
    compiled = schemes._load_compiled()
    backends = {"python": _kernels_py}
    if compiled is not None:
        backends["compiled"] = compiled
    else:
        print("compiled kernels not built; timing the numpy fallback only")
    print(f"{'kernel':24s} {'n':>6s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup")
    for n in args.sizes:
        rows = {name: {} for name in kernel_calls(_kernels_py, n)}
        for b, kmod in backends.items():
            for name, fn in kernel_calls(kmod, n).items():
                rows[name][b] = best_of(fn)
        for name, t in rows.items():
            sp = f"{t['python'] / t['compiled']:8.1f}x" if "compiled" in t else ""
            print(f"{name:24s} {n:6d} " + " ".join(f"{t[b] * 1e6:10.1f}us" for b in backends) + f"  {sp}")
    # end-to-end: one thin-film step (Newton + banded solves)
    grid = make_grid(1.5, 600)
    state = pushforward_perturb(mode_potential(1, 0, 1.5), 0.05, 1.5, grid)
    for b in backends:
        schemes.set_backend(b)
        t = best_of(lambda: schemes.step_fourth(state, 1e-3, 1.5), repeat=3)
        print(f"step_fourth m=3/2 n=600 [{b}]: {t * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
