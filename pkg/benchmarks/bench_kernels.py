"""Numba vs numpy timings for the hot kernels.

Each case runs once per backend to warm up (numba compiles or loads its
cache), then reports the best of ``--repeat`` runs and the largest absolute
difference between the two backends' results.

    python3 benchmarks/bench_kernels.py --repeat 3
"""

import argparse
import time

import numpy as np

from hausdorff_lab import _backend, kernels, mellin, presets, samples, spectral
from hausdorff_lab import hausdorff as H
from hausdorff_lab import numgrid as ng


def _cases(nodes):
    cesaro = presets.build_preset("cesaro1d")
    gauss2 = presets.build_preset("example2-gauss")
    spec1 = ng.GridSpec((ng.log_axis(-20.0, 20.0, nodes),))
    side = max(8, int(np.sqrt(nodes)))
    spec2 = ng.GridSpec((ng.log_axis(-6.0, 6.0, side),) * 2)
    f1 = samples.gauss_y(spec1, 0.0, 2.0)
    f2 = samples.gauss_y(spec2, 0.0, 1.5)
    rng = np.random.default_rng(0)
    big = rng.normal(size=1 << 20) + 1j * rng.normal(size=1 << 20)
    s = np.linspace(-4.0, 4.0, 257)
    return [
        (f"apply cesaro1d, {nodes} nodes", lambda: H.apply(cesaro, f1).values),
        (f"apply example2-gauss, {side}x{side}", lambda: H.apply(gauss2, f2).values),
        ("assemble cesaro1d periodic, 256", lambda: spectral.discretize(cesaro, spectral.riesz_grid(256), boundary="periodic").entries),
        ("symbol cesaro1d, 257 points", lambda: mellin.symbol(cesaro, s).values),
        ("pairwise sum, 2^20 complex", lambda: np.atleast_1d(kernels.pairwise_sum(big))),
    ]


def _best(fn, repeat):
    out = fn()
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--nodes", type=int, default=512, help="1-D grid size for the apply case")
    args = ap.parse_args(argv)
    if not _backend.HAVE_NUMBA:
        print("numba is not installed: only the numpy backend can run")
    names = ("numba", "numpy") if _backend.HAVE_NUMBA else ("numpy",)
    print(f"{'case':40s} " + " ".join(f"{n + ' (s)':>12s}" for n in names) + f" {'speedup':>8s} {'max diff':>10s}")
    for label, fn in _cases(args.nodes):
        times, outs = [], []
        for name in names:
            prev = _backend.use_backend(name)
            try:
                t, out = _best(fn, args.repeat)
            finally:
                _backend.use_backend(prev)
            times.append(t)
            outs.append(out)
        speed = times[-1] / times[0] if len(times) == 2 else 1.0
        diff = float(np.max(np.abs(outs[0] - outs[-1])))
        print(f"{label:40s} " + " ".join(f"{t:12.4f}" for t in times) + f" {speed:8.1f} {diff:10.1e}")


if __name__ == "__main__":
    main()
