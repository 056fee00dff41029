"""Time the numba and numpy backends of the two float kernels.

    python benchmarks/bench_kernels.py [--steps N] [--replicas R] [--repeat K]

The numba column is skipped when numba is not installed.  First calls are
excluded (that is where numba compiles).
"""

import argparse
import time

import numpy as np

from pwlsds import kernels
from pwlsds._accel import HAVE_NUMBA
from pwlsds.constructions import ifs_cantor, prop42
from pwlsds.measures import ETA
from pwlsds.sds import sample_choices


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--replicas", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    cases = []

    sys_ = prop42()
    table = kernels.pack_maps(sys_.maps)
    choices = np.stack([sample_choices(rng, sys_.probs, args.steps) for _ in range(args.replicas)])
    x0 = rng.random(args.replicas)
    cases.append(("float_orbits prop42", lambda b: kernels.float_orbits(table, choices, x0, b)))

    cantor = ifs_cantor()
    ctable = kernels.pack_maps(cantor.maps)
    cdf = kernels.pack_cdf(ETA.float_cdf())
    ch = sample_choices(rng, cantor.probs, args.steps)
    states = kernels.float_orbits(ctable, ch[None, :], np.array([0.0]), "numpy")[0][:-1]
    cases.append(("derivative_ratios eta", lambda b: kernels.derivative_ratios(ctable, cdf, states, ch, 12, b)))

    print(f"steps={args.steps} replicas={args.replicas} best of {args.repeat}")
    print(f"{'kernel':<24}" + "".join(f"{b:>12}" for b in backends) + ("   speedup" if HAVE_NUMBA else ""))
    for name, fn in cases:
        t = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
        if HAVE_NUMBA:
            a, b = fn("numpy"), fn("numba")
            assert np.allclose(a, b, equal_nan=True), name
        row = f"{name:<24}" + "".join(f"{t[b]:>11.4f}s" for b in backends)
        if HAVE_NUMBA:
            row += f"   {t['numpy'] / t['numba']:>6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
