"""Compare the compiled and numpy pursuit/LIF backends.

    python3 benchmarks/bench_backends.py [--repeat 3]

Prints wall-clock seconds per backend and checks both produce the same codes.
"""
import argparse
import time

import numpy as np

from spiketrum import _backend
from spiketrum.codec import Pursuit
from spiketrum.kernels import build_bank

CASES = [(0.4, 1500), (1.5, 1000), (4.7, 2000)]


def best_of(fn, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_pursuit(x, bank, n, backend):
    p = Pursuit(x, bank, backend=backend)
    p.run(n)
    return p


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    bank = build_bank()
    bank.gram()
    rng = np.random.default_rng(0)
    backends = _backend.available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'case':<22}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for dur, lam in CASES:
        x = rng.standard_normal(int(dur * bank.sample_rate))
        n = int(np.floor(lam * dur + 0.5))
        times, results = [], []
        for b in backends:
            t, p = best_of(lambda: run_pursuit(x, bank, n, b), args.repeat)
            times.append(t)
            results.append(p)
        if len(results) == 2:
            assert results[0].m == results[1].m and results[0].tau == results[1].tau
            assert np.allclose(results[0].s, results[1].s, rtol=0, atol=1e-9)
        speed = f"{times[-1] / times[0]:>9.1f}x" if len(times) == 2 else ""
        print(f"{f'pursuit {dur}s N={n}':<22}" + "".join(f"{t:>12.3f}" for t in times) + speed)
    drive = rng.standard_normal((2000, 100)).cumsum(axis=0) * 0.05
    times = []
    rasters = []
    for b in backends:
        t, r = best_of(lambda: _backend.get(b).lif_run(drive, 1.0, np.exp(-1 / 20)), args.repeat)
        times.append(t)
        rasters.append(r)
    if len(rasters) == 2:
        assert np.array_equal(rasters[0], rasters[1])
    speed = f"{times[-1] / times[0]:>9.1f}x" if len(times) == 2 else ""
    print(f"{'lif 2000x100':<22}" + "".join(f"{t:>12.4f}" for t in times) + speed)


if __name__ == "__main__":
    main()
