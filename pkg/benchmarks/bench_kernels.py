"""Compiled vs numpy kernel timings.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on both backends with identical inputs; outputs are
checked for equality before timings are reported.
"""
import argparse
import time

import numpy as np

from qlmdyn import kernels


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _same(a, b):
    if isinstance(a, tuple):
        # move lists: same set of (src, dst, ...) tuples, order is free
        rows_a = sorted(zip(*[np.asarray(x).tolist() for x in a]))
        rows_b = sorted(zip(*[np.asarray(x).tolist() for x in b]))
        return rows_a == rows_b
    return np.array_equal(np.asarray(a), np.asarray(b)) or np.allclose(a, b, atol=1e-12)


def cases():
    rng = np.random.default_rng(0)
    phases = rng.uniform(-np.pi, np.pi, (400, 800))
    deltas = rng.uniform(-20, 20, 400 * 800)
    yield "enumerate_sector(N=20)", lambda m: m.enumerate_sector(20)
    codes16 = kernels.get_backend("numpy").enumerate_sector(16)
    yield "hopping_moves(N=16)", lambda m: m.hopping_moves(codes16, 16)
    yield "string_moves(N=16)", lambda m: m.string_moves(codes16, 16)
    yield "wrap_angles(320k)", lambda m: m.wrap_angles(deltas)
    yield "plaquette_sums(400x800)", lambda m: m.plaquette_sums(phases)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'kernel':28s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases():
        times, outs = [], []
        for b in backends:
            t, out = _time(lambda: fn(kernels.get_backend(b)), args.repeat)
            times.append(t)
            outs.append(out)
        if len(outs) > 1 and not _same(outs[0], outs[1]):
            raise SystemExit(f"{name}: backends disagree")
        line = f"{name:28s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) > 1:
            line += f"{times[1] / times[0]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
