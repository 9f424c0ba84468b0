"""Compare the compiled and pure-Python difference-bound kernels.

    python3 benchmarks/bench_kernels.py [--sizes 4,8,16] [--reps 200]

Kernel timings use random consistent domains; the end-to-end rows build the
state class graph of each bundled fixture once per backend (the pure one is
forced with TTSVERIFY_PURE=1 in a subprocess).
"""
import argparse
import os
import random
import subprocess
import sys
import time

from ttsverify import _dbm_py, fixtures

try:
    from ttsverify import _dbm
except ImportError:
    _dbm = None


def random_domain(rng, n):
    """Closed domain for ``n - 1`` variables with box bounds."""
    los, his = [], []
    for _ in range(n - 1):
        lo = rng.randint(0, 5)
        los.append(_dbm_py.encode(-lo, False))
        his.append(_dbm_py.encode(lo + rng.randint(0, 5), False))
    return _dbm_py.canonical(_dbm_py.initial_domain(los, his), n)


def timeit(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def kernel_rows(sizes, reps, seed=1):
    rng = random.Random(seed)
    rows = []
    for n in sizes:
        dom = random_domain(rng, n)
        keep = list(range(2, n)) + [-1]
        los, his = [-1] * (n - 1), [_dbm_py.encode(3, False)] * (n - 1)
        cases = {
            "canonical": lambda m, d=dom, n=n: m.canonical(d, n),
            "fire_domain": lambda m, d=dom, n=n: m.fire_domain(d, n, 1, [2] if n > 2 else []),
            "successor": lambda m, d=dom, n=n, k=keep: m.successor(d, n, 1, k, los, his),
        }
        for name, fn in cases.items():
            py = timeit(lambda: fn(_dbm_py), reps)
            c = timeit(lambda: fn(_dbm), reps) if _dbm else None
            rows.append((name, n - 1, py, c))
    return rows


_E2E = (
    "import sys,time;from ttsverify import fixtures, dbm;from ttsverify.netfile import load_net;"
    "from ttsverify.scg import build_scg;n=load_net(fixtures.path(sys.argv[1]));t=time.perf_counter();"
    "g=build_scg(n);print(dbm.BACKEND,g.class_count,time.perf_counter()-t)"
)


def e2e_rows():
    rows = []
    for name in fixtures.names():
        out = {}
        for pure in ("", "1"):
            env = dict(os.environ, TTSVERIFY_PURE=pure)
            res = subprocess.run([sys.executable, "-c", _E2E, name], env=env, capture_output=True, text=True, check=True)
            backend, classes, secs = res.stdout.split()
            out[backend] = (int(classes), float(secs))
        rows.append((name, out))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="4,8,16,32")
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args(argv)
    sizes = [int(x) + 1 for x in args.sizes.split(",")]
    if _dbm is None:
        print("compiled extension not built; only the pure-Python kernel is timed")
    print(f"{'kernel':12} {'vars':>4} {'python us':>10} {'compiled us':>12} {'speedup':>8}")
    for name, k, py, c in kernel_rows(sizes, args.reps):
        cs = f"{c * 1e6:12.1f}" if c else f"{'-':>12}"
        sp = f"{py / c:7.1f}x" if c else f"{'-':>8}"
        print(f"{name:12} {k:4d} {py * 1e6:10.1f} {cs} {sp}")
    print()
    print(f"{'fixture':12} {'classes':>7} {'python s':>9} {'compiled s':>11}")
    for name, out in e2e_rows():
        py = out.get("python")
        c = out.get("compiled")
        print(f"{name:12} {py[0]:7d} {py[1]:9.4f} " + (f"{c[1]:11.4f}" if c else f"{'-':>11}"))


if __name__ == "__main__":
    main()
