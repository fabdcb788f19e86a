"""Compare the compiled matching kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each workload runs on both modules, the outputs are compared, and the best
of N wall-clock times is printed.
"""

import argparse
import time
from fractions import Fraction

from metlogic import amenability as am
from metlogic import groups
from metlogic.groups import BallSpec
from metlogic.kernels import _pykernels as py

try:
    from metlogic.kernels import _ckernels as cy
except ImportError:
    cy = None


def all_4x4(mod):
    out = 0
    for code in range(1 << 16):
        rows = [(code >> (4 * i)) & 0xF for i in range(4)]
        out += mod.hk_matching(rows, 4)[0] + mod.max_deficiency(rows, 4)[0]
    return out


def free_group_scan(mod):
    f = groups.enumerate_ball({"family": "free", "rank": 2}, 2)
    rows = am._rows_by_g(f, f.parse_list("a,A,b,B"), f.elements, BallSpec(Fraction(1, 2), True))
    return mod.scan_certificates(rows, 1, 1 << f.order, 9, 10, 10)


def deficiency_20(mod):
    # a sparse 20 x 20 instance: each left vertex sees itself and its successor
    rows = [(1 << i) | (1 << ((i + 1) % 20)) for i in range(20)]
    rows[0] = 0
    return mod.max_deficiency(rows, 20)


WORKLOADS = {
    "hk + deficiency, all 65536 4+4 graphs": all_4x4,
    "exhaustive scan, free(2) radius 2": free_group_scan,
    "deficiency sweep, 20 left vertices": deficiency_20,
}


def best_of(fn, mod, repeat):
    times, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(mod)
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if cy is None:
        print("compiled kernels not built; only the fallback is timed")
    print(f"{'workload':42} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, fn in WORKLOADS.items():
        tp, rp = best_of(fn, py, max(1, args.repeat // 3 or 1))
        if cy is None:
            print(f"{name:42} {tp:10.3f} {'-':>10} {'-':>8}")
            continue
        tc, rc = best_of(fn, cy, args.repeat)
        if rp != rc:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:42} {tp:10.3f} {tc:10.4f} {tp / tc:7.0f}x")


if __name__ == "__main__":
    main()
