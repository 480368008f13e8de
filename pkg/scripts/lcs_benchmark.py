"""Time the DP and bit-parallel LCS routes on random token sequences.

    python3 scripts/lcs_benchmark.py --pairs 200 --length 500 --alphabet 30
"""

from __future__ import annotations

import argparse
import random
import time

from mdqa.lcs import lcs_len_bitparallel, lcs_len_dp


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--length", type=int, nargs="+", default=[50, 200, 500, 1000])
    ap.add_argument("--alphabet", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    print(f"{'length':>7} {'dp s':>9} {'bit s':>9} {'speedup':>8}")
    for n in args.length:
        pairs = [
            ([rng.randrange(args.alphabet) for _ in range(n)], [rng.randrange(args.alphabet) for _ in range(n)])
            for _ in range(args.pairs)
        ]
        t0 = time.perf_counter()
        slow = [lcs_len_dp(a, b) for a, b in pairs]
        t_dp = time.perf_counter() - t0
        t0 = time.perf_counter()
        fast = [lcs_len_bitparallel(a, b) for a, b in pairs]
        t_bit = time.perf_counter() - t0
        if slow != fast:
            raise SystemExit(f"mismatch at length {n}")
        print(f"{n:>7} {t_dp:>9.3f} {t_bit:>9.3f} {t_dp / t_bit:>7.1f}x")


if __name__ == "__main__":
    main()
