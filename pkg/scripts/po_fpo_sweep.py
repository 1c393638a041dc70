"""Compare enumeration PO verdicts with LP fPO verdicts on random bipartite graphs.

    python3 scripts/po_fpo_sweep.py --graphs 1000 --seed 1
"""
from __future__ import annotations

import argparse
import random
import time

from maxpareto.matching import BipartiteInstance, enumerate_matchings, find_dominating_matching, fpo_verdicts


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--max-side", type=int, default=6)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    t0 = time.perf_counter()
    total = mismatches = 0
    for _ in range(args.graphs):
        n1, n2 = rng.randint(2, args.max_side), rng.randint(2, args.max_side)
        d = rng.choice((0.5, 1.0))
        g = BipartiteInstance(n1, n2, tuple((i, j, rng.randint(0, 9)) for i in range(n1) for j in range(n2) if rng.random() < d))
        ms = list(enumerate_matchings(g))
        for m, fpo in zip(ms, fpo_verdicts(g, ms)):
            total += 1
            mismatches += (find_dominating_matching(g, m) is None) != fpo
    print(f"{args.graphs} graphs, {total} matchings, {mismatches} PO/fPO disagreements, {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
