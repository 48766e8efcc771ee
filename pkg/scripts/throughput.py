"""Time heesch_numbers on a random sample of simply connected n-ominoes.

    python scripts/throughput.py --order 10 --sample 100 --cutoff 3 --seed 11
"""
import argparse
import random
import statistics
import time
from collections import Counter

from heesch.engine import EngineOptions, heesch_numbers
from heesch.lattice import GridKind
from heesch.polyform import enumerate_free


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--grid", default="omino", choices=[g.value for g in GridKind])
    ap.add_argument("--order", type=int, default=10)
    ap.add_argument("--sample", type=int, default=100)
    ap.add_argument("--cutoff", type=int, default=3)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--solver", default="auto")
    args = ap.parse_args()

    shapes = enumerate_free(GridKind(args.grid), args.order, exclude_holed=True)
    sample = random.Random(args.seed).sample(shapes, min(args.sample, len(shapes)))
    times, statuses = [], Counter()
    for s in sample:
        t = time.perf_counter()
        statuses[heesch_numbers(s, args.cutoff, options=EngineOptions(solver=args.solver)).status.value] += 1
        times.append(time.perf_counter() - t)
    print(f"{len(sample)} of {len(shapes)} shapes, cutoff {args.cutoff}: mean {statistics.mean(times):.3f}s, "
          f"median {statistics.median(times):.3f}s, max {max(times):.2f}s")
    print(dict(statuses))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
