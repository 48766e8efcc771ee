"""Run the published-table sweeps and print histograms next to the expected rows.

    python scripts/reproduce_tables.py              # every desk-scale sweep
    python scripts/reproduce_tables.py omino 8 3    # one sweep
"""
import argparse
import time
from collections import Counter
from dataclasses import dataclass, field

from heesch.engine import EngineOptions, Status, heesch_numbers
from heesch.lattice import GridKind
from heesch.polyform import enumerate_free


@dataclass
class Sweep:
    grid: str
    order: int
    cutoff: int
    h_c: dict = field(default_factory=dict)
    h_h: dict = field(default_factory=dict)


KNOWN = [
    Sweep("omino", 7, 2, {0: 1, 1: 2}, {1: 3}),
    Sweep("omino", 8, 3, {0: 6, 1: 14}, {1: 19, 2: 1}),
    Sweep("omino", 9, 3, {0: 75, 1: 122, 2: 1}, {0: 36, 1: 157, 2: 5}),
    Sweep("hex", 6, 3, {1: 3, 2: 1}, {1: 3, 2: 1}),
    Sweep("hex", 7, 4, {0: 5, 1: 25, 2: 6, 3: 1}, {0: 4, 1: 19, 2: 12, 3: 2}),
    Sweep("iamond", 7, 2, {1: 1}, {1: 1}),
    Sweep("iamond", 8, 2, {}, {}),
    Sweep("iamond", 9, 2, {0: 11, 1: 9}, {0: 7, 1: 13}),
    Sweep("iamond", 10, 5, {0: 44, 1: 55, 2: 3, 3: 1}, {0: 33, 1: 59, 2: 10, 4: 1}),
]


def run(sweep: Sweep, options: EngineOptions) -> bool:
    start = time.perf_counter()
    shapes = enumerate_free(GridKind(sweep.grid), sweep.order, exclude_holed=True)
    results = [heesch_numbers(s, sweep.cutoff, options=options) for s in shapes]
    finite = [r for r in results if r.status is Status.FINITE]
    h_c, h_h = Counter(r.h_c for r in finite), Counter(r.h_h for r in finite)
    ok = (dict(h_c), dict(h_h)) == (sweep.h_c, sweep.h_h)
    print(f"{sweep.grid:>6} n={sweep.order:<2} cutoff={sweep.cutoff}  shapes={len(shapes):<5} "
          f"finite={len(finite):<4} {time.perf_counter() - start:7.1f}s  {'match' if ok else 'MISMATCH'}")
    print(f"        H_c {dict(sorted(h_c.items()))}  expected {sweep.h_c}")
    print(f"        H_h {dict(sorted(h_h.items()))}  expected {sweep.h_h}")
    return ok


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("grid", nargs="?", choices=[g.value for g in GridKind])
    ap.add_argument("order", nargs="?", type=int)
    ap.add_argument("cutoff", nargs="?", type=int)
    ap.add_argument("--solver", default="auto")
    ap.add_argument("--no-periodic", action="store_true", help="decide tilers by SAT alone")
    args = ap.parse_args()
    options = EngineOptions(solver=args.solver, periodic=not args.no_periodic)
    todo = KNOWN
    if args.grid:
        todo = [s for s in KNOWN if (s.grid, s.order) == (args.grid, args.order)] or \
               [Sweep(args.grid, args.order, args.cutoff or 3)]
        if args.cutoff:
            todo = [Sweep(s.grid, s.order, args.cutoff, s.h_c, s.h_h) for s in todo]
    return 0 if all([run(s, options) for s in todo]) else 1


if __name__ == "__main__":
    raise SystemExit(main())
