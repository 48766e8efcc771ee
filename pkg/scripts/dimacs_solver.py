#!/usr/bin/env python3
"""Stand-alone DIMACS solver speaking SAT-competition output.

Handy as an external solver for ``--solver "cmd:python3 scripts/dimacs_solver.py {path}"``
when no native binary is installed.  Backed by one of python-sat's solvers.

    python3 scripts/dimacs_solver.py formula.cnf [--name minisat22]
"""
import argparse
import sys

from pysat.formula import CNF
from pysat.solvers import Solver


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("path")
    ap.add_argument("--name", default="minisat22", help="python-sat solver name")
    args = ap.parse_args()
    cnf = CNF(from_file=args.path)
    with Solver(name=args.name, bootstrap_with=cnf.clauses) as s:
        if not s.solve():
            print("s UNSATISFIABLE")
            return 20
        model = s.get_model() or []
    known = {abs(v) for v in model}
    model += [-v for v in range(1, cnf.nv + 1) if v not in known]
    print("s SATISFIABLE")
    for i in range(0, len(model), 10):
        print("v " + " ".join(map(str, model[i:i + 10])))
    print("v 0")
    return 10


if __name__ == "__main__":
    sys.exit(main())
