"""End-to-end acceptance runs: full sweeps checked against the published tables.

Each test prints one PASS/FAIL line, also gathered in the terminal summary.
Sweeps are cached per (grid, order, cutoff) so the cross-cutting checks reuse
them.  The whole module takes tens of minutes; skip it with ``-m "not slow"``.
"""
import random
import sys
import time
from collections import Counter
from pathlib import Path

import pytest

from heesch.cnf import CnfFormula, SolveSession, evaluate, export_dimacs, pysat_available, solve
from heesch.encoder import HOLE_FREE, HOLES_ALLOWED, build_formula, corona_transforms
from heesch.engine import EngineOptions, Status, compute_h_c, compute_h_h, heesch_numbers, validate_witness
from heesch.lattice import GridKind
from heesch.polyform import enumerate_free

from conftest import ACCEPTANCE_LINES
from oracles import brute_force_sat, corona_exists, random_formula

pytestmark = pytest.mark.slow
SQ, HEX, TRI = GridKind.SQUARE, GridKind.HEX, GridKind.IAMOND
SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"
_SWEEPS: dict = {}


def sweep(grid, n, cutoff):
    """(results, seconds) for every simply connected n-cell shape at ``cutoff``."""
    key = (grid, n, cutoff)
    if key not in _SWEEPS:
        start = time.perf_counter()
        results = [heesch_numbers(s, cutoff) for s in enumerate_free(grid, n, exclude_holed=True)]
        _SWEEPS[key] = (results, time.perf_counter() - start)
    return _SWEEPS[key]


def tallies(results):
    finite = [r for r in results if r.status is Status.FINITE]
    return len(finite), dict(Counter(r.h_c for r in finite)), dict(Counter(r.h_h for r in finite))


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _table_check(number, grid, n, cutoff, count, h_c, h_h, limit, shapes=None):
    results, seconds = sweep(grid, n, cutoff)
    got = tallies(results)
    ok = (shapes is None or len(results) == shapes) and got == (count, h_c, h_h) and seconds <= limit
    report(number, ok, f"{grid.value} n={n} cutoff={cutoff}: {len(results)} shapes, {got[0]} finite, "
                       f"H_c {got[1]}, H_h {got[2]}, {seconds:.1f}s (limit {limit:.0f}s)")


def test_criterion_01_heptominoes():
    _table_check(1, SQ, 7, 2, 3, {0: 1, 1: 2}, {1: 3}, 60, shapes=107)


def test_criterion_02_octominoes():
    _table_check(2, SQ, 8, 3, 20, {0: 6, 1: 14}, {1: 19, 2: 1}, 300)


def test_criterion_03_enneominoes():
    _table_check(3, SQ, 9, 3, 198, {0: 75, 1: 122, 2: 1}, {0: 36, 1: 157, 2: 5}, 3600)


def test_criterion_04_hexahexes():
    _table_check(4, HEX, 6, 3, 4, {1: 3, 2: 1}, {1: 3, 2: 1}, 60)


def test_criterion_05_heptahexes():
    _table_check(5, HEX, 7, 4, 37, {0: 5, 1: 25, 2: 6, 3: 1}, {0: 4, 1: 19, 2: 12, 3: 2}, 900)


IAMOND_ROWS = [(7, 2, 1, {1: 1}, {1: 1}), (8, 2, 0, {}, {}),
               (9, 2, 20, {0: 11, 1: 9}, {0: 7, 1: 13}),
               (10, 5, 103, {0: 44, 1: 55, 2: 3, 3: 1}, {0: 33, 1: 59, 2: 10, 4: 1})]


def test_criterion_06_polyiamonds():
    total, ok, parts = 0.0, True, []
    for n, cutoff, count, h_c, h_h in IAMOND_ROWS:
        results, seconds = sweep(TRI, n, cutoff)
        got = tallies(results)
        total += seconds
        ok &= got == (count, h_c, h_h)
        parts.append(f"n={n}: {got[0]} finite H_c {got[1]} H_h {got[2]}")
    ok &= total <= 1800
    report(6, ok, "; ".join(parts) + f"; {total:.1f}s total (limit 1800s)")


SWEEPS_1_TO_6 = [(SQ, 7, 2), (SQ, 8, 3), (SQ, 9, 3), (HEX, 6, 3), (HEX, 7, 4)] + \
                [(TRI, n, cutoff) for n, cutoff, *_ in IAMOND_ROWS]


def test_criterion_07_relation():
    finite = [r for key in SWEEPS_1_TO_6 for r in sweep(*key)[0] if r.status is Status.FINITE]
    bad = [r for r in finite if r.h_h - r.h_c not in (0, 1)]
    report(7, not bad, f"{len(finite)} finite results, {len(bad)} with h_h - h_c outside {{0, 1}}")


def test_criterion_08_witnesses():
    results, _ = sweep(SQ, 9, 3)
    checked = failed = 0
    for r in results:
        for key, mode in (("hc", HOLE_FREE), ("hh", HOLES_ALLOWED)):
            w = r.witnesses[key]
            checked += 1
            problems = validate_witness(r.shape, w, mode)
            if r.status is Status.FINITE:
                problems += [] if w.depth == (r.h_c if key == "hc" else r.h_h) else ["depth mismatch"]
            failed += bool(problems)
    report(8, failed == 0, f"9-omino run: {checked} witnesses checked, {failed} rejected")


def test_criterion_09_small_oracle():
    # the SAT route only: no periodic shortcut
    opts = EngineOptions(periodic=False)
    shapes = [s for g in GridKind for n in range(1, 5) for s in enumerate_free(g, n, exclude_holed=True)]
    disagree = 0
    for s in shapes:
        levels = [corona_transforms(s, 1).transforms(k) for k in range(2)]
        for mode, measure in ((HOLES_ALLOWED, compute_h_h), (HOLE_FREE, compute_h_c)):
            engine_says = measure(s, 1, options=opts).status is Status.CUTOFF_REACHED
            formula_says = solve(build_formula(s, 1, mode)[0]).sat
            raw = corona_exists(s, levels, mode.holes_allowed)
            strict = corona_exists(s, levels, mode.holes_allowed, strict=True)
            disagree += (formula_says != raw) + (engine_says != strict)
    report(9, disagree == 0, f"{len(shapes)} shapes x 2 modes, {disagree} disagreements")


def test_criterion_10_solver():
    rng = random.Random(10)
    total = mismatches = 0
    for _ in range(10_000):
        num_vars = rng.randint(1, 16)
        clauses = random_formula(rng, num_vars)
        r = solve(CnfFormula(num_vars, clauses), "builtin")
        expect = brute_force_sat(num_vars, clauses)
        total += 1
        if r.sat != expect or (r.sat and not evaluate(clauses, r.model)):
            mismatches += 1
    detail = f"{total} random formulas (V <= 16), {mismatches} disagreements with brute force"
    ok = mismatches == 0
    if pysat_available():
        template = f"cmd:{sys.executable} {SCRIPTS / 'dimacs_solver.py'} {{path}}"
        rejected = 0
        formulas = [CnfFormula(v, random_formula(rng, v)) for v in rng.choices(range(4, 40), k=40)]
        shape = enumerate_free(SQ, 7, exclude_holed=True)[0]
        formulas.append(build_formula(shape, 1, HOLE_FREE)[0])
        for f in formulas:
            r = SolveSession(f, template).solve()
            if r.sat != solve(f, "builtin").sat or (r.sat and not evaluate(f.clauses, r.model)):
                rejected += 1
        assert export_dimacs(formulas[-1]).startswith("p cnf ")
        ok &= rejected == 0
        detail += f"; external DIMACS round-trip on {len(formulas)} formulas, {rejected} bad models"
    else:
        detail += "; no external solver configured (python-sat missing), round-trip skipped"
    report(10, ok, detail)


def test_criterion_11_throughput():
    shapes = enumerate_free(SQ, 10, exclude_holed=True)
    sample = random.Random(11).sample(shapes, 100)
    start = time.perf_counter()
    statuses = Counter(heesch_numbers(s, 3).status.value for s in sample)
    mean = (time.perf_counter() - start) / len(sample)
    report(11, mean <= 2.0, f"100 random 10-ominoes at cutoff 3: {mean:.3f}s per shape, {dict(statuses)}")
