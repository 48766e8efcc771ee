"""Heesch-number driver: solve F_n for growing n, block holes, validate witnesses."""
from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import lattice
from .cnf import Budget, SolveSession, SolveStatus
from .encoder import (HOLE_FREE, HOLES_ALLOWED, CoronaTransformSets, EncodeMode, VarMap,
                      Witness, build_formula, corona_transforms, decode_model)
from .errors import IntegrityError, InvalidCellError, TransformRangeError
from .lattice import IDENTITY, Cell, GridKind
from .periodic import corona_witness, periodic_tilings
from .polyform import Placement, Shape, enclosed_regions, halo, place, require_simply_connected

log = logging.getLogger(__name__)

DEFAULT_CUTOFF = 6


class Status(str, enum.Enum):
    FINITE = "FINITE"
    CUTOFF_REACHED = "CUTOFF_REACHED"
    BUDGET_EXCEEDED = "BUDGET_EXCEEDED"
    REJECTED_HOLED_INPUT = "REJECTED_HOLED_INPUT"


@dataclass(frozen=True)
class HoleReport:
    """An empty region enclosed by a packing.

    ``bounding`` indexes the placements owning a cell that shares an edge with
    the hole; ``touching`` those sharing at least a vertex.
    """

    cells: frozenset[Cell]
    bounding: frozenset[int]
    touching: frozenset[int]


def _paint(placements, grid) -> dict[Cell, int]:
    owner: dict[Cell, int] = {}
    for i, pl in enumerate(placements):
        for p in pl.cells:
            if p in owner:
                raise IntegrityError(f"placements {owner[p]} and {i} overlap at {p}")
            owner[p] = i
    return owner


def find_holes(placements: list[Placement], grid: GridKind) -> list[HoleReport]:
    """Flood-fill the painted packing from outside; report unreachable empty regions."""
    grid = GridKind.parse(grid)
    owner = _paint(placements, grid)
    reports = []
    for region in enclosed_regions(grid, owner):
        edge = {owner[q] for p in region for q in lattice.edge_neighbors(grid, p) if q in owner}
        touch = {owner[q] for p in region for q in lattice.halo_neighbors(grid, p) if q in owner}
        reports.append(HoleReport(region, frozenset(edge), frozenset(touch)))
    return reports


def validate_witness(shape: Shape, witness: Witness, mode: EncodeMode = HOLES_ALLOWED) -> list[str]:
    """Check a corona structure directly against the geometric definitions.

    Returns human-readable violations; an empty list means the witness is sound.
    """
    grid = shape.grid
    problems: list[str] = []
    levels = witness.levels
    if not levels or list(levels[0]) != [IDENTITY]:
        problems.append("level 0 must be exactly the identity placement")
        return problems
    placed: list[list[Placement]] = []
    for k, lev in enumerate(levels):
        row = []
        for t in lev:
            try:
                row.append(place(shape, t))
            except (InvalidCellError, TransformRangeError) as exc:
                problems.append(f"level {k}: invalid transform {tuple(t)}: {exc}")
        placed.append(row)
    if problems:
        return problems
    flat = [(k, pl) for k, row in enumerate(placed) for pl in row]
    seen_cells: dict[frozenset, int] = {}
    for k, pl in flat:
        if pl.cells in seen_cells:
            problems.append(f"level {k}: duplicate placement {tuple(pl.transform)}")
        seen_cells[pl.cells] = k
    owner: dict[Cell, int] = {}
    for k, pl in flat:
        for p in pl.cells:
            if p in owner:
                problems.append(f"overlap at cell {p}")
            else:
                owner[p] = k
    if problems:
        return problems
    for k in range(1, len(placed)):
        for pl in placed[k]:
            touched = {owner[q] for q in halo(grid, pl.cells) if q in owner}
            if k - 1 not in touched:
                problems.append(f"level {k}: {tuple(pl.transform)} does not touch level {k - 1}")
            low = sorted(m for m in touched if m <= k - 2)
            if low:
                problems.append(f"level {k}: {tuple(pl.transform)} touches level {low[0]}")
    union: set[Cell] = set()
    for k in range(len(placed)):
        if k >= 1:
            nxt = union | {p for pl in placed[k] for p in pl.cells}
            missing = halo(grid, union) - nxt
            if missing:
                problems.append(f"level {k}: {len(missing)} halo cells of the {k - 1}-corona patch"
                                f" uncovered, e.g. {min(missing)}")
            union = nxt
        else:
            union = set(placed[0][0].cells)
        last = k == len(placed) - 1
        if (not last or not mode.holes_allowed) and enclosed_regions(grid, union):
            problems.append(f"levels 0..{k} enclose a hole")
    return problems


@dataclass
class EngineOptions:
    solver: str = "auto"
    overlap: str = "sequential"
    prune: bool = True
    probe_cutoff: bool = False    # try hole-free F_cutoff before climbing from n = 1
    periodic: bool = True         # before that, cut a validated witness from a periodic tiling


@dataclass
class SolveStats:
    solve_calls: int = 0
    formulas: int = 0
    blocked_holes: int = 0
    interior_pockets: int = 0
    tilings: int = 0              # cutoff witnesses taken from periodic tilings
    seconds: float = 0.0

    def merge(self, other: SolveStats) -> None:
        self.solve_calls += other.solve_calls
        self.formulas += other.formulas
        self.blocked_holes += other.blocked_holes
        self.interior_pockets += other.interior_pockets
        self.tilings += other.tilings
        self.seconds += other.seconds


@dataclass
class MeasureResult:
    """One Heesch measure; ``value`` is None unless it was pinned down."""

    value: int | None
    lower_bound: int
    status: Status
    witness: Witness | None
    stats: SolveStats = field(default_factory=SolveStats)


@dataclass
class HeeschResult:
    shape: Shape
    h_c: int | None
    h_h: int | None
    status: Status
    h_c_lower: int = 0
    h_h_lower: int = 0
    witnesses: dict[str, Witness] = field(default_factory=dict)
    stats: SolveStats = field(default_factory=SolveStats)

    def __post_init__(self):
        if self.h_c is not None and self.h_h is not None and self.h_h - self.h_c not in (0, 1):
            raise IntegrityError(f"H_c={self.h_c} and H_h={self.h_h} violate H_c <= H_h <= H_c + 1")


class _Deadline:
    def __init__(self, budget: Budget | None):
        self.budget = budget or Budget()
        self.end = None if self.budget.seconds is None else time.monotonic() + self.budget.seconds

    def per_call(self) -> Budget:
        if self.end is None:
            return Budget(self.budget.conflicts, None)
        return Budget(self.budget.conflicts, max(0.0, self.end - time.monotonic()))


class _BudgetExceeded(Exception):
    pass


class _Search:
    """Per-shape state: cached transform sets and the corona existence test."""

    def __init__(self, shape: Shape, options: EngineOptions, budget: Budget | None):
        require_simply_connected(shape)
        self.shape = shape
        self.options = options
        self.deadline = _Deadline(budget)
        self.stats = SolveStats()
        self._sets: CoronaTransformSets | None = None
        self._known: dict[tuple[int, bool], Witness | None] = {}

    def sets(self, n: int) -> CoronaTransformSets:
        if self._sets is None or len(self._sets.levels) < n + 1:
            self._sets = corona_transforms(self.shape, n, prune=self.options.prune)
        s = self._sets
        return CoronaTransformSets(s.shape, s.levels[:n + 1], s.parents[:n + 1])

    def corona(self, n: int, mode: EncodeMode) -> Witness | None:
        """A validated n-corona witness in ``mode``, or None if none exists."""
        if n == 0:
            return Witness(self.shape, [[IDENTITY]])
        key = (n, mode.holes_allowed)
        if key not in self._known:
            self._known[key] = self._solve(n, mode)
        return self._known[key]

    def tiling_corona(self, n: int) -> Witness | None:
        """A hole-free n-corona read off a small periodic tiling, once validated."""
        for tiling in periodic_tilings(self.shape, solver=self.options.solver):
            witness = corona_witness(tiling, n)
            if witness is not None and not validate_witness(self.shape, witness, HOLE_FREE):
                self.stats.tilings += 1
                self._known[(n, True)] = self._known[(n, False)] = witness
                return witness
            break
        return None

    def _solve(self, n: int, mode: EncodeMode) -> Witness | None:
        formula, vm = build_formula(self.shape, n, mode, overlap=self.options.overlap,
                                    prune=self.options.prune, sets=self.sets(n))
        session = SolveSession(formula, self.options.solver)
        self.stats.formulas += 1
        while True:
            self.stats.solve_calls += 1
            result = session.solve(self.deadline.per_call())
            if result.status is SolveStatus.BUDGET_EXCEEDED:
                raise _BudgetExceeded
            if result.status is SolveStatus.UNSAT:
                return None
            witness = decode_model(result.model, vm)
            clause = self._blocking_clause(witness, vm, mode)
            if clause is None:
                return witness
            session.add_clause(clause)

    def _blocking_clause(self, witness: Witness, vm: VarMap, mode: EncodeMode):
        """A no-good for the first defect found, or None if the packing is acceptable.

        Defects are an enclosed region in an interior patch (levels 0..k, k < n)
        or, in hole-free mode, in the whole packing.  The clause says: not all of
        the copies walling in the region, unless some copy fills part of it.
        """
        grid = self.shape.grid
        placed = witness.placements()
        n = len(placed) - 1
        flat = [(k, pl) for k, row in enumerate(placed) for pl in row]
        tops = range(n + 1) if not mode.holes_allowed else range(n)
        for top in tops:
            prefix = [pl for k, pl in flat if k <= top]
            owners = [(k, pl) for k, pl in flat if k <= top]
            holes = find_holes(prefix, grid)
            if not holes:
                continue
            hole = holes[0]
            if top < n:
                self.stats.interior_pockets += 1
                log.warning("interior pocket in levels 0..%d of %s", top, self.shape.cells)
            else:
                self.stats.blocked_holes += 1
            walls = [-vm.shape_var(owners[i][0], owners[i][1].transform) for i in sorted(hole.bounding)]
            fillers = vm.coverers(sorted(hole.cells))
            if top < n:
                fillers = fillers[_levels_of(vm, fillers) <= top]
            return walls + fillers.tolist()
        return None

    def measure(self, mode: EncodeMode, cutoff: int) -> MeasureResult:
        """Largest n <= cutoff with an n-corona in ``mode`` (CUTOFF_REACHED at cutoff)."""
        best = 0
        witness = self.corona(0, mode)
        try:
            if self.options.periodic and self.tiling_corona(cutoff) is not None:
                return MeasureResult(None, cutoff, Status.CUTOFF_REACHED,
                                     self.corona(cutoff, mode), self.stats)
            if self.options.probe_cutoff and cutoff > 1:
                top = self.corona(cutoff, mode)
                if top is not None:
                    return MeasureResult(None, cutoff, Status.CUTOFF_REACHED, top, self.stats)
            for n in range(1, cutoff + 1):
                w = self.corona(n, mode)
                if w is None:
                    return MeasureResult(n - 1, n - 1, Status.FINITE, witness, self.stats)
                best, witness = n, w
            return MeasureResult(None, cutoff, Status.CUTOFF_REACHED, witness, self.stats)
        except _BudgetExceeded:
            return MeasureResult(None, best, Status.BUDGET_EXCEEDED, witness, self.stats)


def _levels_of(vm: VarMap, shape_vars: np.ndarray) -> np.ndarray:
    base = np.asarray(vm.level_base)
    return np.searchsorted(base, shape_vars, side="right") - 1


def compute_h_h(shape: Shape, cutoff: int = DEFAULT_CUTOFF, budget: Budget | None = None,
                options: EngineOptions | None = None) -> MeasureResult:
    """Heesch number with holes allowed in the outermost corona."""
    return _Search(shape, options or EngineOptions(), budget).measure(HOLES_ALLOWED, cutoff)


def compute_h_c(shape: Shape, cutoff: int = DEFAULT_CUTOFF, budget: Budget | None = None,
                options: EngineOptions | None = None) -> MeasureResult:
    """Heesch number with every corona, the outermost included, hole-free."""
    return _Search(shape, options or EngineOptions(), budget).measure(HOLE_FREE, cutoff)


def heesch_numbers(shape: Shape, cutoff: int = DEFAULT_CUTOFF, budget: Budget | None = None,
                   options: EngineOptions | None = None) -> HeeschResult:
    """Both measures from one pass over n.

    Levels 0..n-1 of an n-corona with holes form a hole-free (n-1)-corona,
    so H_h is H_c or H_c + 1.  Each n is first tried with holes allowed: if
    that fails both measures stop at n-1, and the hole-free formula, which
    only adds clauses, is never solved.  Otherwise the hole-free formula
    decides whether H_c stops at n-1 (and then H_h = n) or both go on.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    started = time.perf_counter()
    search = _Search(shape, options or EngineOptions(), budget)
    hc_w = hh_w = search.corona(0, HOLE_FREE)
    c = h = 0
    try:
        if search.options.periodic and search.tiling_corona(cutoff) is not None:
            w = search.corona(cutoff, HOLE_FREE)
            return _finish(search, started, None, None, Status.CUTOFF_REACHED, cutoff, cutoff, w, w)
        if search.options.probe_cutoff and cutoff > 1:
            w = search.corona(cutoff, HOLE_FREE)
            if w is not None:
                return _finish(search, started, None, None, Status.CUTOFF_REACHED, cutoff, cutoff, w, w)
        for n in range(1, cutoff + 1):
            holed = search.corona(n, HOLES_ALLOWED)
            if holed is None:
                return _finish(search, started, c, c, Status.FINITE, c, c, hc_w, hh_w)
            h, hh_w = n, holed
            solid = search.corona(n, HOLE_FREE)
            if solid is None:
                return _finish(search, started, c, n, Status.FINITE, c, n, hc_w, hh_w)
            c, hc_w, hh_w = n, solid, solid
    except _BudgetExceeded:
        return _finish(search, started, None, None, Status.BUDGET_EXCEEDED, c, h, hc_w, hh_w)
    return _finish(search, started, None, None, Status.CUTOFF_REACHED, cutoff, cutoff, hc_w, hh_w)


def _finish(search, started, h_c, h_h, status, c_low, h_low, hc_w, hh_w) -> HeeschResult:
    search.stats.seconds = time.perf_counter() - started
    return HeeschResult(search.shape, h_c, h_h, status, c_low, h_low,
                        {"hc": hc_w, "hh": hh_w}, search.stats)


__all__ = [
    "Status", "HoleReport", "Witness", "HeeschResult", "MeasureResult", "EngineOptions",
    "SolveStats", "find_holes", "validate_witness", "compute_h_h", "compute_h_c",
    "heesch_numbers", "DEFAULT_CUTOFF",
]
