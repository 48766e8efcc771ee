"""Polyforms as cell sets: normalisation, haloes, placements, enumeration, text I/O."""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

from . import lattice
from .errors import HoledInputError, ParseError, ResourceLimitError
from .lattice import Cell, GridKind, Transform

MAX_ENUMERATION_ORDER = 14


@dataclass(frozen=True)
class Shape:
    grid: GridKind
    cells: tuple[Cell, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(sorted(set(map(tuple, self.cells)))))

    def __len__(self) -> int:
        return len(self.cells)

    @classmethod
    def from_cells(cls, grid, cells: Iterable[Cell], name: str | None = None) -> Shape:
        """Validate and normalise a cell list."""
        grid = GridKind.parse(grid)
        cells = [(int(x), int(y)) for x, y in cells]
        if not cells:
            raise ValueError("a shape needs at least one cell")
        for p in cells:
            lattice.check_cell(grid, p)
        if not is_connected(grid, cells):
            raise ValueError("cells are not edge-connected")
        return cls(grid, normalize(grid, cells), name)

    @property
    def simply_connected(self) -> bool:
        return is_simply_connected(self.grid, self.cells)


@dataclass(frozen=True)
class Placement:
    grid: GridKind
    transform: Transform
    cells: frozenset[Cell]


def place(shape: Shape, t: Transform) -> Placement:
    lattice.check_transform(shape.grid, t)
    o = lattice.orientations(shape.grid)[t.orientation]
    cells = frozenset((q[0] + t.tx, q[1] + t.ty) for q in map(o, shape.cells))
    return Placement(shape.grid, t, cells)


def normalize(grid: GridKind, cells: Iterable[Cell]) -> tuple[Cell, ...]:
    """Translate so the least cell sits at the origin.

    Triangles can only move by multiples of 3, so the least black cell goes
    to (0, 0) (or the least grey cell to (1, 1) when there is no black one).
    """
    cells = sorted(set(cells))
    if grid is GridKind.IAMOND:
        black = [p for p in cells if p[0] % 3 == 0]
        if black:
            ox, oy = black[0]
        else:
            ox, oy = cells[0][0] - 1, cells[0][1] - 1
    else:
        ox, oy = cells[0]
    return tuple((x - ox, y - oy) for x, y in cells)


def halo(grid: GridKind, cells: Iterable[Cell]) -> frozenset[Cell]:
    """Cells outside ``cells`` that share an edge or vertex with one of them."""
    cells = set(cells)
    out = set()
    for p in cells:
        out.update(lattice.halo_neighbors(grid, p))
    return frozenset(out - cells)


def adjacent(p1: Placement, p2: Placement) -> bool:
    if p1.cells & p2.cells:
        return False
    return not p1.cells.isdisjoint(halo(p2.grid, p2.cells))


def is_connected(grid: GridKind, cells: Iterable[Cell]) -> bool:
    cells = set(cells)
    if not cells:
        return False
    start = next(iter(cells))
    seen = {start}
    todo = [start]
    while todo:
        p = todo.pop()
        for q in lattice.edge_neighbors(grid, p):
            if q in cells and q not in seen:
                seen.add(q)
                todo.append(q)
    return len(seen) == len(cells)


def enclosed_regions(grid: GridKind, filled: Iterable[Cell]) -> list[frozenset[Cell]]:
    """Empty regions that an edge-step flood fill from outside cannot reach.

    Every cell outside the tight bounding box is outside, so all empty cells in
    a margin around the box seed the fill.
    """
    filled = set(filled)
    if not filled:
        return []
    xs = [p[0] for p in filled]
    ys = [p[1] for p in filled]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    margin = 3 if grid is GridKind.IAMOND else 1

    def inside_box(p):
        return x0 <= p[0] <= x1 and y0 <= p[1] <= y1

    def in_frame(p):
        return x0 - margin <= p[0] <= x1 + margin and y0 - margin <= p[1] <= y1 + margin

    empty_inside = {(x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)
                    if (x, y) not in filled and lattice.is_valid_cell(grid, (x, y))}
    if not empty_inside:
        return []
    outside = set()
    todo = deque()
    for p in empty_inside:
        for q in lattice.edge_neighbors(grid, p):
            if not inside_box(q) and in_frame(q):
                outside.add(p)
                todo.append(p)
                break
    while todo:
        p = todo.popleft()
        for q in lattice.edge_neighbors(grid, p):
            if q in empty_inside and q not in outside:
                outside.add(q)
                todo.append(q)
    trapped = empty_inside - outside
    regions = []
    while trapped:
        seed = min(trapped)
        comp = {seed}
        todo = deque([seed])
        while todo:
            p = todo.popleft()
            for q in lattice.edge_neighbors(grid, p):
                if q in trapped and q not in comp:
                    comp.add(q)
                    todo.append(q)
        trapped -= comp
        regions.append(frozenset(comp))
    return regions


def is_simply_connected(grid: GridKind, cells: Iterable[Cell]) -> bool:
    return not enclosed_regions(grid, cells)


def pair_encloses_hole(p1: Placement, p2: Placement) -> bool:
    if not adjacent(p1, p2):
        raise ValueError("placements are not adjacent")
    return bool(enclosed_regions(p1.grid, p1.cells | p2.cells))


def oriented_images(grid: GridKind, cells: Iterable[Cell]) -> list[tuple[Cell, ...]]:
    """Normalised image of ``cells`` under each orientation, in index order."""
    cells = list(cells)
    return [normalize(grid, map(o, cells)) for o in lattice.orientations(grid)]


def canonical_cells(grid: GridKind, cells: Iterable[Cell]) -> tuple[Cell, ...]:
    return min(oriented_images(grid, cells))


def canonical_form(shape: Shape) -> Shape:
    return Shape(shape.grid, canonical_cells(shape.grid, shape.cells), shape.name)


@lru_cache(maxsize=None)
def _free_forms(grid: GridKind, n: int) -> tuple[tuple[Cell, ...], ...]:
    if n == 1:
        return ((((0, 0),)),)
    found = set()
    for cells in _free_forms(grid, n - 1):
        occupied = set(cells)
        fresh = set()
        for p in cells:
            fresh.update(lattice.edge_neighbors(grid, p))
        for q in fresh - occupied:
            found.add(canonical_cells(grid, cells + (q,)))
    return tuple(sorted(found))


def enumerate_free(grid, n: int, exclude_holed: bool = False,
                   limit: int = MAX_ENUMERATION_ORDER) -> list[Shape]:
    """Every free n-cell polyform once, as canonical forms in sorted order.

    Grows the (n-1)-forms by one edge-adjacent cell and dedups by canonical
    form; every polyform has a cell whose removal keeps it connected.
    """
    grid = GridKind.parse(grid)
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > limit:
        raise ResourceLimitError(f"order {n} exceeds enumeration limit {limit}")
    shapes = []
    for i, cells in enumerate(_free_forms(grid, n)):
        if exclude_holed and not is_simply_connected(grid, cells):
            continue
        shapes.append(Shape(grid, cells, f"{grid.value}{n}-{i}"))
    return shapes


_TOKEN = re.compile(r"^(-?\d+),(-?\d+)$")


def parse_shape(line: str, grid) -> Shape:
    """Parse ``[id:] x,y x,y ...``."""
    grid = GridKind.parse(grid)
    name = None
    text = line.strip()
    if ":" in text:
        name, text = (part.strip() for part in text.split(":", 1))
    tokens = text.split()
    if not tokens:
        raise ParseError("empty shape", line=line)
    cells = []
    for tok in tokens:
        m = _TOKEN.match(tok)
        if not m:
            raise ParseError(f"malformed coordinate {tok!r}", token=tok)
        p = (int(m.group(1)), int(m.group(2)))
        if not lattice.is_valid_cell(grid, p):
            raise ParseError(f"{tok!r} is not a valid {grid.value} cell", token=tok)
        cells.append(p)
    if not is_connected(grid, cells):
        component = _component(grid, set(cells), cells[0])
        bad = next(p for p in cells if p not in component)
        raise ParseError(f"cells are disconnected at {bad[0]},{bad[1]}", token=f"{bad[0]},{bad[1]}")
    return Shape(grid, normalize(grid, cells), name)


def _component(grid, cells, start):
    seen = {start}
    todo = [start]
    while todo:
        p = todo.pop()
        for q in lattice.edge_neighbors(grid, p):
            if q in cells and q not in seen:
                seen.add(q)
                todo.append(q)
    return seen


def serialize_shape(shape: Shape) -> str:
    body = " ".join(f"{x},{y}" for x, y in shape.cells)
    return f"{shape.name}: {body}" if shape.name else body


def read_shapes(lines: Iterable[str], grid) -> Iterator[Shape | ParseError]:
    """Shapes from a text stream; bad lines yield their ParseError instead."""
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            yield parse_shape(line, grid)
        except ParseError as exc:
            exc.line = lineno
            yield exc


# Boundary words.  Square: E, N, W, S.  Hex: digit d steps along a hexagon
# edge at 30 + 60d degrees.  Iamond: digit d steps along a triangle edge at
# 60d degrees.  Steps act on the corner keys of lattice.vertex_keys.
_SQUARE_STEPS = {"E": (2, 0), "N": (0, 2), "W": (-2, 0), "S": (0, -2)}
_HEX_STEPS = {str(d): s for d, s in enumerate(((1, 1), (-1, 2), (-2, 1), (-1, -1), (1, -2), (2, -1)))}
_IAMOND_STEPS = {str(d): s for d, s in enumerate(((3, 0), (0, 3), (-3, 3), (-3, 0), (0, -3), (3, -3)))}
_WORD_START = {GridKind.SQUARE: (1, 1), GridKind.HEX: (1, 1), GridKind.IAMOND: (2, 2)}


def parse_boundary_word(word: str, grid) -> Shape:
    """Cells enclosed by a closed, simple boundary walk."""
    grid = GridKind.parse(grid)
    steps = {GridKind.SQUARE: _SQUARE_STEPS, GridKind.HEX: _HEX_STEPS,
             GridKind.IAMOND: _IAMOND_STEPS}[grid]
    word = word.strip().upper()
    if not word:
        raise ParseError("empty boundary word")
    v = _WORD_START[grid]
    path = [v]
    for i, ch in enumerate(word):
        if ch not in steps:
            raise ParseError(f"unknown direction {ch!r} at position {i}", token=ch)
        if grid is GridKind.HEX and (v[0] % 3 == 1) != (int(ch) % 2 == 0):
            raise ParseError(f"step {ch!r} at position {i} leaves the hexagon edges", token=ch)
        v = (v[0] + steps[ch][0], v[1] + steps[ch][1])
        path.append(v)
    if path[-1] != path[0]:
        raise ParseError("boundary word does not close")
    if len(set(path[:-1])) != len(path) - 1:
        raise ParseError("boundary word crosses itself")
    polygon = [lattice.vertex_to_cartesian(grid, p) for p in path[:-1]]
    scale = {GridKind.SQUARE: 2, GridKind.HEX: 3, GridKind.IAMOND: 1}[grid]
    xs = [p[0] for p in path]
    ys = [p[1] for p in path]
    lo_x, hi_x = min(xs) // scale - 3, max(xs) // scale + 3
    lo_y, hi_y = min(ys) // scale - 3, max(ys) // scale + 3
    cells = [(x, y) for x in range(lo_x, hi_x + 1) for y in range(lo_y, hi_y + 1)
             if lattice.is_valid_cell(grid, (x, y))
             and _point_in_polygon(lattice.to_cartesian(grid, (x, y)), polygon)]
    if not cells:
        raise ParseError("boundary word encloses no cells")
    return Shape(grid, normalize(grid, cells))


def _point_in_polygon(pt, polygon) -> bool:
    x, y = pt
    inside = False
    n = len(polygon)
    for i in range(n):
        (xa, ya), (xb, yb) = polygon[i], polygon[(i + 1) % n]
        if (ya > y) != (yb > y):
            xc = xa + (y - ya) * (xb - xa) / (yb - ya)
            if xc > x:
                inside = not inside
    return inside


def polygon_area(polygon) -> float:
    return 0.5 * abs(sum(a[0] * b[1] - b[0] * a[1]
                         for a, b in zip(polygon, polygon[1:] + polygon[:1])))


def require_simply_connected(shape: Shape) -> None:
    if not shape.simply_connected:
        raise HoledInputError(f"shape {shape.name or shape.cells} has a hole")

