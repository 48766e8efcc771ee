"""Corona witnesses cut from small periodic tilings.

A shape that tiles the plane surrounds itself to every depth, yet the corona
formula at a large cutoff is the most expensive instance the engine meets.
Most tilers admit a tiling whose period lattice holds only a few copies, which
is an exact cover of a small torus and a tiny SAT instance.  Levels are then
read off that tiling by adjacency distance from one tile.  Callers must still
validate the result; nothing here is trusted on its own.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import lattice
from .cnf import Budget, CnfFormula, SolveSession
from .encoder import Witness, shape_geometry
from .errors import InvalidCellError, TransformRangeError
from .lattice import GridKind, Transform
from .polyform import Shape, halo, place

# copies per period tried, in order; isohedral tilings need a divisor of the
# point group's order
COPY_COUNTS = {GridKind.SQUARE: (1, 2, 4), GridKind.HEX: (1, 2, 3, 4, 6),
               GridKind.IAMOND: (1, 2, 3, 4, 6)}
# a torus is abandoned, not refuted, once its solve spends this many conflicts
TORUS_CONFLICTS = 500


@dataclass(frozen=True)
class PeriodicTiling:
    """``tiles`` shifted by every i*u + j*v cover the plane exactly once."""

    shape: Shape
    u: tuple[int, int]
    v: tuple[int, int]
    tiles: tuple[Transform, ...]


def _egcd(x: int, y: int) -> tuple[int, int, int]:
    """(g, s, t) with g = s*x + t*y = gcd(x, y) >= 0."""
    s0, t0, s1, t1 = 1, 0, 0, 1
    while y:
        q, r = divmod(x, y)
        x, y = y, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return (x, s0, t0) if x >= 0 else (-x, -s0, -t0)


def hermite_form(p: tuple[int, int], q: tuple[int, int]) -> tuple[int, int, int]:
    """(a, b, c) such that (a, 0), (b, c) span the same lattice as p, q."""
    det = abs(p[0] * q[1] - p[1] * q[0])
    if det == 0:
        raise ValueError("basis vectors are parallel")
    c, s, t = _egcd(p[1], q[1])
    a = det // c
    return a, (s * p[0] + t * q[0]) % a, c


def period_lattices(count: int, grid: GridKind | None = None) -> Iterator[tuple[int, int, int]]:
    """Hermite normal forms (a, b, c) of index-``count`` sublattices: basis (a, 0), (b, c).

    Given a grid, only one lattice per orbit of its point group is produced;
    lattices in one orbit admit the same tilings up to a rigid motion.
    """
    mats = [o.matrix for o in lattice.orientations(grid)] if grid is not None else []
    for a in range(1, count + 1):
        if count % a:
            continue
        for b in range(a):
            c = count // a
            form = (a, b, c)
            if any(hermite_form(_mul(m, (a, 0)), _mul(m, (b, c))) < form for m in mats):
                continue
            yield form


def _mul(m, p):
    return (m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1])


def _step(grid: GridKind) -> int:
    # iamond translations move by whole triangles pairs: multiples of 3
    return 3 if grid is GridKind.IAMOND else 1


def _torus_cells(grid: GridKind, pts: np.ndarray, a: int, b: int, c: int) -> np.ndarray:
    """Index of each point's class modulo the lattice (a, 0), (b, c) of translations."""
    if grid is GridKind.IAMOND:
        colour = pts[..., 0] % 3           # 0 for up triangles, 1 for down
        q = (pts - colour[..., None]) // 3
    else:
        colour = 0
        q = pts
    j = q[..., 1] // c
    y = q[..., 1] - j * c
    x = (q[..., 0] - j * b) % a
    width = 2 if grid is GridKind.IAMOND else 1
    return (y * a + x) * width + colour


def _exactly_one_per_cell(var: np.ndarray, cell: np.ndarray, first_aux: int) -> tuple[list, int]:
    """Clauses saying each cell has exactly one of its coverers; also the aux count."""
    order = np.lexsort((var, cell))
    x, g = var[order], cell[order]
    start = np.r_[True, g[1:] != g[:-1]]
    end = np.r_[g[1:] != g[:-1], True]
    aux = np.zeros(len(x), np.int64)
    aux[~end] = first_aux + np.arange(int((~end).sum()))
    cuts = np.flatnonzero(start)
    xs = x.tolist()
    clauses = [xs[s:e] for s, e in zip(cuts.tolist(), np.r_[cuts[1:], len(x)].tolist())]
    prev = np.r_[0, aux[:-1]][~start]
    mid = ~end & ~start
    clauses += zip((-x[~end]).tolist(), aux[~end].tolist())
    clauses += zip((-prev[mid[~start]]).tolist(), aux[~start][mid[~start]].tolist())
    clauses += zip((-prev).tolist(), (-x[~start]).tolist())
    return clauses, int((~end).sum())


def _torus_tiling(shape: Shape, a: int, b: int, c: int, solver: str,
                  conflicts: int | None = TORUS_CONFLICTS) -> PeriodicTiling | None:
    grid = shape.grid
    geo = shape_geometry(shape)
    step = _step(grid)
    uv = np.stack(np.meshgrid(np.arange(a), np.arange(c), indexing="ij"), -1).reshape(-1, 2) * step
    rows, owners = [], []
    for i, img in enumerate(geo.images):
        idx = _torus_cells(grid, uv[:, None, :] + img[None, :, :], a, b, c)
        idx.sort(axis=1)
        ok = (np.diff(idx, axis=1) != 0).all(axis=1)
        rows.append(idx[ok])
        owners.extend((int(geo.orients[i]), int(t[0]), int(t[1])) for t in uv[ok])
    if not owners:
        return None
    cells = np.concatenate(rows)
    width = 2 if grid is GridKind.IAMOND else 1
    if len(np.unique(cells)) < a * c * width:
        return None
    var = np.repeat(np.arange(1, len(owners) + 1), cells.shape[1])
    clauses, num_aux = _exactly_one_per_cell(var, cells.ravel(), len(owners) + 1)
    session = SolveSession(CnfFormula(len(owners) + num_aux, clauses), solver)
    result = session.solve(Budget(conflicts=conflicts))
    if not result.sat:
        return None
    chosen = [Transform(*owners[v - 1]) for v in range(1, len(owners) + 1) if result.model[v - 1] > 0]
    return PeriodicTiling(shape, (a * step, 0), (b * step, c * step), tuple(chosen))


def periodic_tilings(shape: Shape, copies: tuple[int, ...] | None = None, solver: str = "auto",
                     conflicts: int | None = TORUS_CONFLICTS) -> Iterator[PeriodicTiling]:
    """Tilings with a period holding m copies, for each m in ``copies`` in turn.

    Tori whose solve runs out of ``conflicts`` are skipped, so an empty
    result does not prove the shape is a non-tiler.
    """
    grid = shape.grid
    width = 2 if grid is GridKind.IAMOND else 1
    for m in copies or COPY_COUNTS[grid]:
        if (m * len(shape)) % width:
            continue
        for a, b, c in period_lattices(m * len(shape) // width, grid):
            t = _torus_tiling(shape, a, b, c, solver, conflicts)
            if t is not None:
                yield t


def _lattice_coords(delta: np.ndarray, tiling: PeriodicTiling) -> np.ndarray:
    """Rows (i, j) with delta = i*u + j*v, for the deltas that are lattice vectors."""
    (a, _), (b, c) = tiling.u, tiling.v
    j, ry = np.divmod(delta[:, 1], c)
    i, rx = np.divmod(delta[:, 0] - j * b, a)
    keep = (ry == 0) & (rx == 0)
    return np.stack([i[keep], j[keep]], -1)


def _neighbour_table(tiling: PeriodicTiling) -> list[list[tuple[int, int, int]]]:
    """For tile k at the origin: every (tile, i, j) whose shifted copy touches it."""
    grid = tiling.shape.grid
    placed = [place(tiling.shape, t) for t in tiling.tiles]
    cells = [np.array(sorted(p.cells), dtype=np.int64) for p in placed]
    halos = [np.array(sorted(halo(grid, p.cells)), dtype=np.int64) for p in placed]
    table = []
    for k in range(len(placed)):
        out = set()
        for m in range(len(placed)):
            delta = (halos[k][:, None, :] - cells[m][None, :, :]).reshape(-1, 2)
            out.update((m, int(i), int(j)) for i, j in _lattice_coords(delta, tiling))
        table.append(sorted(out))
    return table


def corona_witness(tiling: PeriodicTiling, depth: int) -> Witness | None:
    """Levels 0..depth by adjacency distance from the first tile, moved onto the identity.

    None when some level is empty or a transform leaves the packable range.
    """
    grid = tiling.shape.grid
    table = _neighbour_table(tiling)
    level = {(0, 0, 0): 0}
    queue = deque([(0, 0, 0)])
    while queue:
        node = queue.popleft()
        if level[node] == depth:
            continue
        k, i, j = node
        for m, di, dj in table[k]:
            nxt = (m, i + di, j + dj)
            if nxt not in level:
                level[nxt] = level[node] + 1
                queue.append(nxt)
    levels: list[list[Transform]] = [[] for _ in range(depth + 1)]
    try:
        back = lattice.inverse(grid, tiling.tiles[0])
        for (k, i, j), d in level.items():
            t = tiling.tiles[k]
            shifted = Transform(t.orientation, t.tx + i * tiling.u[0] + j * tiling.v[0],
                                t.ty + i * tiling.u[1] + j * tiling.v[1])
            levels[d].append(lattice.compose(grid, back, shifted))
    except (TransformRangeError, InvalidCellError):
        return None
    if any(not lev for lev in levels):
        return None
    return Witness(tiling.shape, [sorted(lev) for lev in levels])
