"""Corona transform sets and the Boolean formula F_n.

Transforms are handled as packed 32-bit keys in numpy arrays (see
:meth:`heesch.lattice.Transform.pack`); a placement is never materialised as
a cell set during construction.  All relative geometry between two copies of a
shape is precomputed once per shape in :class:`ShapeGeometry`.

Variable layout of a formula: shape variables level by level (level 0 is
variable 1), then cell variables, then any auxiliary variables introduced by
the sequential at-most-one overlap encoding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import lattice
from .cnf import CnfFormula
from .errors import TransformRangeError
from .lattice import Cell, GridKind, Transform
from .polyform import Shape, halo, normalize

_T_BIAS = -lattice.TRANSLATION_MIN
# 2D integer offsets are folded into one int64 for set operations
_OFF = 1 << 20
_SPAN = 1 << 21


def _fold(xy: np.ndarray) -> np.ndarray:
    return (xy[..., 0] + _OFF) * _SPAN + (xy[..., 1] + _OFF)


def _unfold(keys: np.ndarray) -> np.ndarray:
    return np.stack([keys // _SPAN - _OFF, keys % _SPAN - _OFF], axis=-1)


def pack_keys(orient: np.ndarray, txy: np.ndarray) -> np.ndarray:
    lo, hi = lattice.TRANSLATION_MIN, lattice.TRANSLATION_MAX
    if txy.size and (txy.min() < lo or txy.max() > hi):
        raise TransformRangeError("corona translation outside the packable [-128, 127] range")
    return (orient.astype(np.int64) << 16) | ((txy[:, 0] + _T_BIAS) << 8) | (txy[:, 1] + _T_BIAS)


def unpack_keys(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keys = np.asarray(keys, dtype=np.int64)
    txy = np.stack([((keys >> 8) & 0xFF) - _T_BIAS, (keys & 0xFF) - _T_BIAS], axis=-1)
    return keys >> 16, txy


def _euler(grid: GridKind, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Corner keys, edge keys and Euler characteristic of a closed cell union."""
    verts = set()
    edges = set()
    for p in map(tuple, cells.tolist()):
        vk = lattice.vertex_keys(grid, p)
        verts.update(vk)
        for a, b in zip(vk, vk[1:] + vk[:1]):
            edges.add((a[0] + b[0], a[1] + b[1]))
    chi = len(verts) - len(edges) + len(cells)
    return (np.array(sorted(verts), dtype=np.int64).reshape(-1, 2),
            np.array(sorted(edges), dtype=np.int64).reshape(-1, 2), chi)


def _offset_counts(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Folded differences a_i - b_j with their multiplicities."""
    diff = _fold(a[:, None, :] - b[None, :, :]).ravel()
    return np.unique(diff, return_counts=True)


def _lookup_counts(keys, counts, query) -> np.ndarray:
    pos = np.searchsorted(keys, query)
    pos = np.minimum(pos, len(keys) - 1)
    hit = keys[pos] == query
    return np.where(hit, counts[pos], 0)


class ShapeGeometry:
    """Relative placement geometry of one shape, shared by every formula.

    ``orients`` lists one orientation per distinct image (the least index),
    so distinct transform keys always mean distinct placed cell sets.
    ``adj[a][b]`` holds the translations d for which copy (b, t + d) is
    adjacent to copy (a, t); ``over[a][b]`` those for which they overlap;
    ``hole_adj[a][b]`` the adjacent ones whose union encloses a hole.
    Indices a, b are positions in ``orients``.
    """

    def __init__(self, shape: Shape):
        self.shape = shape
        self.grid = grid = shape.grid
        ors = lattice.orientations(grid)
        seen = {}
        for o in ors:
            img = normalize(grid, map(o, shape.cells))
            seen.setdefault(img, o.index)
        self.orients = np.array(sorted(seen.values()), dtype=np.int64)
        self.position = {int(o): i for i, o in enumerate(self.orients)}
        self.images = [np.array([ors[o](p) for p in shape.cells], dtype=np.int64)
                       for o in self.orients]
        self.halos = [np.array(sorted(halo(grid, map(tuple, img.tolist()))), dtype=np.int64)
                      for img in self.images]
        step = 3 if grid is GridKind.IAMOND else 1
        scale = {GridKind.SQUARE: 2, GridKind.HEX: 3, GridKind.IAMOND: 1}[grid]
        topo = [_euler(grid, img) for img in self.images]
        k = len(self.orients)
        self.adj = [[None] * k for _ in range(k)]
        self.over = [[None] * k for _ in range(k)]
        self.hole_adj = [[None] * k for _ in range(k)]
        for a in range(k):
            for b in range(k):
                ov = np.unique(_fold(self.images[a][:, None, :] - self.images[b][None, :, :]).ravel())
                ad = np.unique(_fold(self.halos[a][:, None, :] - self.images[b][None, :, :]).ravel())
                ad = np.setdiff1d(ad, ov, assume_unique=True)
                ov_xy, ad_xy = _unfold(ov), _unfold(ad)
                if step == 3:
                    ov_xy = ov_xy[(ov_xy % 3 == 0).all(axis=1)]
                    ad_xy = ad_xy[(ad_xy % 3 == 0).all(axis=1)]
                self.over[a][b] = ov_xy
                self.adj[a][b] = ad_xy
                # holes enclosed by the pair = 1 - chi(A) - chi(B) + (shared corners - shared edges)
                vk, vc = _offset_counts(topo[a][0], topo[b][0])
                ek, ec = _offset_counts(topo[a][1], topo[b][1])
                sv = _lookup_counts(vk, vc, _fold(scale * ad_xy))
                se = _lookup_counts(ek, ec, _fold(2 * scale * ad_xy))
                holes = 1 - topo[a][2] - topo[b][2] + sv - se
                self.hole_adj[a][b] = ad_xy[holes > 0]

    def cells_of(self, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(row index, cell xy) pairs covering every placement in ``keys``."""
        return self._expand(keys, self.images)

    def halo_of(self, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self._expand(keys, self.halos)

    def _expand(self, keys, per_orient):
        orient, txy = unpack_keys(keys)
        rows, cells = [], []
        for i, o in enumerate(self.orients):
            sel = np.nonzero(orient == o)[0]
            if not len(sel):
                continue
            pts = per_orient[i]
            rows.append(np.repeat(sel, len(pts)))
            cells.append((txy[sel][:, None, :] + pts[None, :, :]).reshape(-1, 2))
        if not rows:
            return np.zeros(0, np.int64), np.zeros((0, 2), np.int64)
        return np.concatenate(rows), np.concatenate(cells)

    def neighbours(self, keys: np.ndarray, table) -> tuple[np.ndarray, np.ndarray]:
        """(row index, neighbour key) pairs using offset table ``table``."""
        orient, txy = unpack_keys(keys)
        rows, out = [], []
        for a, oa in enumerate(self.orients):
            sel = np.nonzero(orient == oa)[0]
            if not len(sel):
                continue
            for b, ob in enumerate(self.orients):
                d = table[a][b]
                if not len(d):
                    continue
                t = (txy[sel][:, None, :] + d[None, :, :]).reshape(-1, 2)
                rows.append(np.repeat(sel, len(d)))
                out.append(pack_keys(np.full(len(t), ob), t))
        if not rows:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        return np.concatenate(rows), np.concatenate(out)


@lru_cache(maxsize=64)
def shape_geometry(shape: Shape) -> ShapeGeometry:
    return ShapeGeometry(shape)


IDENTITY_KEY = Transform(0, 0, 0).pack()


@dataclass
class CoronaTransformSets:
    """Candidate transforms per corona level, as sorted packed keys.

    ``parents[k]`` is a pair (child row, parent row) listing, for every
    transform at level k, each level k-1 transform adjacent to it.
    """

    shape: Shape
    levels: list[np.ndarray]
    parents: list[tuple[np.ndarray, np.ndarray]] = field(repr=False)

    def transforms(self, k: int) -> list[Transform]:
        return [Transform.unpack(int(x)) for x in self.levels[k]]

    def __len__(self) -> int:
        return len(self.levels)


def _members(sorted_keys: np.ndarray, query: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mask of ``query`` entries present in ``sorted_keys`` and their positions."""
    if not len(sorted_keys):
        return np.zeros(len(query), bool), np.zeros(len(query), np.int64)
    pos = np.searchsorted(sorted_keys, query)
    pos = np.minimum(pos, len(sorted_keys) - 1)
    return sorted_keys[pos] == query, pos


def _avoids(geo: ShapeGeometry, keys: np.ndarray, region: np.ndarray) -> np.ndarray:
    """Mask of transform keys whose placed cells miss every cell of ``region``."""
    orient, txy = unpack_keys(keys)
    ok = np.ones(len(keys), bool)
    for i, o in enumerate(geo.orients):
        sel = np.nonzero(orient == o)[0]
        if len(sel):
            bad = np.unique(_fold(region[:, None, :] - geo.images[i][None, :, :]).ravel())
            ok[sel] = ~_members(bad, _fold(txy[sel]))[0]
    return ok


def corona_transforms(shape: Shape, n: int, prune: bool = False) -> CoronaTransformSets:
    """Levels T_0..T_n: the identity, then everything adjacent to the level below.

    With ``prune`` set, a level-k transform (k >= 2) is dropped when it meets
    the shape grown by k-1 halo rings.  Levels up to j always cover that
    j-ring region, so such a copy would overlap a level below k or touch one
    below k-1; the formula forces it false anyway.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    geo = shape_geometry(shape)
    levels = [np.array([IDENTITY_KEY], dtype=np.int64)]
    parents = [(np.zeros(0, np.int64), np.zeros(0, np.int64))]
    region = set(shape.cells)
    for k in range(1, n + 1):
        prow, child = geo.neighbours(levels[-1], geo.adj)
        keys = np.unique(child)
        if prune and k >= 2:
            region |= halo(shape.grid, region)
            keys = keys[_avoids(geo, keys, np.array(sorted(region), dtype=np.int64))]
        hit, pos = _members(keys, child)
        levels.append(keys)
        parents.append((pos[hit], prow[hit]))
    return CoronaTransformSets(shape, levels, parents)


@dataclass(frozen=True)
class EncodeMode:
    holes_allowed: bool = True


HOLES_ALLOWED = EncodeMode(True)
HOLE_FREE = EncodeMode(False)


@dataclass
class VarMap:
    """Bijections between formula variables and shape/cell symbols."""

    sets: CoronaTransformSets
    level_base: list[int]
    cells: np.ndarray            # sorted folded cell keys
    cell_base: int
    aux_range: tuple[int, int]   # [first, last] auxiliary ids; empty if first > last
    cover_ptr: np.ndarray = field(repr=False, default=None)
    cover_vars: np.ndarray = field(repr=False, default=None)

    @property
    def num_shape_vars(self) -> int:
        return self.cell_base - 1

    @property
    def num_cell_vars(self) -> int:
        return len(self.cells)

    def shape_var(self, k: int, t: Transform | int) -> int | None:
        key = t if isinstance(t, (int, np.integer)) else t.pack()
        lev = self.sets.levels[k]
        i = int(np.searchsorted(lev, key))
        if i < len(lev) and lev[i] == key:
            return self.level_base[k] + i
        return None

    def shape_vars(self, k: int) -> np.ndarray:
        return self.level_base[k] + np.arange(len(self.sets.levels[k]))

    def cell_var(self, p: Cell) -> int | None:
        key = _fold(np.array(p, dtype=np.int64))
        i = int(np.searchsorted(self.cells, key))
        if i < len(self.cells) and self.cells[i] == key:
            return self.cell_base + i
        return None

    def cell_vars_of(self, cells) -> np.ndarray:
        """Variable ids for cell coordinates; 0 where a cell has no variable."""
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
        hit, pos = _members(self.cells, _fold(cells))
        return np.where(hit, self.cell_base + pos, 0)

    def coverers(self, cells) -> np.ndarray:
        """Shape variables whose placement covers any of ``cells``."""
        ids = self.cell_vars_of(cells)
        ids = ids[ids > 0] - self.cell_base
        if not len(ids):
            return np.zeros(0, np.int64)
        return np.unique(np.concatenate([self.cover_vars[self.cover_ptr[i]:self.cover_ptr[i + 1]]
                                         for i in ids]))

    def describe(self, var: int):
        """('shape', k, Transform) | ('cell', (x, y)) | ('aux', var)."""
        if 1 <= var < self.cell_base:
            k = max(i for i, b in enumerate(self.level_base) if b <= var)
            return ("shape", k, Transform.unpack(int(self.sets.levels[k][var - self.level_base[k]])))
        if var < self.cell_base + len(self.cells):
            xy = _unfold(self.cells[var - self.cell_base])
            return ("cell", (int(xy[0]), int(xy[1])))
        return ("aux", var)


def _binary(a: np.ndarray, b: np.ndarray) -> list[tuple[int, int]]:
    return list(zip(a.tolist(), b.tolist()))


def _grouped_clauses(keys: np.ndarray, values: np.ndarray, heads: np.ndarray) -> list[list[int]]:
    """One clause per run of equal ``keys``: its head literal, then the run's values."""
    if not len(keys):
        return []
    cuts = np.flatnonzero(keys[1:] != keys[:-1]) + 1
    starts = np.r_[0, cuts]
    bounds = zip(starts.tolist(), np.r_[cuts, len(keys)].tolist())
    vals = values.tolist()
    return [[h] + vals[a:b] for h, (a, b) in zip(heads[starts].tolist(), bounds)]


def build_formula(shape: Shape, n: int, mode: EncodeMode = HOLES_ALLOWED, *,
                  overlap: str = "pairwise", prune: bool = False,
                  sets: CoronaTransformSets | None = None,
                  families: dict | None = None) -> tuple[CnfFormula, VarMap]:
    """F_n for ``shape``.

    ``overlap="pairwise"`` emits one clause per overlapping pair of shape
    variables; ``"sequential"`` replaces them by a ladder at-most-one
    constraint per cell whose last rung is the cell variable itself, so the
    copy-uses-cell implications follow along the ladder and family 2 is
    empty (same solutions on shape and cell variables).  In hole-free mode, pairs of adjacent level-n copies that
    enclose a hole between them are forbidden.  ``families``, when given,
    receives clause counts per family.
    """
    if n < 1:
        raise ValueError("F_n needs n >= 1")
    if overlap not in ("pairwise", "sequential"):
        raise ValueError(f"unknown overlap encoding {overlap!r}")
    geo = shape_geometry(shape)
    if sets is None or len(sets.levels) != n + 1:
        sets = corona_transforms(shape, n, prune=prune)
    levels = sets.levels
    level_base = []
    nxt = 1
    for lev in levels:
        level_base.append(nxt)
        nxt += len(lev)
    all_keys = np.concatenate(levels)
    all_vars = np.arange(1, nxt, dtype=np.int64)
    var_level = np.concatenate([np.full(len(lev), k) for k, lev in enumerate(levels)])

    rows, cells = geo.cells_of(all_keys)
    cell_keys, cell_idx = np.unique(_fold(cells), return_inverse=True)
    cell_base = nxt
    inc_var = all_vars[rows]
    inc_cell = cell_base + cell_idx.ravel()
    num_vars = cell_base + len(cell_keys) - 1

    out: list = []
    counts = {}

    def emit(name, clauses):
        counts[name] = counts.get(name, 0) + len(clauses)
        out.extend(clauses)

    # (1) the 0-corona is always used
    emit("1", [[1]])
    order = np.lexsort((inc_var, inc_cell))
    by_cell_var = inc_var[order]
    by_cell = inc_cell[order]
    # (2) a used copy uses its cells
    emit("2", _binary(-inc_var, inc_cell) if overlap == "pairwise" else [])
    # (3) a used cell is covered by some copy
    emit("3", _grouped_clauses(by_cell, by_cell_var, -by_cell))
    # (4) interior copies recruit their halo cells
    inner = np.nonzero(var_level < n)[0]
    hrows, hcells = geo.halo_of(all_keys[inner])
    hvar = all_vars[inner][hrows]
    hcell = np.zeros(len(hvar), np.int64)
    if len(hvar):
        hit, pos = _members(cell_keys, _fold(hcells))
        hcell = np.where(hit, cell_base + pos, 0)
    uncoverable = np.unique(hvar[hcell == 0])
    emit("4", _binary(-hvar[hcell != 0], hcell[hcell != 0]) + [[-int(v)] for v in uncoverable])
    # (5) used copies do not overlap
    if overlap == "pairwise":
        pair_keys = []
        cuts = np.flatnonzero(by_cell[1:] != by_cell[:-1]) + 1
        for group in np.split(by_cell_var, cuts):
            if len(group) > 1:
                i, j = np.triu_indices(len(group), 1)
                pair_keys.append(group[i] * (num_vars + 1) + group[j])
        if pair_keys:
            pk = np.unique(np.concatenate(pair_keys))
            emit("5", _binary(-(pk // (num_vars + 1)), -(pk % (num_vars + 1))))
        else:
            emit("5", [])
        aux_range = (num_vars + 1, num_vars)
    else:
        start = np.r_[True, by_cell[1:] != by_cell[:-1]]
        end = np.r_[by_cell[1:] != by_cell[:-1], True]
        aux = np.zeros(len(by_cell), np.int64)
        aux[~end] = num_vars + 1 + np.arange(int((~end).sum()))
        aux_range = (num_vars + 1, num_vars + int((~end).sum()))
        num_vars = aux_range[1]
        # rung i is "some of the first i coverers is used"; the last rung is the cell
        rung = np.where(end, by_cell, aux)
        x = by_cell_var
        prev = np.r_[0, rung[:-1]][~start]
        emit("5", _binary(-x, rung) + _binary(-prev, rung[~start]) + _binary(-prev, -x[~start]))
    # (6) a level-k copy touches some level k-1 copy
    f6 = []
    for k in range(1, n + 1):
        child, parent = sets.parents[k]
        order = np.lexsort((parent, child))
        child, parent = child[order], parent[order]
        f6.extend(_grouped_clauses(child, parent + level_base[k - 1], -(level_base[k] + child)))
        lonely = np.setdiff1d(np.arange(len(levels[k])), child)
        f6.extend([-(level_base[k] + c)] for c in lonely.tolist())
    emit("6", f6)
    # (7) a level-k copy does not touch levels <= k-2
    f7 = []
    for m in range(0, n - 1):
        r, nb = geo.neighbours(levels[m], geo.adj)
        for k in range(m + 2, n + 1):
            hit, pos = _members(levels[k], nb)
            f7.append(_binary(-(level_base[k] + pos[hit]), -(level_base[m] + r[hit])))
    emit("7", [c for part in f7 for c in part])
    if not mode.holes_allowed:
        r, nb = geo.neighbours(levels[n], geo.hole_adj)
        hit, pos = _members(levels[n], nb)
        a, b = r[hit], pos[hit]
        keep = a < b
        emit("pair-hole", _binary(-(level_base[n] + a[keep]), -(level_base[n] + b[keep])))
    if families is not None:
        families.update(counts)
    formula = CnfFormula(num_vars, out)
    ptr = np.searchsorted(by_cell, cell_base + np.arange(len(cell_keys) + 1))
    return formula, VarMap(sets, level_base, cell_keys, cell_base, aux_range, ptr, by_cell_var)


@dataclass
class Witness:
    """Transforms used at each corona level (level 0 is the identity)."""

    shape: Shape
    levels: list[list[Transform]]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def placements(self):
        from .polyform import place
        return [[place(self.shape, t) for t in lev] for lev in self.levels]

    def truncated(self, depth: int) -> Witness:
        return Witness(self.shape, [list(lev) for lev in self.levels[:depth + 1]])


def true_shape_vars(model, varmap: VarMap) -> np.ndarray:
    """Boolean mask over shape variables 1..N (index 0 unused)."""
    arr = np.asarray(model[:varmap.num_shape_vars], dtype=np.int64)
    mask = np.zeros(varmap.num_shape_vars + 1, bool)
    mask[np.abs(arr)] = arr > 0
    return mask


def decode_model(model, varmap: VarMap) -> Witness:
    mask = true_shape_vars(model, varmap)
    levels = []
    for k, lev in enumerate(varmap.sets.levels):
        ids = varmap.level_base[k] + np.arange(len(lev))
        levels.append([Transform.unpack(int(x)) for x in lev[mask[ids]]])
    return Witness(varmap.sets.shape, levels)
