"""The three ambient grids: square, hexagonal, and triangular.

Cells are plain ``(x, y)`` integer tuples.  Hexagonal cells use the basis
v = (1, 0), w = (1/2, sqrt(3)/2).  Triangular cells live sparsely inside the
hexagonal grid: up-pointing ("black") triangles at coordinates divisible by 3,
down-pointing ("grey") triangles at coordinates congruent to (1, 1) mod 3.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import InvalidCellError, TransformRangeError

Cell = tuple[int, int]
Matrix = tuple[tuple[int, int], tuple[int, int]]

TRANSLATION_MIN = -128
TRANSLATION_MAX = 127
SQRT3 = math.sqrt(3.0)


class GridKind(str, enum.Enum):
    SQUARE = "omino"
    HEX = "hex"
    IAMOND = "iamond"

    @classmethod
    def parse(cls, name: str | GridKind) -> GridKind:
        if isinstance(name, GridKind):
            return name
        aliases = {"square": cls.SQUARE, "omino": cls.SQUARE, "polyomino": cls.SQUARE,
                   "hex": cls.HEX, "polyhex": cls.HEX,
                   "iamond": cls.IAMOND, "polyiamond": cls.IAMOND, "tri": cls.IAMOND}
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown grid {name!r}") from None

    @property
    def orientation_count(self) -> int:
        return 8 if self is GridKind.SQUARE else 12


@dataclass(frozen=True)
class Orientation:
    index: int
    matrix: Matrix
    offset: Cell = (0, 0)

    def __call__(self, p: Cell) -> Cell:
        (a, b), (c, d) = self.matrix
        return (a * p[0] + b * p[1] + self.offset[0], c * p[0] + d * p[1] + self.offset[1])

    @property
    def reflects(self) -> bool:
        (a, b), (c, d) = self.matrix
        return a * d - b * c < 0


class Transform(NamedTuple):
    """Orientation index plus integer translation."""

    orientation: int
    tx: int
    ty: int

    def pack(self) -> int:
        """32-bit key; orders by orientation, then tx, then ty."""
        _check_range(self.tx, self.ty)
        return (self.orientation << 16) | ((self.tx - TRANSLATION_MIN) << 8) | (self.ty - TRANSLATION_MIN)

    @classmethod
    def unpack(cls, key: int) -> Transform:
        return cls(key >> 16, ((key >> 8) & 0xFF) + TRANSLATION_MIN, (key & 0xFF) + TRANSLATION_MIN)


IDENTITY = Transform(0, 0, 0)


def _check_range(tx: int, ty: int) -> None:
    if not (TRANSLATION_MIN <= tx <= TRANSLATION_MAX and TRANSLATION_MIN <= ty <= TRANSLATION_MAX):
        raise TransformRangeError(f"translation ({tx}, {ty}) outside [{TRANSLATION_MIN}, {TRANSLATION_MAX}]")


def _matmul(m: Matrix, n: Matrix) -> Matrix:
    return ((m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
            (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]))


def _matvec(m: Matrix, p: Cell) -> Cell:
    return (m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1])


_I: Matrix = ((1, 0), (0, 1))
# 90 degree counter-clockwise rotation and reflection across the x axis
_R: Matrix = ((0, -1), (1, 0))
_F: Matrix = ((1, 0), (0, -1))
# hex basis: 60 degree rotation and reflection across the v axis
HEX_A: Matrix = ((0, -1), (1, 1))
HEX_B: Matrix = ((1, 1), (0, -1))
IAMOND_SWAP_OFFSET: Cell = (1, -2)


def _powers(m: Matrix, n: int) -> list[Matrix]:
    out = [_I]
    for _ in range(n - 1):
        out.append(_matmul(m, out[-1]))
    return out


@lru_cache(maxsize=None)
def orientations(grid: GridKind) -> tuple[Orientation, ...]:
    """All orientations of ``grid``; index 0 is the identity.

    Square: R^i then R^i F (R = 90 degree rotation, F = x-axis mirror).
    Hex: A^i then A^i B.
    Iamond: the six maps that keep triangle colours, in hex order, then the
    six colour swaps B P + (1, -2) for each of those P.
    """
    grid = GridKind.parse(grid)
    if grid is GridKind.SQUARE:
        rots = _powers(_R, 4)
        mats = rots + [_matmul(r, _F) for r in rots]
        return tuple(Orientation(i, m) for i, m in enumerate(mats))
    rots = _powers(HEX_A, 6)
    hex_mats = rots + [_matmul(r, HEX_B) for r in rots]
    if grid is GridKind.HEX:
        return tuple(Orientation(i, m) for i, m in enumerate(hex_mats))
    keep = [m for m in hex_mats if _mod3(_matvec(m, (1, 1))) == (1, 1)]
    swap = [_matmul(HEX_B, m) for m in keep]
    return tuple([Orientation(i, m) for i, m in enumerate(keep)]
                 + [Orientation(6 + i, m, IAMOND_SWAP_OFFSET) for i, m in enumerate(swap)])


@lru_cache(maxsize=None)
def _matrix_index(grid: GridKind) -> dict[Matrix, int]:
    return {o.matrix: o.index for o in orientations(grid)}


@lru_cache(maxsize=None)
def orientation_arrays(grid: GridKind) -> tuple[np.ndarray, np.ndarray]:
    """(K, 2, 2) matrices and (K, 2) offsets for vectorised use."""
    ors = orientations(grid)
    mats = np.array([o.matrix for o in ors], dtype=np.int64)
    offs = np.array([o.offset for o in ors], dtype=np.int64)
    mats.setflags(write=False)
    offs.setflags(write=False)
    return mats, offs


def _mod3(p: Cell) -> Cell:
    return (p[0] % 3, p[1] % 3)


def cell_color(grid: GridKind, p: Cell) -> int:
    """0 for up/black, 1 for down/grey triangles; always 0 off the triangular grid."""
    if grid is not GridKind.IAMOND:
        return 0
    r = _mod3(p)
    if r == (0, 0):
        return 0
    if r == (1, 1):
        return 1
    raise InvalidCellError(f"{p} is not a triangle cell")


def is_valid_cell(grid: GridKind, p: Cell) -> bool:
    if grid is GridKind.IAMOND:
        return _mod3(p) in ((0, 0), (1, 1))
    return True


def check_cell(grid: GridKind, p: Cell) -> None:
    if not is_valid_cell(grid, p):
        raise InvalidCellError(f"{p} is not a valid {grid.value} cell")


def check_transform(grid: GridKind, t: Transform) -> None:
    if not 0 <= t.orientation < grid.orientation_count:
        raise InvalidCellError(f"orientation {t.orientation} out of range for {grid.value}")
    _check_range(t.tx, t.ty)
    if grid is GridKind.IAMOND and (t.tx % 3 or t.ty % 3):
        raise InvalidCellError(f"iamond translation ({t.tx}, {t.ty}) must be divisible by 3")


def apply(grid: GridKind, t: Transform, p: Cell) -> Cell:
    check_transform(grid, t)
    check_cell(grid, p)
    q = orientations(grid)[t.orientation](p)
    return (q[0] + t.tx, q[1] + t.ty)


def compose(grid: GridKind, t1: Transform, t2: Transform) -> Transform:
    """The transform p -> t1(t2(p))."""
    check_transform(grid, t1)
    check_transform(grid, t2)
    o1 = orientations(grid)[t1.orientation]
    o2 = orientations(grid)[t2.orientation]
    m = _matmul(o1.matrix, o2.matrix)
    inner = o1((o2.offset[0] + t2.tx, o2.offset[1] + t2.ty))
    o3 = orientations(grid)[_matrix_index(grid)[m]]
    tx = inner[0] + t1.tx - o3.offset[0]
    ty = inner[1] + t1.ty - o3.offset[1]
    _check_range(tx, ty)
    return Transform(o3.index, tx, ty)


def inverse(grid: GridKind, t: Transform) -> Transform:
    check_transform(grid, t)
    for o in orientations(grid):
        if _matmul(o.matrix, orientations(grid)[t.orientation].matrix) == _I:
            # solve o(t(0)) + u = 0 for the translation u
            img = o(apply(grid, t, (0, 0)))
            u = Transform(o.index, -img[0], -img[1])
            _check_range(u.tx, u.ty)
            return u
    raise AssertionError("orientation set is not a group")


_SQUARE_HALO = tuple((dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0))
_SQUARE_EDGE = ((1, 0), (0, 1), (-1, 0), (0, -1))
_HEX_RING = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
# Triangle neighbourhoods, keyed by colour.  Derived from shared vertices in the
# Cartesian embedding; tests/test_lattice.py re-derives them.
_IAMOND_HALO = (
    ((-3, 0), (-3, 3), (-2, -2), (-2, 1), (-2, 4), (0, -3),
     (0, 3), (1, -2), (1, 1), (3, -3), (3, 0), (4, -2)),
    ((-4, 2), (-3, 0), (-3, 3), (-1, -1), (-1, 2), (0, -3),
     (0, 3), (2, -4), (2, -1), (2, 2), (3, -3), (3, 0)),
)
_IAMOND_EDGE = (((-2, 1), (1, -2), (1, 1)), ((-1, -1), (-1, 2), (2, -1)))


def halo_offsets(grid: GridKind, color: int = 0) -> tuple[Cell, ...]:
    if grid is GridKind.SQUARE:
        return _SQUARE_HALO
    if grid is GridKind.HEX:
        return _HEX_RING
    return _IAMOND_HALO[color]


def edge_offsets(grid: GridKind, color: int = 0) -> tuple[Cell, ...]:
    if grid is GridKind.SQUARE:
        return _SQUARE_EDGE
    if grid is GridKind.HEX:
        return _HEX_RING
    return _IAMOND_EDGE[color]


def halo_neighbors(grid: GridKind, p: Cell) -> frozenset[Cell]:
    """Cells sharing an edge or a vertex with ``p``."""
    offs = halo_offsets(grid, cell_color(grid, p))
    return frozenset((p[0] + dx, p[1] + dy) for dx, dy in offs)


def edge_neighbors(grid: GridKind, p: Cell) -> frozenset[Cell]:
    """Cells sharing an edge with ``p``; the moves a hole flood fill may make."""
    offs = edge_offsets(grid, cell_color(grid, p))
    return frozenset((p[0] + dx, p[1] + dy) for dx, dy in offs)


def to_cartesian(grid: GridKind, p: Cell) -> tuple[float, float]:
    if grid is GridKind.SQUARE:
        return (float(p[0]), float(p[1]))
    return (p[0] + 0.5 * p[1], SQRT3 / 2 * p[1])


# Cell corners as integer keys on a refined lattice: doubled coordinates for
# squares, tripled for hexagons, and the (2, 2) mod 3 hex cells for triangles.
_VERTEX_SCALE = {GridKind.SQUARE: 2, GridKind.HEX: 3, GridKind.IAMOND: 1}
_SQUARE_CORNERS = ((1, 1), (-1, 1), (-1, -1), (1, -1))
_HEX_CORNERS = ((1, 1), (-1, 2), (-2, 1), (-1, -1), (1, -2), (2, -1))
_IAMOND_CORNERS = (((2, -1), (-1, 2), (-1, -1)), ((1, 1), (-2, 1), (1, -2)))


def corner_offsets(grid: GridKind, color: int = 0) -> tuple[Cell, ...]:
    """Corner keys of the cell at the origin (or at (1, 1) for grey triangles), CCW."""
    if grid is GridKind.SQUARE:
        return _SQUARE_CORNERS
    if grid is GridKind.HEX:
        return _HEX_CORNERS
    return _IAMOND_CORNERS[color]


def vertex_keys(grid: GridKind, p: Cell) -> tuple[Cell, ...]:
    """Integer keys of the corners of ``p``, counter-clockwise."""
    s = _VERTEX_SCALE[grid]
    return tuple((s * p[0] + dx, s * p[1] + dy)
                 for dx, dy in corner_offsets(grid, cell_color(grid, p)))


def vertex_to_cartesian(grid: GridKind, v: Cell) -> tuple[float, float]:
    s = _VERTEX_SCALE[grid]
    x, y = to_cartesian(grid, v)
    return (x / s, y / s)


def cell_polygon(grid: GridKind, p: Cell) -> list[tuple[float, float]]:
    return [vertex_to_cartesian(grid, v) for v in vertex_keys(grid, p)]


def cell_area(grid: GridKind) -> float:
    if grid is GridKind.SQUARE:
        return 1.0
    if grid is GridKind.HEX:
        return SQRT3 / 2
    return 9 * SQRT3 / 4
