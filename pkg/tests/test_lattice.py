import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from heesch import lattice
from heesch.errors import InvalidCellError, TransformRangeError
from heesch.lattice import IDENTITY, GridKind, Transform

from conftest import GRIDS, cells, grids, transforms

SQ, HEX, TRI = GridKind.SQUARE, GridKind.HEX, GridKind.IAMOND
SQRT3 = math.sqrt(3)


def _window(grid, radius=6):
    out = []
    for x in range(-radius, radius + 1):
        for y in range(-radius, radius + 1):
            if lattice.is_valid_cell(grid, (x, y)):
                out.append((x, y))
    return out


def _triangle(p):
    """Corners of a triangle cell from its centroid, scaled so corners are integral.

    Cell coordinates are three times the centroid in the (v, w) basis, and the
    triangles have unit side in that basis: an up triangle spans
    centroid + {-(v+w)/3, (2v-w)/3, (2w-v)/3}, a down one the negatives.
    """
    sign = 1 if p[0] % 3 == 0 else -1
    return frozenset((p[0] + sign * dx, p[1] + sign * dy) for dx, dy in ((-1, -1), (2, -1), (-1, 2)))


def _oracle_neighbours(grid, p, shared):
    """Neighbours computed from geometry alone, not from the lattice tables."""
    found = set()
    for q in _window(grid, 8):
        q = (q[0] + p[0] - p[0] % 3 if grid is TRI else q[0] + p[0],
             q[1] + p[1] - p[1] % 3 if grid is TRI else q[1] + p[1])
        if q == p:
            continue
        if grid is SQ:
            d = max(abs(q[0] - p[0]), abs(q[1] - p[1]))
            hit = d == 1 and (shared == 1 or abs(q[0] - p[0]) + abs(q[1] - p[1]) == 1)
        elif grid is HEX:
            a, b = lattice.to_cartesian(grid, p), lattice.to_cartesian(grid, q)
            hit = math.isclose(math.dist(a, b), 1.0)
        else:
            hit = len(_triangle(p) & _triangle(q)) >= shared
        if hit:
            found.add(q)
    return found


class TestOrientations:
    def test_counts(self):
        assert [len(lattice.orientations(g)) for g in (SQ, HEX, TRI)] == [8, 12, 12]
        assert all(lattice.orientations(g)[0].matrix == ((1, 0), (0, 1)) for g in GRIDS)

    def test_square_signed_permutations(self):
        mats = {o.matrix for o in lattice.orientations(SQ)}
        assert len(mats) == 8
        for (a, b), (c, d) in mats:
            assert sorted(map(abs, (a, b, c, d))) == [0, 0, 1, 1]
            assert abs(a * d - b * c) == 1

    def test_hex_contains_sixty_degree_rotation(self):
        assert ((0, -1), (1, 1)) in [o.matrix for o in lattice.orientations(HEX)]

    def test_hex_rotation_has_order_six(self):
        rot = Transform(1, 0, 0)
        for p in [(1, 0), (3, -2), (0, 0), (-4, 7)]:
            q = p
            for _ in range(6):
                q = lattice.apply(HEX, rot, q)
            assert q == p
        t = IDENTITY
        for _ in range(6):
            t = lattice.compose(HEX, rot, t)
        assert t == IDENTITY

    def test_exactly_six_hex_matrices_keep_triangle_colours(self):
        keep = [o for o in lattice.orientations(HEX)
                if all(lattice.is_valid_cell(TRI, o(p)) and lattice.cell_color(TRI, o(p)) == lattice.cell_color(TRI, p)
                       for p in [(0, 0), (1, 1), (3, 0), (4, 1)])]
        assert len(keep) == 6
        tri = lattice.orientations(TRI)
        assert [o.matrix for o in tri[:6]] == [o.matrix for o in keep]

    def test_iamond_colour_swap_example(self):
        swap = next(o for o in lattice.orientations(TRI) if o.matrix == lattice.HEX_B)
        assert swap.offset == (1, -2)
        assert lattice.apply(TRI, Transform(swap.index, 0, 0), (0, 0)) == (1, -2)
        assert lattice.cell_color(TRI, (1, -2)) == 1

    def test_square_rot90_twice(self):
        r90 = Transform(1, 0, 0)
        assert lattice.compose(SQ, r90, r90) == Transform(2, 0, 0)
        assert lattice.apply(SQ, r90, (1, 0)) == (0, 1)

    @pytest.mark.parametrize("g", GRIDS, ids=[g.value for g in GRIDS])
    def test_group_closure(self, g):
        ors = lattice.orientations(g)
        mats = {o.matrix for o in ors}
        for o1 in ors:
            for o2 in ors:
                t = lattice.compose(g, Transform(o1.index, 0, 0), Transform(o2.index, 0, 0))
                m = ((o1.matrix[0][0] * o2.matrix[0][0] + o1.matrix[0][1] * o2.matrix[1][0],
                      o1.matrix[0][0] * o2.matrix[0][1] + o1.matrix[0][1] * o2.matrix[1][1]),
                     (o1.matrix[1][0] * o2.matrix[0][0] + o1.matrix[1][1] * o2.matrix[1][0],
                      o1.matrix[1][0] * o2.matrix[0][1] + o1.matrix[1][1] * o2.matrix[1][1]))
                assert m in mats
                assert ors[t.orientation].matrix == m


class TestApply:
    def test_examples(self):
        assert lattice.apply(SQ, IDENTITY, (3, -2)) == (3, -2)
        assert lattice.apply(HEX, Transform(1, 0, 0), (1, 0)) == (0, 1)

    def test_rejects_invalid_inputs(self):
        with pytest.raises(InvalidCellError):
            lattice.apply(TRI, IDENTITY, (1, 0))
        with pytest.raises(InvalidCellError):
            lattice.apply(TRI, Transform(0, 1, 0), (0, 0))
        with pytest.raises(InvalidCellError):
            lattice.apply(SQ, Transform(8, 0, 0), (0, 0))

    def test_compose_overflow_is_a_range_error(self):
        far = Transform(0, 120, 0)
        with pytest.raises(TransformRangeError):
            lattice.compose(SQ, far, far)

    def test_pack_round_trip_and_limits(self):
        t = Transform(11, -128, 127)
        assert Transform.unpack(t.pack()) == t
        assert t.pack() < 1 << 32
        with pytest.raises(TransformRangeError):
            Transform(0, 128, 0).pack()

    @given(st.data())
    def test_compose_agrees_with_apply(self, data):
        g = data.draw(grids)
        t1, t2 = data.draw(transforms(g)), data.draw(transforms(g))
        p = data.draw(cells(g))
        assert lattice.apply(g, lattice.compose(g, t1, t2), p) == lattice.apply(g, t1, lattice.apply(g, t2, p))

    @given(st.data())
    def test_inverse_undoes(self, data):
        g = data.draw(grids)
        t, p = data.draw(transforms(g)), data.draw(cells(g))
        back = lattice.inverse(g, t)
        assert lattice.apply(g, back, lattice.apply(g, t, p)) == p
        assert lattice.compose(g, back, t) == IDENTITY

    @given(st.data())
    def test_identity_law(self, data):
        g = data.draw(grids)
        t = data.draw(transforms(g))
        assert lattice.compose(g, IDENTITY, t) == t == lattice.compose(g, t, IDENTITY)

    @given(st.data())
    def test_iamond_colour_discipline(self, data):
        p = data.draw(cells(TRI))
        o = data.draw(st.integers(0, 11))
        q = lattice.apply(TRI, Transform(o, 0, 0), p)
        assert lattice.is_valid_cell(TRI, q)
        flipped = lattice.cell_color(TRI, q) != lattice.cell_color(TRI, p)
        assert flipped == (o >= 6)


class TestNeighbourhoods:
    def test_square_examples(self):
        assert lattice.halo_neighbors(SQ, (0, 0)) == {(x, y) for x in (-1, 0, 1) for y in (-1, 0, 1)} - {(0, 0)}
        assert lattice.edge_neighbors(SQ, (0, 0)) == {(1, 0), (-1, 0), (0, 1), (0, -1)}

    def test_hex_halo_is_edge_ring(self):
        ring = {(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)}
        assert lattice.halo_neighbors(HEX, (0, 0)) == ring == lattice.edge_neighbors(HEX, (0, 0))

    def test_iamond_example_cell(self):
        halo = lattice.halo_neighbors(TRI, (0, 0))
        assert len(halo) == 12 and (-2, 4) in halo
        assert all(lattice.is_valid_cell(TRI, q) for q in halo)

    @pytest.mark.parametrize("g", GRIDS, ids=[g.value for g in GRIDS])
    @pytest.mark.parametrize("p", [(0, 0), (1, 1), (-3, 6), (4, -2)])
    def test_tables_match_geometry(self, g, p):
        if not lattice.is_valid_cell(g, p):
            pytest.skip("not a cell of this grid")
        assert lattice.halo_neighbors(g, p) == _oracle_neighbours(g, p, 1)
        assert lattice.edge_neighbors(g, p) == _oracle_neighbours(g, p, 2)

    def test_triangle_oracle_matches_vertex_keys(self):
        for p in [(0, 0), (1, 1), (3, -3), (-2, 4)]:
            assert _triangle(p) == frozenset(lattice.vertex_keys(TRI, p))

    @given(st.data())
    def test_cardinality_symmetry_and_inclusion(self, data):
        g = data.draw(grids)
        p = data.draw(cells(g))
        halo, edge = lattice.halo_neighbors(g, p), lattice.edge_neighbors(g, p)
        assert len(halo) == {SQ: 8, HEX: 6, TRI: 12}[g]
        assert len(edge) == {SQ: 4, HEX: 6, TRI: 3}[g]
        assert edge <= halo
        assert all(p in lattice.halo_neighbors(g, q) for q in halo)
        assert all(p in lattice.edge_neighbors(g, q) for q in edge)
        if g is TRI:
            assert {lattice.cell_color(g, q) for q in edge} == {1 - lattice.cell_color(g, p)}


class TestGeometry:
    def test_cartesian_examples(self):
        assert lattice.to_cartesian(SQ, (2, 3)) == (2.0, 3.0)
        assert lattice.to_cartesian(HEX, (0, 1)) == pytest.approx((0.5, SQRT3 / 2))
        assert lattice.to_cartesian(HEX, (1, 0)) == pytest.approx((1.0, 0.0))

    @pytest.mark.parametrize("g", GRIDS, ids=[g.value for g in GRIDS])
    def test_polygons_centred_ccw_with_cell_area(self, g):
        for p in [c for c in [(0, 0), (1, 1), (3, 3), (4, -2), (-3, 0)] if lattice.is_valid_cell(g, c)]:
            poly = lattice.cell_polygon(g, p)
            cx = sum(x for x, _ in poly) / len(poly)
            cy = sum(y for _, y in poly) / len(poly)
            assert (cx, cy) == pytest.approx(lattice.to_cartesian(g, p))
            area = 0.5 * sum(x0 * y1 - x1 * y0 for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]))
            assert area == pytest.approx(lattice.cell_area(g))

    def test_hex_corners_at_inverse_root_three(self):
        centre = lattice.to_cartesian(HEX, (2, -1))
        for v in lattice.cell_polygon(HEX, (2, -1)):
            assert math.dist(v, centre) == pytest.approx(1 / SQRT3)
