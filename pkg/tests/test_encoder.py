import pytest
from hypothesis import given
from hypothesis import strategies as st

from heesch.cnf import SolveSession, evaluate, solve
from heesch.encoder import (HOLE_FREE, HOLES_ALLOWED, build_formula, corona_transforms, decode_model,
                            pack_keys, unpack_keys)
from heesch.engine import validate_witness
from heesch.lattice import IDENTITY, GridKind, Transform
from heesch.polyform import Shape, adjacent, enumerate_free, halo, pair_encloses_hole, place

from conftest import GRIDS, grids
from oracles import corona_exists

SQ, HEX, TRI = GridKind.SQUARE, GridKind.HEX, GridKind.IAMOND
MONO = Shape.from_cells(SQ, [(0, 0)])
MODES = [HOLES_ALLOWED, HOLE_FREE]


def _small_shapes(max_order):
    return [s for g in GRIDS for n in range(1, max_order + 1) for s in enumerate_free(g, n, exclude_holed=True)]


def _oracle_levels(shape, n, prune=False):
    """T_0..T_n straight from the definition: everything adjacent to the level below."""
    g = shape.grid
    step = 3 if g is TRI else 1
    levels = [[IDENTITY]]
    region = set(shape.cells)
    for k in range(1, n + 1):
        if prune and k >= 2:
            region |= halo(g, region)
        found = {}
        for parent in levels[-1]:
            base = place(shape, parent)
            ring = halo(g, base.cells)
            for o in range(g.orientation_count):
                img = place(shape, Transform(o, 0, 0)).cells
                for h in ring:
                    for c in img:
                        dx, dy = h[0] - c[0], h[1] - c[1]
                        if dx % step or dy % step:
                            continue
                        t = Transform(o, dx, dy)
                        pl = place(shape, t)
                        if not adjacent(pl, base):
                            continue
                        if prune and k >= 2 and pl.cells & region:
                            continue
                        if pl.cells not in found or t < found[pl.cells]:
                            found[pl.cells] = t
        levels.append(sorted(found.values()))
    return levels


class TestCoronaTransforms:
    def test_base_case(self):
        for g in GRIDS:
            s = enumerate_free(g, 3)[0]
            assert corona_transforms(s, 0).transforms(0) == [IDENTITY]

    def test_monomino_ring(self):
        sets = corona_transforms(MONO, 1)
        assert len(sets.transforms(1)) == 8
        assert {place(MONO, t).cells for t in sets.transforms(1)} == {frozenset({p}) for p in halo(SQ, [(0, 0)])}

    @pytest.mark.parametrize("prune", [False, True])
    @pytest.mark.parametrize("shape", _small_shapes(3), ids=lambda s: f"{s.grid.value}-{s.cells}")
    def test_matches_definition(self, shape, prune):
        sets = corona_transforms(shape, 2, prune=prune)
        assert [sets.transforms(k) for k in range(3)] == _oracle_levels(shape, 2, prune)

    def test_levels_may_share_transforms(self):
        sets = corona_transforms(MONO, 2)
        assert set(sets.transforms(1)) & set(sets.transforms(2))

    def test_parents_are_adjacent(self):
        s = enumerate_free(HEX, 4)[2]
        sets = corona_transforms(s, 2)
        for k in (1, 2):
            child, parent = sets.parents[k]
            for c, p in zip(child.tolist(), parent.tolist()):
                assert adjacent(place(s, sets.transforms(k)[c]), place(s, sets.transforms(k - 1)[p]))

    @given(st.data())
    def test_key_packing_round_trip(self, data):
        g = data.draw(grids)
        o = data.draw(st.integers(0, g.orientation_count - 1))
        tx, ty = data.draw(st.integers(-128, 127)), data.draw(st.integers(-128, 127))
        import numpy as np
        keys = pack_keys(np.array([o]), np.array([[tx, ty]]))
        orient, txy = unpack_keys(keys)
        assert (int(orient[0]), int(txy[0][0]), int(txy[0][1])) == (o, tx, ty)
        assert int(keys[0]) == Transform(o, tx, ty).pack()


class TestFormula:
    def test_monomino_first_corona(self):
        fam = {}
        f, vm = build_formula(MONO, 1, families=fam)
        assert vm.num_shape_vars == 9 and vm.num_cell_vars == 9
        assert fam["7"] == 0
        r = solve(f)
        assert r.sat
        w = decode_model(r.model, vm)
        assert w.levels[0] == [IDENTITY]
        assert len(w.levels[1]) == 8

    @pytest.mark.parametrize("overlap", ["pairwise", "sequential"])
    def test_hygiene(self, overlap):
        for s in [MONO, enumerate_free(TRI, 4)[1], enumerate_free(HEX, 3)[2]]:
            f, vm = build_formula(s, 2, HOLE_FREE, overlap=overlap)
            used = {abs(lit) for c in f.clauses for lit in c}
            assert all(c for c in f.clauses)
            assert max(used) <= f.num_vars
            assert set(range(1, vm.num_shape_vars + 1)) <= used
            kinds = [vm.describe(v)[0] for v in range(1, f.num_vars + 1)]
            assert kinds.count("shape") == vm.num_shape_vars
            assert kinds.count("cell") == vm.num_cell_vars

    def test_formula_is_rebuilt_per_level(self):
        def symbolic(f, vm):
            return {frozenset((lit > 0, vm.describe(abs(lit))[1:]) for lit in c) for c in f.clauses}
        one = symbolic(*build_formula(MONO, 1, overlap="pairwise"))
        two = symbolic(*build_formula(MONO, 2, overlap="pairwise"))
        assert not one <= two

    def test_pair_hole_family_matches_flood_fill(self):
        u = Shape.from_cells(SQ, [(0, 0), (1, 0), (2, 0), (0, 1), (2, 1)])
        fam = {}
        _, vm = build_formula(u, 1, HOLE_FREE, families=fam)
        placed = [place(u, t) for t in vm.sets.transforms(1)]
        expect = sum(1 for i in range(len(placed)) for j in range(i + 1, len(placed))
                     if adjacent(placed[i], placed[j]) and pair_encloses_hole(placed[i], placed[j]))
        assert expect > 0 and fam["pair-hole"] == expect

    @pytest.mark.parametrize("shape", _small_shapes(3), ids=lambda s: f"{s.grid.value}-{s.cells}")
    def test_overlap_encodings_share_solutions(self, shape):
        # each projected model of one encoding extends to a model of the other
        built = {o: build_formula(shape, 1, overlap=o) for o in ("pairwise", "sequential")}
        keep = built["pairwise"][1].num_shape_vars + built["pairwise"][1].num_cell_vars
        for src, dst in [("pairwise", "sequential"), ("sequential", "pairwise")]:
            session = SolveSession(built[src][0], "builtin")
            for _ in range(60):
                r = session.solve()
                if not r.sat:
                    break
                head = r.model[:keep]
                other = SolveSession(built[dst][0], "builtin")
                for lit in head:
                    other.add_clause([lit])
                assert other.solve().sat
                session.add_clause([-lit for lit in head])


def _oracle_cases(max_order, n):
    return [(s, n) for s in _small_shapes(max_order)]


@pytest.mark.parametrize("mode", MODES, ids=["holes", "hole-free"])
@pytest.mark.parametrize("shape,n", _oracle_cases(4, 1) + _oracle_cases(4, 2) +
                         [(s, 2) for g in GRIDS for s in enumerate_free(g, 5, exclude_holed=True)],
                         ids=lambda v: f"{v.grid.value}-{len(v)}-{v.cells}" if isinstance(v, Shape) else f"n{v}")
def test_formula_agrees_with_exhaustive_search(shape, n, mode):
    levels = corona_transforms(shape, n)
    expected = corona_exists(shape, [levels.transforms(k) for k in range(n + 1)], mode.holes_allowed)
    for overlap, prune in [("pairwise", False), ("sequential", True)]:
        f, vm = build_formula(shape, n, mode, overlap=overlap, prune=prune)
        r = solve(f)
        assert r.sat == expected, (overlap, prune)
        if r.sat:
            assert evaluate(f.clauses, r.model)
            w = decode_model(r.model, vm)
            problems = validate_witness(shape, w, HOLES_ALLOWED)
            # interior pockets are the engine's business; everything else must hold
            assert [p for p in problems if "enclose a hole" not in p] == []
            if n == 1:
                assert problems == []
