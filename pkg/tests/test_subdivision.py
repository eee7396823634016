import random
from fractions import Fraction

from secfan.fan import build_fan, chamber_of
from secfan.geometry import dot, pt
from secfan.problem import from_points, from_weights
from secfan.subdivision import (
    BASE,
    lift_of_point,
    localized_equal,
    psi_value,
    regular_subdivision,
    second_lift,
    subdivision_of_chamber,
    uses_base_point,
)


class TestRegularSubdivision:
    def test_zero_lift_single_cell(self, ex1):
        t = regular_subdivision(ex1, [0] * 6)
        assert len(t.cells) == 1
        cell = t.cells[0]
        assert cell.marking == frozenset([BASE, 0, 1, 2, 3, 4, 5])

    def test_example1_coarse_lift(self, ex1):
        # interior points lifted strictly above the plane through the three
        # vertices: one cell marked by the base and the two axis vertices
        b = [1, 1, 0, 1, 1, 0]
        t = regular_subdivision(ex1, b)
        assert len(t.cells) == 1
        assert t.cells[0].marking == frozenset([BASE, 2, 5])

    def test_example1_generic_triangulation(self, ex1):
        b = [Fraction(17, 16), Fraction(9, 8), Fraction(3, 2), Fraction(1, 16), Fraction(1, 32), Fraction(1, 4)]
        t = regular_subdivision(ex1, b)
        from secfan.geometry import normalized_volume, convex_hull

        vols = [normalized_volume(convex_hull(c.vertices)) for c in t.cells]
        assert sum(vols) == 6
        if all(v == 1 for v in vols):
            assert len(t.cells) == 6

    def test_cell_volumes_cover(self, ex2):
        rng = random.Random(3)
        from secfan.geometry import convex_hull, normalized_volume

        pi_vol = normalized_volume(ex2.pi_polytope())
        for _ in range(4):
            b = [Fraction(rng.randint(-8, 8), rng.randint(1, 5)) for _ in range(5)]
            t = regular_subdivision(ex2, b)
            assert sum(normalized_volume(convex_hull(c.vertices)) for c in t.cells) == pi_vol

    def test_legendre_consistency(self, ex2):
        rng = random.Random(5)
        b = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(5)]
        t = regular_subdivision(ex2, b)
        pts = [q.free for q in ex2.points]
        for _ in range(20):
            xi = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(2))
            direct = min([Fraction(0)] + [bi + dot(a, xi) for bi, a in zip(b, pts)])
            # recover the same value from the subdivision: minimize psi + <xi, .>
            # over the cell vertices
            best = None
            for c in t.cells:
                alpha, gamma = c.functional[:-1], c.functional[-1]
                for v in c.vertices:
                    val = (dot(alpha, v) + gamma) + dot(xi, v)
                    best = val if best is None else min(best, val)
            assert best == direct

    def test_psi_matches_markings(self, ex2):
        b = [Fraction(1), Fraction(0), Fraction(2), Fraction(0), Fraction(1)]
        t = regular_subdivision(ex2, b)
        for c in t.cells:
            for m in c.marking:
                if m == BASE:
                    assert psi_value(t, [0, 0]) == 0
                else:
                    assert psi_value(t, ex2.points[m].free) == b[m]


class TestChamberSubdivision:
    def test_flop_two_chambers_differ(self):
        p = from_weights([[1, -1]])
        fan = build_fan(p)
        t0 = subdivision_of_chamber(fan, fan.chambers[0])
        t1 = subdivision_of_chamber(fan, fan.chambers[1])
        assert not localized_equal(t0, t1, BASE)

    def test_example2_chamber_markers(self, ex2):
        fan = build_fan(ex2)
        from tests.conftest import chamber_with_markers

        c = chamber_with_markers(ex2, fan, [{1, 3}])
        t = subdivision_of_chamber(fan, c)
        base_cells = t.base_cells()
        assert len(base_cells) == 1
        assert base_cells[0].marking == frozenset([BASE, 1, 3])

    def test_example3_bijection(self, ex3):
        # five chambers give five distinct localized classes
        fan = build_fan(ex3)
        subs = [subdivision_of_chamber(fan, c) for c in fan.chambers]
        for i in range(len(subs)):
            for j in range(i + 1, len(subs)):
                assert not localized_equal(subs[i], subs[j], BASE)

    def test_chamber_soundness(self, ex2):
        fan = build_fan(ex2)
        p = ex2
        for c in fan.chambers:
            t1 = subdivision_of_chamber(fan, c)
            # a second interior point of the same chamber
            other = next(
                (cell.sample for cell in c.cells if cell.sample != c.sample_point),
                tuple(x * 2 for x in c.sample_point),
            )
            t2 = regular_subdivision(p, lift_of_point(p, other))
            assert localized_equal(t1, t2, BASE)

    def test_restriction_compatibility(self, ex1):
        # the PL function restricted to a face agrees with the face problem's
        from secfan.problem import face_problem, minimal_faces

        fan = build_fan(ex1)
        c = fan.chambers[0]
        b = lift_of_point(ex1, c.sample_point)
        t = regular_subdivision(ex1, b)
        face = next(f for f in minimal_faces(ex1) if f.indices == (0, 1, 2))
        sub = face_problem(ex1, face)
        b_face = [b[i] for i in sub.index_map]
        t_face = regular_subdivision(sub.problem, b_face)
        # evaluate at the face points: coordinates differ but values agree
        for j, i in enumerate(sub.index_map):
            x_parent = ex1.points[i].free
            x_face = sub.problem.points[j].free
            assert psi_value(t, x_parent) == psi_value(t_face, x_face)


class TestUsesBasePoint:
    def test_cy_always(self, ex3):
        rng = random.Random(7)
        for _ in range(3):
            b = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(7)]
            assert uses_base_point(regular_subdivision(ex3, b))

    def test_empty_chamber_lift(self):
        p = from_weights([[1, 1]])
        t = regular_subdivision(p, [-1, -1])  # stability -2 < 0: empty chamber
        assert not uses_base_point(t)

    def test_zero_lift(self):
        p = from_weights([[1, 1]])
        assert uses_base_point(regular_subdivision(p, [0, 0]))


class TestLocalizedEqual:
    def test_reflexive(self, ex2):
        fan = build_fan(ex2)
        t = subdivision_of_chamber(fan, fan.chambers[0])
        assert localized_equal(t, t, BASE)

    def test_second_lift_invariance(self, ex2):
        fan = build_fan(ex2)
        for c in fan.chambers:
            b = lift_of_point(ex2, c.sample_point)
            t1 = regular_subdivision(ex2, b)
            t2 = regular_subdivision(ex2, second_lift(ex2, b))
            assert localized_equal(t1, t2, BASE)

    def test_distinguishes_away_from_base(self, ex1):
        b1 = [1, 1, 0, 1, 1, 0]
        # raise one interior lift without touching the base-marked cell
        t1 = regular_subdivision(ex1, b1)
        b2 = list(b1)
        b2[0] = 2
        t2 = regular_subdivision(ex1, b2)
        assert localized_equal(t1, t2, BASE)
        assert localized_equal(t1, t2, 2)
