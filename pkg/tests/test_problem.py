import random
from fractions import Fraction

import pytest

from secfan import problem as pr
from secfan.geometry import det_int
from secfan.intlinalg import FgAbelianGroup
from tests.conftest import EX2_POINTS, ex4_rows, random_noncy_problems


class TestConstruction:
    def test_example3_from_weights(self, ex3):
        assert ex3.is_calabi_yau()
        assert ex3.group == FgAbelianGroup(5)

    def test_example4_cy(self):
        p = pr.from_weights(ex4_rows(2))
        assert p.is_calabi_yau()
        assert p.det_v == (0, 0, 0)

    def test_single_weight(self):
        p = pr.from_weights([[1]])
        assert not p.is_calabi_yau()
        assert p.group.is_trivial

    def test_rank_deficient_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            pr.from_weights([[1, 2], [2, 4]])

    def test_zero_column_rejected(self):
        with pytest.raises(ValueError, match="zero weight"):
            pr.from_weights([[1, 0]])
        with pytest.raises(ValueError, match="zero weight"):
            pr.from_points([(1, 0), (2, 0), (0, 1)])

    def test_example1_from_points(self, ex1):
        assert ex1.k == 4
        assert not ex1.is_calabi_yau()

    def test_example2_from_points(self, ex2):
        assert ex2.k == 3

    def test_two_basis_points_trivial(self):
        p = pr.from_points([(1, 0), (0, 1)])
        assert p.k == 0
        assert p.is_calabi_yau()

    def test_saturation_when_span_proper(self):
        p = pr.from_points([(2,)])
        assert p.k == 0
        assert p.points[0].free == (2,)

    def test_round_trip_volumes(self, ex1):
        # derived points match the input up to a unimodular change of basis:
        # all simplex volumes agree
        import itertools

        pts_in = [(1, 0), (2, 0), (3, 0), (1, 1), (0, 1), (0, 2)]
        derived = [p.free for p in ex1.points]
        for i, j in itertools.combinations(range(6), 2):
            vin = det_int([list(pts_in[i]), list(pts_in[j])])
            vout = det_int([list(derived[i]), list(derived[j])])
            assert abs(vin) == abs(vout)


class TestCyOperations:
    def test_atiyah_is_cy(self, atiyah):
        assert atiyah.is_calabi_yau()

    def test_associated_cy_single(self):
        assert pr.associated_cy(pr.from_weights([[1]])).Q == ((1, -1),)
        assert pr.associated_cy(pr.from_weights([[1, 1]])).Q == ((1, 1, -2),)

    def test_associated_cy_example1(self, ex1):
        hat = pr.associated_cy(ex1)
        assert hat.n_weights == 7
        assert hat.is_calabi_yau()
        assert hat.group.free_rank == 3

    def test_associated_cy_lifts_points(self, ex1):
        # the new configuration is the old one on a height-one slice
        hat = pr.associated_cy(ex1)
        pts = [p.free for p in hat.points]
        from secfan.intlinalg import kernel_basis, matrix, solve_rational

        # exists xi with <a_i, xi> = 1 for all i: height function
        rows = [list(p) for p in pts]
        sol = solve_rational(rows, [Fraction(1)] * len(pts))
        assert sol is not None

    def test_delete_weight_roundtrip(self, ex1):
        hat = pr.associated_cy(ex1)
        back = pr.delete_weight(hat, hat.n_weights - 1)
        assert back.Q == ex1.Q

    def test_delete_requires_cy(self, ex1):
        with pytest.raises(ValueError):
            pr.delete_weight(ex1, 0)


class TestMinimalFaces:
    def test_example1_four(self, ex1):
        idx = [f.indices for f in pr.minimal_faces(ex1)]
        assert idx == [(), (4, 5), (0, 1, 2), (0, 1, 2, 3, 4, 5)]

    def test_example2_four(self, ex2):
        idx = [f.indices for f in pr.minimal_faces(ex2)]
        assert idx == [(), (0, 1), (3, 4), (0, 1, 2, 3, 4)]

    def test_two_points_only_vertex(self):
        p = pr.from_points([(1, 0), (0, 1)])
        assert [f.indices for f in pr.minimal_faces(p)] == [()]

    def test_witnesses(self, ex1):
        pi = ex1.pi_polytope()
        for f in pr.minimal_faces(ex1):
            w = f.witness
            from secfan.geometry import dot

            assert all(dot(w, v) >= 0 for v in pi.vertices)
            for i, q in enumerate(ex1.points):
                if i in f.indices:
                    assert dot(w, q.free) == 0


class TestRelevantSubspaces:
    def test_example3(self, ex3):
        subs = pr.relevant_subspaces(ex3)
        data = {h.indices: h.dim for h in subs}
        assert data == {
            (0, 1, 2, 3, 4, 5, 6): 2,  # the whole stability plane
            (2, 3, 5): 1,  # the vertical axis through q3, q4, q6
            (): 0,
        }

    def test_cy_flop_two(self):
        p = pr.from_weights([[1, -1]])
        subs = pr.relevant_subspaces(p)
        assert sorted(h.dim for h in subs) == [0, 1]

    def test_example4_xy_plane_not_relevant(self):
        # the xy-plane weights q1, q2, q3, q5 have strictly positive second
        # coordinates on q3 and q5, so no positive combination vanishes: the
        # plane hosts two walls but no irreducible component of its own
        p = pr.from_weights(ex4_rows(2))
        ok, _ = pr.redundancy_test(p, (0, 1, 2, 4), "Q", "positively_redundant")
        assert not ok
        assert all(
            set(h.indices) != {0, 1, 2, 4} for h in pr.relevant_subspaces(p)
        )

    def test_bijection(self, ex1, ex2, ex3):
        for p in (ex1, ex2, ex3):
            faces = pr.minimal_faces(p)
            subs = pr.relevant_subspaces(p)
            assert len(faces) == len(subs)
            for f, h in zip(faces, subs):
                assert set(f.indices) | set(h.indices) == set(range(p.n_weights))
                assert not set(f.indices) & set(h.indices)


class TestRedundancy:
    def test_example1_collinear(self, ex1):
        ok, c = pr.redundancy_test(ex1, (0, 1, 2), "A", "redundant")
        assert ok
        pts = [ex1.points[i].free for i in (0, 1, 2)]
        assert all(x != 0 for x in c)
        assert all(sum(ci * p[j] for ci, p in zip(c, pts)) == 0 for j in range(2))

    def test_empty_always(self, ex1):
        for flavor in ("redundant", "positively_redundant"):
            ok, _ = pr.redundancy_test(ex1, (), "Q", flavor)
            assert ok

    def test_example3_positive(self, ex3):
        ok, c = pr.redundancy_test(ex3, (2, 3, 5), "Q", "positively_redundant")
        assert ok and all(x > 0 for x in c)
        q = ex3.weights
        assert all(sum(ci * q[i][j] for ci, i in zip(c, (2, 3, 5))) == 0 for j in range(2))

    def test_duality_laws(self):
        rng = random.Random(11)
        checked = 0
        for p in random_noncy_problems(17, 25):
            n = p.n_weights
            for _ in range(8):
                s = tuple(sorted(rng.sample(range(n), rng.randint(0, n))))
                comp = tuple(i for i in range(n) if i not in s)
                assert (
                    pr.redundancy_test(p, s, "A", "redundant")[0]
                    == pr.redundancy_test(p, comp, "Q", "saturated")[0]
                )
                assert (
                    pr.redundancy_test(p, s, "Q", "redundant")[0]
                    == pr.redundancy_test(p, comp, "A", "saturated")[0]
                )
                assert (
                    pr.redundancy_test(p, s, "Q", "positively_redundant")[0]
                    == pr.redundancy_test(p, comp, "A", "extremally_saturated")[0]
                )
                checked += 1
        assert checked == 200


class TestSubquotient:
    def test_trivial_pair(self, ex1):
        sq = pr.subquotient(ex1, (0, 1), (0, 1))
        assert sq.problem.n_weights == 0
        assert sq.problem.group.is_trivial

    def test_example3_restriction_is_flop(self, ex3):
        h1 = [h for h in pr.relevant_subspaces(ex3) if h.dim == 1][0]
        sub = pr.restriction_to_subspace(ex3, h1)
        assert sub.problem.n_weights == 3
        assert sorted(sub.problem.weights) == [(-1,), (1,), (1,)]
        quot = pr.quotient_by_subspace(ex3, h1)
        assert quot.problem.n_weights == 4
        assert sorted(quot.problem.weights) == [(-1,), (-1,), (1,), (1,)]

    def test_example1_face_problem_rank(self, ex1):
        f = [f for f in pr.minimal_faces(ex1) if f.indices == (0, 1, 2)][0]
        sub = pr.face_problem(ex1, f)
        assert sub.problem.k == 2
        assert [p.free for p in sub.problem.points] == [(1,), (2,), (3,)]
        from secfan.stacky import minimal_phase_rank

        assert minimal_phase_rank(sub.problem) == 1

    def test_nested_composition(self, ex1):
        a = pr.subquotient(ex1, (0,), (0, 1, 2, 3))
        b = pr.subquotient(a.problem, (0,), (0, 1, 2))
        direct = pr.subquotient(ex1, (0, 1), (0, 1, 2, 3))
        assert b.problem.Q == direct.problem.Q
        assert b.problem.group == direct.problem.group
        assert [p.free for p in b.problem.points] == [
            p.free for p in direct.problem.points
        ]

    def test_non_nested_rejected(self, ex1):
        with pytest.raises(ValueError):
            pr.subquotient(ex1, (0, 3), (0, 1))

    def test_torsion_quotient(self, ex2_deleted):
        sq = pr.subquotient(ex2_deleted, (2, 3), (0, 1, 2, 3))
        assert sq.problem.group == FgAbelianGroup(0, (6,))
