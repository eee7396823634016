"""Toric GIT problems: weight matrices, derived lattice data, faces, subquotients.

A GitProblem is the exact sequence  L --Q^T--> Z^N --A--> N  presented by the
k x N weight matrix Q (columns q_i) together with the finitely generated group
N and the images atil_i of the coordinate vectors.  Problems built from a
point configuration may have non-surjective A: the group is then the
saturation of the lattice the points generate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import intlinalg as la
from .geometry import (
    Polytope,
    convex_hull,
    dot,
    faces_of,
    integerize,
    pt,
    rational_kernel,
    vsub,
)
from .intlinalg import FgAbelianGroup, IntMatrix, matrix
from .linprog import Infeasible, lp_solve


@dataclass(frozen=True)
class LatticePoint:
    """Element of N = Z^r + sum Z/f: free coordinates plus torsion residues."""

    free: tuple[int, ...]
    torsion: tuple[int, ...] = ()


@dataclass(frozen=True)
class GitProblem:
    """Immutable toric GIT problem.

    Q: k x N integer weight matrix, columns are the weights q_i.
    group: the target N of the point map (may strictly contain the subgroup
    the points generate, for point-configuration inputs).
    points: atil_i in N.  det_v: sum of the weights.
    """

    Q: IntMatrix
    group: FgAbelianGroup
    points: tuple[LatticePoint, ...]

    @property
    def k(self) -> int:
        return len(self.Q)

    @property
    def n_weights(self) -> int:
        return len(self.points)

    @property
    def weights(self) -> list[tuple[int, ...]]:
        return la.columns(self.Q) if self.k else [() for _ in range(self.n_weights)]

    @property
    def det_v(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.Q)

    @property
    def free_rank(self) -> int:
        return self.group.free_rank

    def free_points(self) -> list[tuple[int, ...]]:
        return [p.free for p in self.points]

    def key(self):
        return (self.Q, self.group, self.points)

    # -- basic predicates ---------------------------------------------------

    def is_calabi_yau(self) -> bool:
        return all(x == 0 for x in self.det_v)

    def pi_polytope(self) -> Polytope:
        """Pi = conv(0, a_1..a_N) in the free part of N."""
        r = self.free_rank
        pts = [tuple(Fraction(0) for _ in range(r))] + [pt(p.free) for p in self.points]
        return convex_hull(pts)

    def __repr__(self):
        return f"GitProblem(k={self.k}, N={self.n_weights}, group={self.group})"


def _group_points_from_cokernel(ck: la.CokernelResult, n: int) -> list[LatticePoint]:
    out = []
    for j in range(n):
        e = tuple(1 if i == j else 0 for i in range(n))
        free, tors = ck.project(e)
        out.append(LatticePoint(free, tors))
    return out


def from_weights(q_rows) -> GitProblem:
    """Build a problem from the k x N weight matrix (columns = weights).

    Requires rank k (finite cokernel) and no zero weight column.
    """
    q = matrix(q_rows)
    k, n = la.shape(q)
    if k and la.rank(q) != k:
        raise ValueError("coker(Q) not finite")
    for j, col in enumerate(la.columns(q)):
        if all(x == 0 for x in col):
            raise ValueError("zero weight not supported")
    qdual = la.transpose(q)  # N x k
    ck = la.cokernel(qdual if k else la.zeros(n, 0))
    points = _group_points_from_cokernel(ck, n)
    prob = GitProblem(q, ck.group, tuple(points))
    _check_exactness(prob)
    return prob


def from_points(point_rows) -> GitProblem:
    """Build a problem from N lattice points (rows); Q is a kernel presentation.

    The group is the saturation of the lattice the points generate, so the
    configuration keeps its stacky meaning even when the span is proper.
    """
    pts_in = [tuple(int(x) for x in row) for row in point_rows]
    if not pts_in:
        raise ValueError("need at least one point")
    d = len(pts_in[0])
    n = len(pts_in)
    pmat = matrix([[p[i] for p in pts_in] for i in range(d)])  # d x N
    kernel = la.kernel_basis(pmat)
    q = matrix([[col[j] for j in range(n)] for col in [list(c) for c in kernel]]) if kernel else la.zeros(0, n)
    # saturated lattice the points generate
    nonzero = [p for p in pts_in if any(p)]
    if nonzero:
        span = la.from_columns([tuple(p) for p in nonzero], d)
        # independent columns only
        basis_cols = []
        for col in la.columns(span):
            cand = basis_cols + [col]
            if la.rank(la.from_columns(cand, d)) == len(cand):
                basis_cols.append(col)
        sat = la.saturation(la.from_columns(basis_cols, d))
        sat_cols = la.columns(sat)
    else:
        sat_cols = []
    r = len(sat_cols)
    coords = []
    for p in pts_in:
        if r:
            sol = la.solve_rational([[Fraction(c[i]) for c in sat_cols] for i in range(d)], [Fraction(x) for x in p])
            assert sol is not None and all(x.denominator == 1 for x in sol)
            coords.append(LatticePoint(tuple(int(x) for x in sol), ()))
        else:
            coords.append(LatticePoint((), ()))
    prob = GitProblem(q, FgAbelianGroup(r), tuple(coords))
    if prob.k:
        for j, col in enumerate(la.columns(prob.Q)):
            if all(x == 0 for x in col):
                raise ValueError("zero weight not supported")
    _check_exactness(prob)
    return prob


def _check_exactness(p: GitProblem):
    """A . Q^T = 0 over the free part and rank(Abar) = N - k."""
    n, k, r = p.n_weights, p.k, p.free_rank
    if n == 0:
        return
    abar = matrix([[p.points[j].free[i] for j in range(n)] for i in range(r)]) if r else la.zeros(0, n)
    if k and r:
        prod = la.mat_mul(abar, la.transpose(p.Q))
        assert all(all(x == 0 for x in row) for row in prod), "points not orthogonal to weights"
    if r:
        assert la.rank(abar) == min(r, n), "point matrix rank deficient"
    assert r == n - k, "rank count violates exactness"


def is_calabi_yau(p: GitProblem) -> bool:
    return p.is_calabi_yau()


def associated_cy(p: GitProblem) -> GitProblem:
    """Append the weight -det V; the result is Calabi-Yau."""
    if p.is_calabi_yau():
        raise ValueError("already Calabi-Yau")
    dv = p.det_v
    rows = [tuple(row) + (-dv[i],) for i, row in enumerate(p.Q)]
    return from_weights(rows)


def delete_weight(p: GitProblem, index: int) -> GitProblem:
    """Drop the given weight column from a CY problem (1-based: no; 0-based)."""
    if not p.is_calabi_yau():
        raise ValueError("delete_weight requires a Calabi-Yau problem")
    if p.n_weights < 2:
        raise ValueError("need at least two weights")
    rows = [tuple(x for j, x in enumerate(row) if j != index) for row in p.Q]
    return from_weights(rows)


# ---------------------------------------------------------------------------
# redundancy and saturation tests


def _vectors(p: GitProblem, side: str):
    if side == "A":
        return [list(x.free) for x in p.points], p.free_rank
    if side == "Q":
        return [list(w) for w in p.weights], p.k
    raise ValueError("side must be 'A' or 'Q'")


def _generic_nonvanishing(basis, positions):
    """Integer combination of basis vectors nonzero in every listed position."""
    if not basis:
        return None
    lam = 1
    while True:
        comb = [0] * len(basis[0])
        mult = 1
        for b in basis:
            for i, x in enumerate(b):
                num = x.numerator if isinstance(x, Fraction) else x
                den = x.denominator if isinstance(x, Fraction) else 1
                comb[i] = comb[i] + mult * num * _lcm_scale(b) // den
            mult *= lam
        if all(comb[i] != 0 for i in positions):
            g = la.content(comb)
            return tuple(x // g for x in comb) if g else tuple(comb)
        lam += 1
        if lam > 10 * (len(basis) + 2) * (len(list(positions)) + 2) + 100:
            raise AssertionError("generic combination search exhausted")


def _lcm_scale(vec):
    from math import gcd

    den = 1
    for x in vec:
        d = x.denominator if isinstance(x, Fraction) else 1
        den = den * d // gcd(den, d)
    return den


def redundancy_test(p: GitProblem, subset, side: str, flavor: str):
    """Decide one of the four redundancy/saturation flavors, with certificate.

    Returns (bool, certificate): for the redundancy flavors the certificate is
    a coefficient vector over the subset; for the saturation flavors it is an
    integer functional.
    """
    s = sorted(set(subset))
    vecs, dim = _vectors(p, side)
    if flavor == "redundant":
        if not s:
            return True, ()
        if dim == 0:
            return True, tuple(1 for _ in s)
        sub = [vecs[i] for i in s]
        cols = matrix([[sub[j][i] for j in range(len(s))] for i in range(dim)]) if dim else la.zeros(0, len(s))
        ker = la.kernel_basis(cols)
        if not ker:
            return False, None
        full_rank = la.rank(cols)
        for j in range(len(s)):
            drop = [sub[t] for t in range(len(s)) if t != j]
            dcols = matrix([[drop[t][i] for t in range(len(drop))] for i in range(dim)]) if dim else la.zeros(0, len(drop))
            if la.rank(dcols) != full_rank:
                return False, None
        comb = _generic_nonvanishing([list(map(Fraction, k)) for k in ker], range(len(s)))
        assert comb is not None
        return True, comb
    if flavor == "positively_redundant":
        if not s:
            return True, ()
        ncols = len(s)
        a_eq = [[vecs[i][d] for i in s] for d in range(dim)]
        b_eq = [0] * dim
        a_ub = [[-(1 if i == j else 0) for i in range(ncols)] for j in range(ncols)]
        b_ub = [-1] * ncols  # c_i >= 1
        try:
            x, _ = lp_solve([0] * ncols, a_ub, b_ub, a_eq, b_eq)
        except Infeasible:
            return False, None
        den = _lcm_scale(x)
        return True, tuple(int(v * den) for v in x)
    if flavor in ("saturated", "extremally_saturated"):
        comp = [i for i in range(p.n_weights) if i not in s]
        sub = [vecs[i] for i in s]
        if flavor == "saturated":
            # l with l(v_i)=0 on s, l(v_j)!=0 off s
            perp = rational_kernel(sub) if sub else [
                tuple(Fraction(1 if j == i else 0) for j in range(dim)) for i in range(dim)
            ]
            if dim == 0:
                return (not comp), (() if not comp else None)
            if not perp:
                return (not comp), (tuple(0 for _ in range(dim)) if not comp else None)
            vals = [[dot(pv, vecs[j]) for pv in perp] for j in comp]
            for j, row in zip(comp, vals):
                if all(v == 0 for v in row):
                    return False, None
            # generic combination of perp nonzero on every comp position
            combs = [[dot(pv, vecs[j]) for j in comp] for pv in perp]
            lam = 1
            while True:
                acc = [Fraction(0)] * len(comp)
                accl = [Fraction(0)] * dim
                mult = Fraction(1)
                for pv, cv in zip(perp, combs):
                    acc = [a + mult * c for a, c in zip(acc, cv)]
                    accl = [a + mult * c for a, c in zip(accl, pv)]
                    mult *= lam
                if all(a != 0 for a in acc):
                    return True, integerize(accl)
                lam += 1
        else:
            # l with l(v_i)=0 on s, l(v_j) >= 1 off s
            a_eq = [list(map(int, v)) for v in sub]
            b_eq = [0] * len(sub)
            a_ub = [[-x for x in vecs[j]] for j in comp]
            b_ub = [-1] * len(comp)
            if dim == 0:
                return (not comp), (() if not comp else None)
            try:
                x, _ = lp_solve([0] * dim, a_ub, b_ub, a_eq, b_eq)
            except Infeasible:
                return False, None
            return True, integerize(x)
    raise ValueError(f"unknown flavor {flavor!r}")


# ---------------------------------------------------------------------------
# faces of Pi and minimal faces


@dataclass(frozen=True)
class Face:
    """Face of Pi = conv(0, a_i) through the origin.

    indices is the set {i : a_i in F}; witness is a linear integer functional
    >= 0 on Pi vanishing exactly on the face.
    """

    indices: tuple[int, ...]
    witness: tuple[int, ...]
    polytope: Polytope

    def key(self):
        return self.indices


_FACES_CACHE: dict = {}


def origin_faces(p: GitProblem) -> list[Face]:
    """All faces of Pi containing the origin, with linear witnesses."""
    hit = _FACES_CACHE.get(p.key())
    if hit is not None:
        return hit
    r = p.free_rank
    origin = tuple(Fraction(0) for _ in range(r))
    pi = p.pi_polytope()
    out = []
    seen = set()
    for sub, (nrm, off) in faces_of(pi):
        if origin not in sub.vertices and not sub.contains(origin):
            continue
        # linear witness: sum of active facet functionals through 0
        active = [
            (n2, o2) for (n2, o2) in pi.facets
            if o2 == 0 and all(dot(n2, v) + o2 == 0 for v in sub.vertices)
        ]
        lin = tuple(sum(a[i] for a, _ in active) for i in range(r))
        idx = tuple(
            i for i, q in enumerate(p.points)
            if dot(lin, q.free) == 0 and sub.contains(q.free)
        )
        if idx in seen:
            continue
        # face must be exactly the zero set of the witness on Pi
        if any(dot(lin, v) != 0 for v in sub.vertices):
            continue
        seen.add(idx)
        g = la.content(lin)
        lin = tuple(x // g for x in lin) if g else lin
        out.append(Face(idx, lin, sub))
    out.sort(key=lambda f: (len(f.indices), f.indices))
    _FACES_CACHE[p.key()] = out
    return out


_MINIMAL_CACHE: dict = {}


def minimal_faces(p: GitProblem) -> list[Face]:
    """Faces of Pi whose index set admits an all-nonzero vanishing combination."""
    hit = _MINIMAL_CACHE.get(p.key())
    if hit is not None:
        return hit
    out = []
    for f in origin_faces(p):
        ok, _ = redundancy_test(p, f.indices, "A", "redundant")
        if ok:
            out.append(f)
    out.sort(key=lambda f: (len(f.indices), f.indices))
    _MINIMAL_CACHE[p.key()] = out
    return out


@dataclass(frozen=True)
class RelevantSubspace:
    """Weight-supported subspace H with [N]_H positively redundant and saturated."""

    indices: tuple[int, ...]
    basis: tuple[tuple[int, ...], ...]
    face_indices: tuple[int, ...]
    positive_certificate: tuple[int, ...]
    saturating_functional: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)


def relevant_subspaces(p: GitProblem) -> list[RelevantSubspace]:
    """One subspace per minimal face, via complementary index sets."""
    out = []
    for f in minimal_faces(p):
        h_idx = tuple(i for i in range(p.n_weights) if i not in f.indices)
        ok_pos, cert = redundancy_test(p, h_idx, "Q", "positively_redundant")
        ok_sat, func = redundancy_test(p, h_idx, "Q", "saturated")
        assert ok_pos and ok_sat, "face/subspace duality violated"
        vecs = [p.weights[i] for i in h_idx]
        basis = []
        for v in vecs:
            cand = basis + [v]
            if la.rank(matrix(cand)) == len(cand):
                basis.append(v)
        out.append(
            RelevantSubspace(
                indices=h_idx,
                basis=tuple(basis),
                face_indices=f.indices,
                positive_certificate=cert if cert is not None else (),
                saturating_functional=func if func is not None else tuple(0 for _ in range(p.k)),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Coulomb-Higgs subquotient problems


@dataclass(frozen=True)
class IndexPairProblem:
    """The GIT problem on indices gamma2 - gamma1 with lattices L_g2/L_g1 -> N_g2/N_g1."""

    parent_key: tuple
    gamma1: tuple[int, ...]
    gamma2: tuple[int, ...]
    problem: GitProblem
    index_map: tuple[int, ...]  # derived column j <-> parent index index_map[j]
    stab_basis: tuple  # basis of L_g2/L_g1 in parent L coordinates; the rows of
    # the projection from the parent stability space onto the derived one

    def project_stability(self, c):
        """Image of a parent stability point in the derived problem's space."""
        return tuple(sum(Fraction(b[i]) * x for i, x in enumerate(c)) for b in self.stab_basis)


def _l_gamma_basis(p: GitProblem, gamma) -> list[tuple[int, ...]]:
    """Basis of L_Gamma = {t in Z^k : (Q^T t)_j = 0 for j outside Gamma}."""
    comp = [j for j in range(p.n_weights) if j not in gamma]
    if p.k == 0:
        return []
    if not comp:
        return la.columns(la.identity(p.k))
    rows = matrix([list(p.weights[j]) for j in comp])
    return la.kernel_basis(rows)


_SUBQ_CACHE: dict = {}


def subquotient(p: GitProblem, gamma1, gamma2) -> IndexPairProblem:
    """Coulomb-Higgs problem for nested index sets gamma1 <= gamma2 <= [N]."""
    g1 = tuple(sorted(set(gamma1)))
    g2 = tuple(sorted(set(gamma2)))
    if not set(g1) <= set(g2):
        raise ValueError("gamma1 must be contained in gamma2")
    if any(i < 0 or i >= p.n_weights for i in g2):
        raise ValueError("index out of range")
    key = (p.key(), g1, g2)
    hit = _SUBQ_CACHE.get(key)
    if hit is not None:
        return hit
    mid = tuple(j for j in g2 if j not in g1)
    if not g1 and len(g2) == p.n_weights:
        ident = tuple(tuple(1 if i == j else 0 for i in range(p.k)) for j in range(p.k))
        res = IndexPairProblem(p.key(), g1, g2, p, mid, ident)
        _SUBQ_CACHE[key] = res
        return res

    # M-side: weights of e_j on L'' = L_g2 / L_g1
    b1 = _l_gamma_basis(p, g1)
    b2 = _l_gamma_basis(p, g2)
    if b2:
        m2 = la.from_columns(b2, p.k)
        coords1 = []
        for v in b1:
            sol = la.solve_integer(m2, v)
            assert sol is not None, "L_gamma1 not inside L_gamma2"
            coords1.append(sol)
        if coords1:
            s = la.smith_normal_form(la.from_columns(coords1, len(b2)))
            assert all(d in (0, 1) for d in s.diagonal), "quotient of saturated kernels has torsion"
            comp_cols = la.columns(s.Uinv)[s.rank:]
            lbasis = [la.mat_vec(m2, c) for c in comp_cols]
        else:
            lbasis = b2
    else:
        lbasis = []
    kk = len(lbasis)
    qrows = []
    for b in lbasis:
        qt = la.mat_vec(la.transpose(p.Q), b) if p.k else tuple(0 for _ in range(p.n_weights))
        qrows.append(tuple(qt[j] for j in mid))
    q = matrix(qrows) if qrows else la.zeros(0, len(mid))

    # N-side: N_g2 / N_g1 inside the ambient group
    r, tors = p.group.free_rank, p.group.invariant_factors
    t = len(tors)
    amb = r + t

    def lift(lp: LatticePoint):
        return tuple(lp.free) + tuple(lp.torsion)

    lam0 = [tuple((tors[i] if j == r + i else 0) for j in range(amb)) for i in range(t)]
    gens2 = [lift(p.points[i]) for i in g2] + lam0
    gens1 = [lift(p.points[i]) for i in g1] + lam0
    if amb == 0:
        group = FgAbelianGroup(0)
        pts = [LatticePoint((), ()) for _ in mid]
    else:
        img2 = la.image_basis(la.from_columns(gens2, amb)) if gens2 else []
        if not img2:
            group = FgAbelianGroup(0)
            pts = [LatticePoint((), ()) for _ in mid]
        else:
            bmat = la.from_columns(img2, amb)
            in2 = []
            for v in gens1:
                sol = la.solve_integer(bmat, v)
                assert sol is not None
                in2.append(sol)
            rel = la.from_columns(in2, len(img2)) if in2 else la.zeros(len(img2), 0)
            ck = la.cokernel(rel)
            group = ck.group
            pts = []
            for i in mid:
                sol = la.solve_integer(bmat, lift(p.points[i]))
                assert sol is not None
                free, trs = ck.project(sol)
                pts.append(LatticePoint(free, trs))
    assert group.free_rank == len(mid) - kk, "derived sequence rank mismatch"
    prob = GitProblem(q, group, tuple(pts))
    res = IndexPairProblem(p.key(), g1, g2, prob, mid, tuple(tuple(b) for b in lbasis))
    _SUBQ_CACHE[key] = res
    return res


def face_problem(p: GitProblem, face: Face) -> IndexPairProblem:
    """Problem on the points inside a face: pair (empty, [N]_F)."""
    return subquotient(p, (), face.indices)


def quotient_by_face(p: GitProblem, face_indices) -> IndexPairProblem:
    """Problem on the complementary weights: pair ([N]_F, [N]).

    This is the restriction of the weights to the partner subspace; the SOD
    component attached to the face is its minimal phase.
    """
    return subquotient(p, tuple(face_indices), tuple(range(p.n_weights)))


def restriction_to_subspace(p: GitProblem, h: RelevantSubspace) -> IndexPairProblem:
    """Weights inside H, in the lattice L^v cap H: same as quotient_by_face."""
    return subquotient(p, h.face_indices, tuple(range(p.n_weights)))


def quotient_by_subspace(p: GitProblem, h: RelevantSubspace) -> IndexPairProblem:
    """Z^N / Z^{[N]_H} -> L^v/(L^v cap H): the problem on the partner face."""
    return subquotient(p, (), h.face_indices)


def span_restriction(p: GitProblem, span_basis) -> IndexPairProblem:
    """Restriction problem for an arbitrary weight-supported subspace span.

    span_basis: integer vectors spanning H; the restriction keeps the weights
    inside H with stability lattice L^v cap H.
    """
    rows = [list(b) for b in span_basis]
    inside = []
    for i, w in enumerate(p.weights):
        aug = rows + [list(w)]
        if not rows:
            ok = all(x == 0 for x in w)
        else:
            ok = la.rank(matrix(aug)) == la.rank(matrix(rows))
        if ok:
            inside.append(i)
    outside = tuple(i for i in range(p.n_weights) if i not in inside)
    return subquotient(p, outside, tuple(range(p.n_weights)))


def projection_to_face_problem(p: GitProblem, face_indices):
    """Integer projection matrix pi: L^v -> (L_Gamma)^v for the face problem.

    Rows applied to a stability vector c give its image in the face problem's
    stability space (coordinates dual to subquotient's L_Gamma basis).
    """
    sub = subquotient(p, (), tuple(sorted(set(face_indices))))
    if not sub.stab_basis:
        return la.zeros(0, p.k), sub
    return matrix([list(b) for b in sub.stab_basis]), sub
