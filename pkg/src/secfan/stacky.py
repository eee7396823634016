"""Stacky fans of chambers, stacky volumes, and minimal-phase ranks.

The stacky volume of a chamber's fan is the torsion order of the group times
the normalized volume of the union of its marked simplices; it equals the rank
of K0 of the corresponding phase.  minimal_phase_rank has an independent
oracle based on the region cone(a_i) minus (conv(a_i) + cone(a_i)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import intlinalg as la
from .fan import GkzFan, build_fan, minimal_chambers
from .geometry import (
    affine_rank,
    convex_hull,
    det_int,
    dot,
    normalized_volume,
    pt,
    vsub,
)
from .problem import GitProblem, LatticePoint, subquotient
from .subdivision import BASE, subdivision_of_chamber


@dataclass(frozen=True)
class StackySimplex:
    """One marked simplex: the origin plus marker points, with their indices."""

    marker_indices: tuple[int, ...]
    markers: tuple[LatticePoint, ...]


@dataclass(frozen=True)
class StackyFan:
    problem_key: tuple
    group: object  # FgAbelianGroup of the ambient N
    simplices: tuple[StackySimplex, ...]

    @property
    def cones(self):
        return [tuple(m.free for m in s.markers) for s in self.simplices]


def stacky_fan_of_chamber(fan: GkzFan, chamber) -> StackyFan:
    """Cones over base-marked cells with their vertex markers."""
    p = fan.problem
    t = subdivision_of_chamber(fan, chamber)
    simplices = []
    for cell in t.base_cells():
        marks = sorted(m for m in cell.marking if m != BASE)
        origin = tuple(Fraction(0) for _ in range(p.free_rank))
        assert origin in cell.vertices, "base-marked cell must touch the origin"
        nonzero = [v for v in cell.vertices if v != origin]
        by_vertex = {}
        for m in marks:
            v = pt(p.points[m].free)
            by_vertex.setdefault(v, []).append(m)
        assert sorted(by_vertex) == sorted(nonzero), "marking does not match vertices"
        assert all(len(v) == 1 for v in by_vertex.values()), "chamber cell multi-marked"
        idx = tuple(by_vertex[v][0] for v in sorted(nonzero))
        simplices.append(StackySimplex(idx, tuple(p.points[i] for i in idx)))
    simplices.sort(key=lambda s: s.marker_indices)
    return StackyFan(p.key(), p.group, tuple(simplices))


def stacky_volume(sf: StackyFan) -> int:
    """Torsion order times the normalized volume of the marked simplices."""
    tors = sf.group.torsion_order
    r = sf.group.free_rank
    total = 0
    for s in sf.simplices:
        vecs = [list(m.free) for m in s.markers]
        if len(vecs) != r:
            raise ValueError("non-simplicial stacky cone")
        total += abs(det_int(vecs)) if r else 1
    if not sf.simplices:
        total = 1 if r == 0 else 0
    return tors * total


def restricted_rank(p: GitProblem, sf: StackyFan, face_indices) -> int:
    """rank K0 of the fan restricted to a face: volumes in the face sublattice.

    Simplices are cut down to their markers inside the face; volumes are taken
    in the subgroup generated by the face's points, whose torsion multiplies.
    """
    face_set = set(face_indices)
    sub = subquotient(p, (), tuple(sorted(face_set)))
    grp = sub.problem.group
    back = {orig: j for j, orig in enumerate(sub.index_map)}
    r = grp.free_rank
    total = 0
    seen = set()
    for s in sf.simplices:
        inside = tuple(i for i in s.marker_indices if i in face_set)
        if len(inside) != r:
            continue
        coords = [list(sub.problem.points[back[i]].free) for i in inside]
        vol = abs(det_int(coords)) if r else 1
        if vol == 0:
            continue
        key = tuple(sorted(inside))
        if key in seen:
            continue  # distinct parent simplices can share a face
        seen.add(key)
        total += vol
    if r == 0:
        total = 1
    return grp.torsion_order * total


_MPR_CACHE: dict = {}


def minimal_phase_rank(p: GitProblem) -> int:
    """rank K0 of the minimal phase: stacky volume of a minimal chamber, 0 if empty."""
    hit = _MPR_CACHE.get(p.key())
    if hit is not None:
        return hit
    fan = build_fan(p)
    mins = minimal_chambers(fan)
    if not mins:
        res = 0
    else:
        res = stacky_volume(stacky_fan_of_chamber(fan, mins[0]))
    _MPR_CACHE[p.key()] = res
    return res


def wall_phase_rank(fan: GkzFan, chamber) -> int:
    return stacky_volume(stacky_fan_of_chamber(fan, chamber))


# ---------------------------------------------------------------------------
# oracle: region between the point cone and the shifted hull


def _polyhedron_facets(points, ambient_rays):
    """H-representation of conv(points) + cone(ambient_rays), brute force."""
    pts = [pt(x) for x in points]
    rays = [pt(r) for r in ambient_rays if any(r)]
    d = len(pts[0])
    import itertools as it

    from .geometry import integerize, rational_kernel

    cands = {}
    items = [("p", x) for x in pts] + [("r", r) for r in rays]
    for sub in it.combinations(range(len(items)), d):
        chosen = [items[i] for i in sub]
        base = next((x for kind, x in chosen if kind == "p"), None)
        if base is None:
            continue
        rows = []
        for kind, x in chosen:
            if kind == "p":
                if x != base:
                    rows.append(vsub(x, base))
            else:
                rows.append(x)
        if len(rows) != d - 1:
            continue
        normals = rational_kernel(rows) if rows else []
        if d == 1:
            normals = [(Fraction(1),)]
        for nv in normals:
            if all(x == 0 for x in nv):
                continue
            nn = integerize(nv)
            off = -dot(nn, base)
            vals_p = [dot(nn, x) + off for x in pts]
            vals_r = [dot(nn, r) for r in rays]
            if all(v >= 0 for v in vals_p) and all(v >= 0 for v in vals_r):
                cands[(nn, off)] = True
            elif all(v <= 0 for v in vals_p) and all(v <= 0 for v in vals_r):
                cands[(tuple(-x for x in nn), -off)] = True
    return list(cands.keys())


def _intersect_volume(facets_a, facets_b, lattice_basis, dim):
    """Volume of the (bounded) intersection of two H-represented polyhedra."""
    import itertools as it

    from .geometry import affine_rank

    cons = list(facets_a) + list(facets_b)
    verts = {}
    for sub in it.combinations(range(len(cons)), dim):
        rows = [[Fraction(x) for x in cons[i][0]] for i in sub]
        rhs = [-Fraction(cons[i][1]) for i in sub]
        sol = la.solve_rational(rows, rhs)
        if sol is None:
            continue
        if all(dot(nn, sol) + off >= 0 for nn, off in cons):
            verts[sol] = True
    if not verts:
        return Fraction(0)
    vlist = sorted(verts)
    if affine_rank(vlist) < dim:
        return Fraction(0)
    return normalized_volume(convex_hull(vlist), lattice_basis)


def minimal_phase_rank_oracle(p: GitProblem) -> int:
    """Independent computation: |N_tors| x vol(cone(a) minus (conv(a) + cone(a))).

    The region is star-shaped from the origin, and every facet of
    P = conv(a) + cone(a) with negative offset (strictly separating the
    origin) is bounded with vertices among the a_i; the region is the
    disjoint-interior union of the pyramids over those facets.  Facets through
    the origin contribute nothing.  This stays exact without any bounding box;
    the bounded variant (inside conv(0, M a_i), doubling M as a capture check)
    is kept for low-dimensional cross-checks.
    """
    r = p.free_rank
    tors = p.group.torsion_order
    pts = [pt(q.free) for q in p.points]
    if r == 0:
        return tors if p.n_weights == 0 else 0
    facets = _polyhedron_facets(pts, pts)
    total = Fraction(0)
    origin = tuple(Fraction(0) for _ in range(r))
    for nn, off in facets:
        if off >= 0:
            continue  # origin not cut off by this facet
        tight = [x for x in pts if dot(nn, x) + off == 0]
        pyramid = [origin] + tight
        total += normalized_volume(
            convex_hull(pyramid),
            [tuple(1 if i == j else 0 for i in range(r)) for j in range(r)],
        )
    assert total.denominator == 1
    return tors * int(total)


def minimal_phase_rank_oracle_bounded(p: GitProblem, scale=None) -> int:
    """The bounded form of the oracle: measured inside conv(0, M a_i), M = N+1.

    Recomputed at 2M; a mismatch means the region escaped the bound and
    raises.  Exponential vertex enumeration limits this to small free rank;
    it backs an extra cross-check of the facet-pyramid oracle in tests.
    """
    r = p.free_rank
    tors = p.group.torsion_order
    pts = [pt(q.free) for q in p.points]
    if r == 0:
        return tors if p.n_weights == 0 else 0

    def region_volume(m):
        bound = [tuple(Fraction(0) for _ in range(r))] + [
            tuple(Fraction(m) * x for x in q) for q in pts
        ]
        bpoly = convex_hull(bound)
        if affine_rank(bpoly.vertices) < r:
            return Fraction(0)
        upper = _polyhedron_facets(pts, pts)
        basis = [tuple(1 if i == j else 0 for i in range(r)) for j in range(r)]
        vol_b = normalized_volume(bpoly, basis)
        vol_cut = _intersect_volume(bpoly.facets, upper, basis, r)
        return vol_b - vol_cut

    m = scale if scale is not None else p.n_weights + 1
    v1 = region_volume(m)
    v2 = region_volume(2 * m)
    if v1 != v2:
        raise AssertionError("oracle bounding region not captured")
    assert v1.denominator == 1
    return tors * int(v1)
