"""Exact rational polyhedral geometry.

Points are tuples of Fractions, normals are content-reduced integer tuples.
Scope is desk-sized instances (dimension <= ~6, <= ~40 constraints), so hulls
and vertex enumeration are brute force over subsets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .intlinalg import (
    FgAbelianGroup,
    content,
    matrix,
    primitive_vector,
    rank,
    solve_rational,
)
from .linprog import Infeasible, lp_solve, strict_interior_point

Point = tuple[Fraction, ...]


def pt(coords) -> Point:
    return tuple(Fraction(x) for x in coords)


def vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vscale(s, a):
    return tuple(s * x for x in a)


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def is_zero(v) -> bool:
    return all(x == 0 for x in v)


def integerize(v) -> tuple[int, ...]:
    """Scale a rational vector to a content-reduced integer vector."""
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    w = tuple(int(x * den) for x in v)
    g = content(w)
    return tuple(x // g for x in w) if g else w


def canonical_normal(v) -> tuple[int, ...]:
    """Content-reduced with first nonzero entry positive."""
    w = integerize(tuple(Fraction(x) for x in v))
    for x in w:
        if x > 0:
            return w
        if x < 0:
            return tuple(-y for y in w)
    return w


def affine_rank(points) -> int:
    """Dimension of the affine hull."""
    points = list(points)
    if not points:
        return -1
    base = points[0]
    diffs = [vsub(p, base) for p in points[1:]]
    if not diffs:
        return 0
    num = [integerize(tuple(Fraction(x) for x in d)) if any(d) else tuple(0 for _ in d) for d in diffs]
    return rank(matrix(num))


def rational_kernel(rows) -> list[tuple[Fraction, ...]]:
    """Basis of {x : rows @ x = 0} over the rationals."""
    rows = [list(r) for r in rows]
    if not rows:
        return []
    n = len(rows[0])
    a = [[Fraction(x) for x in r] for r in rows]
    piv_cols = []
    r_i = 0
    for col in range(n):
        piv = next((i for i in range(r_i, len(a)) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r_i], a[piv] = a[piv], a[r_i]
        inv = a[r_i][col]
        a[r_i] = [x / inv for x in a[r_i]]
        for i in range(len(a)):
            if i != r_i and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r_i])]
        piv_cols.append(col)
        r_i += 1
    free_cols = [c for c in range(n) if c not in piv_cols]
    basis = []
    for fc in free_cols:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(piv_cols):
            v[pc] = -a[i][fc]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True)
class Polytope:
    """Convex polytope given by its (irredundant) vertices.

    facets are affine inequalities (normal, offset) with normal . x + offset >= 0
    valid on the polytope and tight on the facet; integer, content-reduced.
    """

    vertices: tuple[Point, ...]
    facets: tuple[tuple[tuple[int, ...], int], ...] = field(default=())

    @property
    def ambient_dim(self) -> int:
        return len(self.vertices[0]) if self.vertices else 0

    @property
    def dim(self) -> int:
        return affine_rank(self.vertices)

    def contains(self, x) -> bool:
        x = pt(x)
        # inside iff x is a convex combination of vertices
        vs = self.vertices
        if not vs:
            return False
        n = len(vs)
        a_eq = []
        b_eq = []
        for j in range(len(x)):
            a_eq.append([vs[i][j] for i in range(n)])
            b_eq.append(x[j])
        a_eq.append([1] * n)
        b_eq.append(1)
        a_ub = [[-(1 if i == j else 0) for i in range(n)] for j in range(n)]
        b_ub = [0] * n
        try:
            lp_solve([0] * n, a_ub, b_ub, a_eq, b_eq)
            return True
        except Infeasible:
            return False


def _fulldim_facets(ypoints, d):
    """Facet inequalities of a full-dimensional hull in R^d (normal, offset)."""
    out = {}
    n = len(ypoints)
    for sub in itertools.combinations(range(n), d):
        base = ypoints[sub[0]]
        diffs = [vsub(ypoints[i], base) for i in sub[1:]]
        normals = rational_kernel(diffs) if diffs else [
            tuple(Fraction(1 if j == i else 0) for j in range(d)) for i in range(d)
        ]
        for nv in normals:
            if is_zero(nv):
                continue
            nn = integerize(nv)
            off = -dot(nn, base)
            vals = [dot(nn, p) + off for p in ypoints]
            if all(v >= 0 for v in vals):
                key = (nn, off)
            elif all(v <= 0 for v in vals):
                key = (tuple(-x for x in nn), -off)
            else:
                continue
            if any(v != 0 for v in vals):
                out[key] = True
    return list(out.keys())


def affine_span_basis(points):
    """(base point, integer direction basis) of the affine hull."""
    points = [pt(p) for p in points]
    base = points[0]
    bas = []
    for p in points[1:]:
        dv = vsub(p, base)
        if is_zero(dv):
            continue
        cand = bas + [integerize(dv)]
        if rank(matrix(cand)) == len(cand):
            bas.append(integerize(dv))
    return base, bas


def convex_hull(points) -> Polytope:
    """Vertices and facet inequalities of conv(points); exact.

    Facets are relative to the affine hull: inequalities valid on the polytope
    and tight exactly on a (dim-1)-face, lifted to ambient integer functionals.
    A 0-dimensional polytope has no facets.
    """
    points = [pt(p) for p in points]
    if not points:
        raise ValueError("need at least one point")
    uniq = sorted(set(points))
    base, bas = affine_span_basis(uniq)
    d = len(bas)
    if d == 0:
        return Polytope((uniq[0],), ())
    ycoords = lattice_coords([vsub(p, base) for p in uniq], bas)
    yfacets = _fulldim_facets(ycoords, d)
    verts = []
    for i, y in enumerate(ycoords):
        # vertex iff y maximizes some facet-complement; LP-free test:
        # y is a vertex iff it is tight on >= d facets of affinely independent normals
        tight_normals = [nn for nn, off in yfacets if dot(nn, y) + off == 0]
        if tight_normals and rank(matrix(tight_normals)) == d:
            verts.append(uniq[i])
    verts = tuple(sorted(verts))
    # lift facet functionals: solve B^T a = a' for each y-space facet normal
    bt = [[Fraction(b[i]) for b in bas] for i in range(len(base))]  # columns = bas
    btt = [[bt[i][j] for i in range(len(base))] for j in range(len(bas))]  # rows = bas
    facets = []
    for nn, off in yfacets:
        a = solve_rational(btt, [Fraction(x) for x in nn])
        assert a is not None
        c = Fraction(off) - dot(a, base)
        den = 1
        for x in list(a) + [c]:
            den = den * x.denominator // gcd(den, x.denominator)
        av = tuple(int(x * den) for x in a)
        cv = int(c * den)
        g = content(av + (cv,))
        if g:
            av = tuple(x // g for x in av)
            cv //= g
        facets.append((av, cv))
    return Polytope(verts, tuple(sorted(set(facets))))


def faces_of(p: Polytope):
    """All faces of all dimensions, each with a supporting affine functional.

    Returns a list of (Polytope, (normal, offset)); the polytope itself comes
    with the zero functional.  Faces are intersections of tight facet sets.
    """
    if not p.facets:
        full = convex_hull(p.vertices)
        if full.facets:
            p = full
    d = len(p.vertices[0]) if p.vertices else 0
    out = []
    seen = {}
    verts = p.vertices
    full_key = frozenset(range(len(verts)))
    out.append((p, (tuple(0 for _ in range(d)), 0)))
    seen[full_key] = True
    frontier = [full_key]
    facet_tight = []
    for nn, off in p.facets:
        facet_tight.append(frozenset(i for i, v in enumerate(verts) if dot(nn, v) + off == 0))
    while frontier:
        new_frontier = []
        for fk in frontier:
            for j, ft in enumerate(facet_tight):
                key = fk & ft
                if not key or key == fk or key in seen:
                    continue
                seen[key] = True
                new_frontier.append(key)
                sub = tuple(sorted(verts[i] for i in key))
                active = [
                    (nn, off)
                    for (nn, off), tight in zip(p.facets, facet_tight)
                    if key <= tight
                ]
                nsum = tuple(sum(a[k] for a, _ in active) for k in range(d))
                osum = sum(o for _, o in active)
                g = content(nsum + (osum,))
                if g:
                    nsum = tuple(x // g for x in nsum)
                    osum = osum // g
                out.append((Polytope(sub), (nsum, osum)))
        frontier = new_frontier
    return out


def lattice_coords(points, basis_cols):
    """Coordinates of each point in the given lattice basis (columns)."""
    out = []
    for x in points:
        sol = solve_rational([[Fraction(b[i]) for b in basis_cols] for i in range(len(x))], x)
        if sol is None:
            raise ValueError("point outside the lattice span")
        out.append(tuple(sol))
    return out


def _triangulate(vertices):
    """Simplices (as vertex tuples) triangulating conv(vertices)."""
    vertices = sorted(set(tuple(v) for v in vertices))
    d = affine_rank(vertices)
    if d <= 0:
        return [tuple(vertices[:1])]
    if len(vertices) == d + 1:
        return [tuple(vertices)]
    hull = convex_hull(vertices)
    base = hull.vertices[0]  # lex-lowest
    simplices = []
    for nn, off in hull.facets:
        if dot(nn, base) + off == 0:
            continue
        fverts = [v for v in hull.vertices if dot(nn, v) + off == 0]
        for s in _triangulate(fverts):
            simplices.append((base,) + s)
    return simplices


def normalized_volume(p: Polytope | list, lattice_basis=None) -> Fraction:
    """Euclidean volume times dim!, measured in the given direction lattice.

    lattice_basis: columns spanning the lattice of the polytope's affine-span
    directions; defaults to the standard lattice (requires a full-dimensional
    polytope).  A lattice polytope gets an integer volume.
    """
    verts = p.vertices if isinstance(p, Polytope) else [pt(v) for v in p]
    verts = sorted(set(verts))
    if affine_rank(verts) <= 0:
        return Fraction(0)
    if lattice_basis is None:
        d = len(verts[0])
        lattice_basis = [tuple(1 if i == j else 0 for i in range(d)) for j in range(d)]
    base = verts[0]
    coords = lattice_coords([vsub(v, base) for v in verts], lattice_basis)
    d = affine_rank([tuple(c) for c in coords])
    if d < len(lattice_basis):
        return Fraction(0)
    back = {v: c for v, c in zip(verts, coords)}
    total = Fraction(0)
    for simplex in _triangulate(verts):
        rows = [vsub(back[v], back[simplex[0]]) for v in simplex[1:]]
        total += abs(_det(rows))
    return total


def _det(rows):
    n = len(rows)
    a = [[Fraction(x) for x in r] for r in rows]
    if any(len(r) != n for r in a):
        raise ValueError("determinant of non-square matrix")
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = a[col][col]
        for i in range(col + 1, n):
            if a[i][col] != 0:
                f = a[i][col] / inv
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return det


def det_int(rows) -> int:
    d = _det(rows)
    assert d.denominator == 1
    return int(d)


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class Cone:
    """Polyhedral cone spanned by integer generators (possibly not pointed)."""

    generators: tuple[tuple[int, ...], ...]
    ambient_dim: int

    @property
    def dim(self) -> int:
        gens = [g for g in self.generators if any(g)]
        if not gens:
            return 0
        return rank(matrix(gens))

    def facet_data(self):
        """(equations, inequalities): integer functionals cutting out the cone.

        equations vanish on the cone's span; inequalities are facet normals
        (valid >= 0) within the span.  Cached lazily.
        """
        return _cone_facets(self.generators, self.ambient_dim)


_CONE_FACETS_CACHE: dict = {}


def _cone_facets(generators, ambient):
    key = (generators, ambient)
    hit = _CONE_FACETS_CACHE.get(key)
    if hit is not None:
        return hit
    gens = [g for g in generators if any(g)]
    eqs = [tuple(r) for r in _span_equations(gens, ambient)]
    ineqs = []
    d = rank(matrix(gens)) if gens else 0
    if d > 0:
        # facets of the cone within its span: supported on rank d-1 subsets
        cand = {}
        for sub in itertools.combinations(range(len(gens)), d - 1) if d > 1 else [()]:
            subg = [gens[i] for i in sub]
            normals = rational_kernel(subg + eqs) if (subg or eqs) else [
                tuple(Fraction(1 if j == i else 0) for j in range(ambient)) for i in range(ambient)
            ]
            for nv in normals:
                if is_zero(nv):
                    continue
                nn = integerize(nv)
                vals = [dot(nn, g) for g in gens]
                if all(v >= 0 for v in vals):
                    pass
                elif all(v <= 0 for v in vals):
                    nn = tuple(-x for x in nn)
                    vals = [-v for v in vals]
                else:
                    continue
                tight = [gens[i] for i, v in enumerate(vals) if v == 0]
                trank = rank(matrix(tight)) if tight else 0
                if d == 1 or trank == d - 1:
                    cand[nn] = True
        ineqs = list(cand.keys())
    res = (tuple(eqs), tuple(sorted(ineqs)))
    _CONE_FACETS_CACHE[key] = res
    return res


def _span_equations(gens, ambient):
    """Integer functionals vanishing exactly on span(gens)."""
    if not gens:
        return [tuple(1 if i == j else 0 for i in range(ambient)) for j in range(ambient)]
    return [integerize(v) for v in rational_kernel([list(g) for g in gens]) or []]


def cone_of(generators, ambient_dim=None) -> Cone:
    gens = [tuple(int(x) for x in g) for g in generators]
    if ambient_dim is None:
        if not gens:
            raise ValueError("need ambient_dim for the trivial cone")
        ambient_dim = len(gens[0])
    gens = [g for g in gens if any(g)]
    uniq = sorted(set(primitive_vector(g) for g in gens))
    return Cone(tuple(uniq), ambient_dim)


def point_in_cone(x, cone: Cone) -> str:
    """Classify x against the cone: 'interior' | 'boundary' | 'outside'.

    Interior means relative interior.  Exact LP on the generator multipliers.
    """
    x = pt(x)
    if len(x) != cone.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    eqs, ineqs = cone.facet_data()
    if any(dot(e, x) != 0 for e in eqs):
        return "outside"
    vals = [dot(i, x) for i in ineqs]
    if any(v < 0 for v in vals):
        return "outside"
    if cone.dim == 0:
        return "interior" if is_zero(x) else "outside"
    return "interior" if all(v > 0 for v in vals) else "boundary"


def cone_contains(cone: Cone, x) -> bool:
    return point_in_cone(x, cone) != "outside"


def extreme_rays(generators, ambient) -> tuple[tuple[int, ...], ...]:
    """Extreme rays of cone(generators) if pointed; minimal generators otherwise."""
    c = cone_of(generators, ambient)
    gens = list(c.generators)
    out = []
    for i, g in enumerate(gens):
        rest = [h for j, h in enumerate(gens) if j != i]
        if not rest:
            out.append(g)
            continue
        sub = cone_of(rest, ambient)
        if point_in_cone(g, sub) == "outside":
            out.append(g)
    return tuple(sorted(out)) if out else tuple(sorted(gens[:0]))


# ---------------------------------------------------------------------------
# hyperplane arrangements


@dataclass(frozen=True)
class ArrangementCell:
    """Open full-dimensional cell: strict sign vector plus an interior sample.

    The sample is an integer point (a sum of candidate rays).  rays lists the
    candidate rays in the cell's closure; their conical hull is the closure,
    so extreme rays can be recovered from them.
    """

    signs: tuple[int, ...]
    sample: tuple[int, ...]
    rays: tuple[tuple[int, ...], ...] = ()


def _arrangement_rays(constraints, prefixes, ambient):
    """Candidate witness rays for the incremental cell enumeration.

    Extreme rays of every intermediate region are kernels of
    (ambient-1)-subsets of the constraints; lineality directions of the
    intermediate regions are kernels of the constraint prefixes.
    """
    rays = {}
    if ambient == 1:
        return [(-1,), (1,)]
    for sub in itertools.combinations(range(len(constraints)), ambient - 1):
        rows = matrix([list(constraints[i]) for i in sub])
        if rank(rows) != ambient - 1:
            continue
        kb = kernel_basis_cached(rows)
        if len(kb) != 1:
            continue
        r = primitive_int(kb[0])
        rays[r] = True
        rays[tuple(-x for x in r)] = True
    for pref in prefixes:
        if not pref:
            for j in range(ambient):
                e = tuple(1 if i == j else 0 for i in range(ambient))
                rays[e] = True
                rays[tuple(-x for x in e)] = True
            continue
        for v in kernel_basis_cached(matrix([list(c) for c in pref])):
            r = primitive_int(v)
            if any(r):
                rays[r] = True
                rays[tuple(-x for x in r)] = True
    return sorted(rays)


_KB_CACHE: dict = {}


def kernel_basis_cached(rows):
    from .intlinalg import kernel_basis

    hit = _KB_CACHE.get(rows)
    if hit is None:
        hit = kernel_basis(rows)
        _KB_CACHE[rows] = hit
    return hit


def primitive_int(v):
    g = content(v)
    return tuple(x // g for x in v) if g else tuple(v)


def arrangement_cells(hyperplanes, within_ineqs=(), ambient=None):
    """Full-dimensional cells of a central hyperplane arrangement.

    hyperplanes: integer normals (through the origin).  within_ineqs: integer
    functionals h with h . x >= 0 carving the (full-dimensional) region of
    interest; cells are the realizable strict sign vectors inside it.
    Returns ArrangementCells sorted by sign vector.

    Cells are pointed cones here (the active normals always span the dual),
    so each cell is recognized by summing the candidate rays compatible with
    its sign vector: the sum is interior iff the sign vector is realizable,
    and no linear programming is needed.
    """
    hyperplanes = [tuple(h) for h in hyperplanes]
    within_ineqs = [tuple(w) for w in within_ineqs]
    if ambient is None:
        if hyperplanes:
            ambient = len(hyperplanes[0])
        elif within_ineqs:
            ambient = len(within_ineqs[0])
        else:
            raise ValueError("need ambient dimension")
    if ambient == 0:
        return [ArrangementCell((), ())]
    constraints = within_ineqs + hyperplanes
    prefixes = [within_ineqs + hyperplanes[:i] for i in range(len(hyperplanes) + 1)]
    rays = _arrangement_rays(constraints, prefixes, ambient)
    if within_ineqs:
        rays = [r for r in rays if all(dot(w, r) >= 0 for w in within_ineqs)]
    if not rays:
        return []
    hyp_vals = [tuple(dot(h, r) for h in hyperplanes) for r in rays]

    def witness(ray_idx, signs):
        """Sum of compatible rays if strictly inside the region, else None."""
        if not ray_idx:
            return None
        s = tuple(sum(rays[i][j] for i in ray_idx) for j in range(ambient))
        if any(dot(w, s) <= 0 for w in within_ineqs):
            return None
        for lv, sg in enumerate(signs):
            if sg * dot(hyperplanes[lv], s) <= 0:
                return None
        return s

    stack = [((), list(range(len(rays))))]
    for level, h in enumerate(hyperplanes):
        new_stack = []
        for signs, ridx in stack:
            for s in (1, -1):
                keep = [i for i in ridx if s * hyp_vals[i][level] >= 0]
                if witness(keep, signs + (s,)) is not None:
                    new_stack.append((signs + (s,), keep))
        stack = new_stack
    out = []
    for signs, ridx in stack:
        w = witness(ridx, signs)
        if w is None:
            continue  # only possible before any hyperplane was inserted
        out.append(
            ArrangementCell(tuple(signs), tuple(w), tuple(rays[i] for i in ridx))
        )
    out.sort(key=lambda c: c.signs)
    return out
