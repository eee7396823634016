"""SOD multiplicities: the recursive linear system, wall tables, run
accumulation, decorated complexes for both sides, balancing, and the A = B
verification report.

Everything is bookkept by index sets so repeated weights stay distinguishable.
Sub-problem results are memoized by canonical problem key; entries are counts
and must come out nonnegative integers, anything else is a hard error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import intlinalg as la
from .fan import (
    EMPTY,
    Chamber,
    GkzFan,
    Wall,
    build_fan,
    chamber_of,
    minimal_chambers,
    straight_line_run,
    wall_of,
)
from .geometry import dot, integerize, pt
from .intlinalg import matrix, primitive_vector
from .problem import (
    Face,
    GitProblem,
    minimal_faces,
    quotient_by_face,
    span_restriction,
    subquotient,
)
from .stacky import (
    minimal_phase_rank,
    restricted_rank,
    stacky_fan_of_chamber,
    stacky_volume,
)


class InconsistentSystem(Exception):
    pass


@dataclass(frozen=True)
class MultiplicityTable:
    """Multiplicities n_F per minimal face (keyed by face index sets)."""

    problem_key: tuple
    context: str
    entries: tuple  # ((face_indices, n), ...) sorted

    def as_dict(self) -> dict:
        return dict(self.entries)

    def __getitem__(self, face_indices):
        return self.as_dict().get(tuple(face_indices), 0)


@dataclass(frozen=True)
class DecoratedComplex:
    """Integer decorations on (wall id, minimal face index set) pairs."""

    problem_key: tuple
    entries: tuple  # ((wall_id, face_indices), n) sorted

    def as_dict(self) -> dict:
        return dict(self.entries)

    def entry(self, wall_id, face_indices) -> int:
        return self.as_dict().get((wall_id, tuple(face_indices)), 0)

    def face_component(self, face_indices) -> dict:
        fi = tuple(face_indices)
        return {w: n for (w, f), n in self.entries if f == fi and n}


_ATOM_RANK_CACHE: dict = {}


def atom_rank(p: GitProblem, face: Face) -> int:
    """rank K0 of the irreducible component attached to a minimal face.

    The component is the minimal phase of the quotient problem for the face
    (equivalently, the restriction of the weights to the partner subspace).
    """
    key = (p.key(), face.indices)
    hit = _ATOM_RANK_CACHE.get(key)
    if hit is None:
        hit = minimal_phase_rank(quotient_by_face(p, face.indices).problem)
        _ATOM_RANK_CACHE[key] = hit
    return hit


def _pair_rank(p: GitProblem, inner: tuple, outer: tuple) -> int:
    """rank of the minimal phase of the pair problem (inner <= outer)."""
    return minimal_phase_rank(subquotient(p, inner, outer).problem)


_TABLE_CACHE: dict = {}


def solve_recursive(p: GitProblem, chamber: Chamber, fan: GkzFan | None = None) -> MultiplicityTable:
    """Multiplicities of every irreducible component in the chamber's phase.

    Solves the triangular system: for each minimal face F,
    rank(restricted fan to F) = sum over minimal F' <= F of n_{F'} times the
    minimal-phase rank of the pair problem (F', F).
    """
    fan = fan or build_fan(p)
    key = (p.key(), chamber.incidence)
    hit = _TABLE_CACHE.get(key)
    if hit is not None:
        return hit
    faces = minimal_faces(p)
    sf = stacky_fan_of_chamber(fan, chamber)
    n: dict[tuple, int] = {}
    for f in faces:
        lhs = restricted_rank(p, sf, f.indices)
        acc = 0
        for f2 in faces:
            if f2.indices == f.indices or not set(f2.indices) <= set(f.indices):
                continue
            coeff = _pair_rank(p, f2.indices, f.indices)
            acc += n[f2.indices] * coeff
        val = lhs - acc
        if val < 0:
            raise InconsistentSystem(
                f"recursive system inconsistent: face {f.indices} gives {val}"
            )
        n[f.indices] = val
    table = MultiplicityTable(p.key(), f"chamber:{chamber.id}", tuple(sorted(n.items())))
    _TABLE_CACHE[key] = table
    return table


def table_ranks(p: GitProblem) -> dict:
    """Face index set -> rank of its component (coefficients of the top row)."""
    return {f.indices: atom_rank(p, f) for f in minimal_faces(p)}


def volume_ledger(p: GitProblem, chamber: Chamber, fan: GkzFan | None = None):
    """(total volume, [(face_indices, n, rank), ...]) for reporting."""
    fan = fan or build_fan(p)
    table = solve_recursive(p, chamber, fan)
    ranks = table_ranks(p)
    vol = stacky_volume(stacky_fan_of_chamber(fan, chamber))
    terms = [
        (f, n, ranks[f]) for f, n in table.entries
    ]
    assert vol == sum(n * r for _, n, r in terms), "rank ledger mismatch"
    return vol, terms


# ---------------------------------------------------------------------------
# wall problems


@dataclass(frozen=True)
class WallContext:
    wall: Wall
    sub: object  # IndexPairProblem of the span restriction
    subfan: GkzFan
    chamber: Chamber  # the wall, as a chamber of the restriction problem
    projection: tuple  # rows: the map L^v -> stability space of the restriction


_WALL_CTX_CACHE: dict = {}


def wall_context(p: GitProblem, wall: Wall) -> WallContext:
    key = (p.key(), wall.hyperplane, wall.incidence)
    hit = _WALL_CTX_CACHE.get(key)
    if hit is not None:
        return hit
    span_basis = la.kernel_basis(matrix([list(wall.hyperplane)]))
    sub = span_restriction(p, [tuple(b) for b in span_basis])
    proj = sub.stab_basis
    subfan = build_fan(sub.problem)
    img = sub.project_stability(wall.sample_point)
    ch = chamber_of(subfan, img)
    assert isinstance(ch, Chamber), "wall does not project to a chamber of its restriction"
    ctx = WallContext(wall, sub, subfan, ch, proj)
    _WALL_CTX_CACHE[key] = ctx
    return ctx


def wall_phase_rank(p: GitProblem, wall: Wall) -> int:
    ctx = wall_context(p, wall)
    return stacky_volume(stacky_fan_of_chamber(ctx.subfan, ctx.chamber))


def wall_multiplicities(p: GitProblem, wall: Wall) -> MultiplicityTable:
    """Irreducible multiplicities of the wall phase, on parent minimal faces.

    Solves the recursion inside the restriction problem on span(W) and lifts
    its face labels: a face of the restriction with index set G (in restriction
    positions) corresponds to the parent face with indices G' + complement.
    """
    ctx = wall_context(p, wall)
    sub = ctx.sub
    table = solve_recursive(sub.problem, ctx.chamber, ctx.subfan)
    outside = tuple(i for i in range(p.n_weights) if i not in sub.index_map)
    parent_faces = {f.indices for f in minimal_faces(p)}
    lifted = {}
    for g, nval in table.entries:
        amb = tuple(sorted(set(outside) | {sub.index_map[j] for j in g}))
        assert amb in parent_faces, "restriction face has no parent minimal face"
        lifted[amb] = lifted.get(amb, 0) + nval
    return MultiplicityTable(p.key(), f"wall:{wall.id}", tuple(sorted(lifted.items())))


def run_accumulate(p: GitProblem, chamber: Chamber, face: Face, fan: GkzFan | None = None) -> int:
    """Multiplicity of one component from a straight-line run (non-CY only).

    Walls not containing the face's partner subspace contribute nothing; the
    rest contribute d_W times the wall phase's multiplicity at the face.  The
    terminal minimal phase adds 1 exactly for the empty-index face.
    """
    fan = fan or build_fan(p)
    if p.is_calabi_yau():
        raise ValueError("runs need det V != 0")
    h_idx = tuple(i for i in range(p.n_weights) if i not in face.indices)
    h_basis = []
    for i in h_idx:
        cand = h_basis + [p.weights[i]]
        if la.rank(matrix([list(v) for v in cand])) == len(cand):
            h_basis.append(p.weights[i])
    total = 0
    if len(h_basis) == p.k:
        # the partner subspace is the whole stability space: the component is
        # the minimal phase itself, appearing once in every nonempty phase
        return 1 if minimal_chambers(fan) else 0
    walls = straight_line_run(fan, chamber)
    for w in walls:
        if all(dot(w.hyperplane, b) == 0 for b in h_basis):
            total += w.d * wall_multiplicities(p, w)[face.indices]
    return total


# ---------------------------------------------------------------------------
# decorated complexes


def decorated_complex_B(p: GitProblem) -> DecoratedComplex:
    """B-side: every wall's phase decomposed into irreducible components."""
    if not p.is_calabi_yau():
        raise ValueError("decorated complexes require a Calabi-Yau problem")
    fan = build_fan(p)
    entries = {}
    for w in fan.walls:
        table = wall_multiplicities(p, w)
        for f, n in table.entries:
            if n:
                entries[(w.id, f)] = n
    return DecoratedComplex(p.key(), tuple(sorted(entries.items())))


def _wall_image_in_face_problem(p: GitProblem, fan: GkzFan, wall: Wall, proj, subfan: GkzFan):
    """The wall of the face problem's fan the given wall maps onto, or None."""
    img = tuple(
        sum(Fraction(row[i]) * x for i, x in enumerate(wall.sample_point))
        for row in proj
    )
    w2 = wall_of(subfan, img)
    return w2


_A_COMPLEX_CACHE: dict = {}


def decorated_complex_A(p: GitProblem) -> DecoratedComplex:
    """A-side: recursion over face problems plus the per-wall rank identity.

    For each minimal face other than the largest one, the component's row is
    pulled back from the face problem (a strictly smaller CY problem); the
    largest face's row is then forced by rank K0(Z_W) = sum of row entries
    weighted by component ranks, the largest component having rank one.
    """
    if not p.is_calabi_yau():
        raise ValueError("decorated complexes require a Calabi-Yau problem")
    hit = _A_COMPLEX_CACHE.get(p.key())
    if hit is not None:
        return hit
    fan = build_fan(p)
    faces = minimal_faces(p)
    top = tuple(range(p.n_weights))
    assert any(f.indices == top for f in faces), "largest minimal face missing"
    entries: dict = {}
    from .problem import projection_to_face_problem

    for f in faces:
        if f.indices == top:
            continue
        proj, sub = projection_to_face_problem(p, f.indices)
        if sub.problem.k == 0:
            continue  # trivial face problem: no walls, empty row
        sub_complex = decorated_complex_A(sub.problem)
        subfan = build_fan(sub.problem)
        sub_top = tuple(range(sub.problem.n_weights))
        for w in fan.walls:
            # the wall contributes iff it surjects onto a wall downstairs
            w2 = _wall_image_in_face_problem(p, fan, w, proj, subfan)
            if w2 is None:
                continue
            val = sub_complex.entry(w2.id, sub_top)
            if val:
                entries[(w.id, f.indices)] = val
    ranks = table_ranks(p)
    for w in fan.walls:
        rank_zw = wall_phase_rank(p, w)
        acc = sum(
            entries.get((w.id, f.indices), 0) * ranks[f.indices]
            for f in faces
            if f.indices != top
        )
        val = rank_zw - acc
        if val < 0:
            raise InconsistentSystem("A-side reconstruction inconsistent")
        if val:
            assert ranks[top] == 1, "largest component must have rank one"
            entries[(w.id, top)] = val
    res = DecoratedComplex(p.key(), tuple(sorted(entries.items())))
    _A_COMPLEX_CACHE[p.key()] = res
    return res


# ---------------------------------------------------------------------------
# balancing and tropical intersections


def _wall_cone_contains(fan: GkzFan, wall: Wall, x) -> bool:
    """x in the closed cone spanned by the wall (its closure)."""
    from .geometry import cone_of, point_in_cone

    gens = [g for g in wall.generators if g and any(g)]
    if not gens:
        gens_set = set()
        for piece in wall.pieces:
            v = integerize(tuple(Fraction(t) for t in piece.sample))
            if any(v):
                gens_set.add(v)
        gens = sorted(gens_set)
    if not gens:
        return all(t == 0 for t in x)
    return point_in_cone(x, cone_of(gens, fan.problem.k)) != "outside"


def _wall_relint_contains(fan: GkzFan, wall: Wall, x) -> bool:
    from .fan import incidence_key

    return incidence_key(fan.cones, pt(x)) == wall.incidence


def codim2_rays(p: GitProblem, fan: GkzFan):
    """Codimension-2 candidate cones shared by walls: (generator, [wall ids]).

    For k = 2 the only candidate is the origin (generator zero); for k >= 3
    the candidates are primitive generators of pairwise hyperplane
    intersections that are not interior to any single wall.
    """
    k = p.k
    out = []
    if k < 2:
        return out
    if k == 2:
        shared = [w.id for w in fan.walls]
        return [((0, 0), shared)] if len(shared) >= 2 else []
    if k > 3:
        raise NotImplementedError("balancing implemented for rank 2 and 3 only")
    import itertools

    cands = {}
    for h1, h2 in itertools.combinations(fan.hyperplanes, 2):
        kb = la.kernel_basis(matrix([list(h1), list(h2)]))
        if len(kb) != k - 2:
            continue
        if k == 3:
            v = primitive_vector(kb[0])
            for sgn in (1, -1):
                cands[tuple(sgn * t for t in v)] = True
    for v in sorted(cands):
        if any(_wall_relint_contains(fan, w, v) for w in fan.walls):
            continue
        incident = [w.id for w in fan.walls if _wall_cone_contains(fan, w, v)]
        if len(incident) >= 2:
            out.append((v, incident))
    return out


def check_balancing(p: GitProblem, complex_: DecoratedComplex, face_indices) -> bool:
    """Weighted primitive wall directions sum into the span of each codim-2 cone."""
    if p.k < 2:
        raise ValueError("balancing needs rank >= 2")
    fan = build_fan(p)
    fi = tuple(face_indices)
    for ray, wall_ids in codim2_rays(p, fan):
        span_rows = [list(ray)] if any(ray) else []
        acc = [Fraction(0)] * p.k
        for wid in wall_ids:
            w = fan.walls[wid]
            nval = complex_.entry(wid, fi)
            if not nval:
                continue
            u = _transverse_generator(p, w, ray)
            acc = [a + nval * x for a, x in zip(acc, u)]
        # the sum must lie in span(ray)
        if span_rows:
            rows = matrix([[int(x) for x in integerize(tuple(map(Fraction, span_rows[0])))]])
            if all(x == 0 for x in acc):
                continue
            aug = [list(rows[0]), [x.numerator if isinstance(x, Fraction) else x for x in integerize(acc)]]
            if la.rank(matrix(aug)) > 1:
                return False
        else:
            if any(x != 0 for x in acc):
                return False
    return True


def _transverse_generator(p: GitProblem, wall: Wall, ray):
    """Primitive generator of span(W)/span(ray), oriented into the wall cone."""
    span_basis = la.kernel_basis(matrix([list(wall.hyperplane)]))
    sample = wall.sample_point
    if not any(ray):
        # modulo the origin: the primitive direction of the wall itself (k = 2)
        return primitive_vector(integerize(tuple(Fraction(x) for x in sample)))
    # find an integer vector in span(W), independent of ray, on the sample side
    rows = [list(b) for b in span_basis]
    # lattice basis of span(W): columns span_basis; express sample and ray
    coords_sample = la.solve_rational([[Fraction(b[i]) for b in span_basis] for i in range(p.k)], pt(sample))
    coords_ray = la.solve_rational([[Fraction(b[i]) for b in span_basis] for i in range(p.k)], pt(ray))
    assert coords_sample is not None and coords_ray is not None
    # in the 2d lattice of the wall span: quotient by ray direction
    ray2 = integerize(coords_ray)
    # a primitive functional on the span lattice vanishing on ray2
    perp = la.kernel_basis(matrix([list(ray2)]))
    assert len(perp) == 1
    phi = perp[0]
    val = dot(phi, coords_sample)
    assert val != 0, "wall sample lies on the codim-2 ray"
    # generator u with phi(u) = +-1, sign matching the sample side
    sgn = 1 if val > 0 else -1
    # solve phi . u = sgn over the integers in the span lattice
    sol = la.solve_integer(matrix([list(phi)]), (sgn,))
    assert sol is not None
    return tuple(
        sum(b[i] * s for b, s in zip(span_basis, sol)) for i in range(p.k)
    )


def tropical_intersection(p: GitProblem, direction, wall: Wall) -> int:
    """Unsigned determinant of the direction with a lattice basis of span(W)."""
    span_rows = matrix([list(wall.hyperplane)])
    basis = la.kernel_basis(span_rows)
    d = [int(x) for x in direction]
    if dot(wall.hyperplane, d) == 0:
        raise ValueError("non-transverse")
    rows = [d] + [list(b) for b in basis]
    from .geometry import det_int

    return abs(det_int(rows))


# ---------------------------------------------------------------------------
# the theorem verification report


def verify_theorem(p: GitProblem) -> dict:
    """Compute both decorated complexes and the pullback checks; JSON-ready."""
    if not p.is_calabi_yau():
        raise ValueError("verify requires a Calabi-Yau problem")
    fan = build_fan(p)
    a = decorated_complex_A(p)
    b = decorated_complex_B(p)
    faces = minimal_faces(p)
    ranks = table_ranks(p)
    wall_rows = []
    all_match = True
    for w in fan.walls:
        a_row = {f.indices: a.entry(w.id, f.indices) for f in faces}
        b_row = {f.indices: b.entry(w.id, f.indices) for f in faces}
        match = a_row == b_row
        all_match = all_match and match
        wall_rows.append(
            {
                "id": w.id,
                "lambda": list(w.lam),
                "generators": [list(g) for g in w.generators if g],
                "rank_ZW": wall_phase_rank(p, w),
                "A_row": {_face_id(f): a_row[f.indices] for f in faces},
                "B_row": {_face_id(f): b_row[f.indices] for f in faces},
                "match": match,
            }
        )
    pullback_ok = _check_pullback_instances(p, fan)
    return {
        "walls": wall_rows,
        "faces": [
            {"id": _face_id(f), "indices": list(f.indices), "rank": ranks[f.indices]}
            for f in faces
        ],
        "pullback_consistent": pullback_ok,
        "theorem_holds": bool(all_match),
    }


def _face_id(f: Face) -> str:
    return "F[" + ",".join(str(i) for i in f.indices) + "]"


def _check_pullback_instances(p: GitProblem, fan: GkzFan) -> bool:
    """table(C)[F_H] equals the quotient problem's top multiplicity, per chamber."""
    from .problem import projection_to_face_problem

    for f in minimal_faces(p):
        if f.indices == tuple(range(p.n_weights)):
            continue
        proj, sub = projection_to_face_problem(p, f.indices)
        subfan = build_fan(sub.problem)
        sub_top = tuple(range(sub.problem.n_weights))
        for c in fan.chambers:
            img = tuple(
                sum(Fraction(row[i]) * x for i, x in enumerate(c.sample_point))
                for row in proj
            )
            down = chamber_of(subfan, img)
            mine = solve_recursive(p, c, fan)[f.indices]
            if down == EMPTY:
                expect = 0
            elif isinstance(down, Chamber):
                expect = solve_recursive(sub.problem, down, subfan)[sub_top]
            else:
                return False  # chamber image must be a stratum of full dim
            if mine != expect:
                return False
    return True
