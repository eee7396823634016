"""GKZ stratification of the stability space: chambers, walls, runs, projections.

Strata are incidence classes: two points lie in the same stratum iff they lie
in exactly the same cones spanned by weight subsets.  The candidate hyperplane
arrangement (spans of (k-1)-subsets of weights) over-refines the fan, so its
full-dimensional cells are merged by incidence vector into chambers, and its
codimension-1 pieces are merged into walls.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import intlinalg as la
from .geometry import (
    ArrangementCell,
    Cone,
    arrangement_cells,
    canonical_normal,
    cone_of,
    dot,
    extreme_rays,
    integerize,
    pt,
)
from .intlinalg import matrix, primitive_vector
from .problem import GitProblem

EMPTY = "EMPTY"


class CodimTwoHit(Exception):
    """A straight-line run met a stratum of codimension >= 2."""


@dataclass(frozen=True)
class Chamber:
    id: int
    sample_point: tuple[int, ...]
    sign_vector: tuple[int, ...]
    incidence: frozenset
    cells: tuple[ArrangementCell, ...]
    is_minimal: bool


@dataclass(frozen=True)
class WallPiece:
    sample: tuple[Fraction, ...]
    signs: tuple[int, ...]  # over the other candidate hyperplanes, in fan order


@dataclass(frozen=True)
class Wall:
    id: int
    hyperplane: tuple[int, ...]  # canonical unoriented normal of the span
    lam: tuple[int, ...]  # oriented primitive conormal
    d: int
    sides: tuple  # (chamber id or EMPTY on the lam > 0 side, other side)
    incidence: frozenset
    pieces: tuple[WallPiece, ...]
    generators: tuple[tuple[int, ...], ...]

    @property
    def sample_point(self):
        return self.pieces[0].sample


@dataclass(frozen=True)
class GkzFan:
    problem: GitProblem
    hyperplanes: tuple[tuple[int, ...], ...]
    support_ineqs: tuple[tuple[int, ...], ...]
    support_full: bool
    chambers: tuple[Chamber, ...]
    walls: tuple[Wall, ...]
    cones: tuple  # distinct incidence cones (facet data)

    @property
    def has_empty_chamber(self) -> bool:
        return not self.support_full

    def chamber_by_id(self, cid: int) -> Chamber:
        return self.chambers[cid]


def candidate_hyperplanes(p: GitProblem) -> list[tuple[int, ...]]:
    """Canonical normals of all rank-(k-1) spans of weight subsets."""
    k = p.k
    if k == 0:
        return []
    if k == 1:
        return [(1,)]
    out = {}
    ws = p.weights
    for sub in itertools.combinations(range(len(ws)), k - 1):
        rows = [list(ws[i]) for i in sub]
        if la.rank(matrix(rows)) != k - 1:
            continue
        kb = la.kernel_basis(matrix(rows))
        if len(kb) != 1:
            continue
        out[canonical_normal(kb[0])] = True
    return sorted(out.keys())


def _incidence_cones(p: GitProblem):
    """Distinct cones spanned by weight subsets, as (eqs, ineqs) facet data."""
    ws = [tuple(w) for w in p.weights]
    k = p.k
    seen_gens = {}
    for size in range(len(ws) + 1):
        for sub in itertools.combinations(range(len(ws)), size):
            gens = tuple(sorted(set(primitive_vector(ws[i]) for i in sub if any(ws[i]))))
            seen_gens[gens] = True
    cones = {}
    for gens in seen_gens:
        c = Cone(gens, k)
        cones[c.facet_data()] = True
    return sorted(cones.keys())


def _member(cone_data, x) -> bool:
    eqs, ineqs = cone_data
    for e in eqs:
        s = 0
        for a, b in zip(e, x):
            s += a * b
        if s != 0:
            return False
    for i in ineqs:
        s = 0
        for a, b in zip(i, x):
            s += a * b
        if s < 0:
            return False
    return True


def _member_lex(cone_data, x, d) -> bool:
    """Membership of x + eps * d for all sufficiently small eps > 0."""
    eqs, ineqs = cone_data
    for e in eqs:
        if dot(e, x) != 0 or dot(e, d) != 0:
            return False
    for i in ineqs:
        v = dot(i, x)
        if v < 0 or (v == 0 and dot(i, d) < 0):
            return False
    return True


def incidence_key(fan_cones, x) -> frozenset:
    return frozenset(i for i, c in enumerate(fan_cones) if _member(c, x))


def incidence_key_lex(fan_cones, x, d) -> frozenset:
    return frozenset(i for i, c in enumerate(fan_cones) if _member_lex(c, x, d))


_FAN_CACHE: dict = {}


def build_fan(p: GitProblem) -> GkzFan:
    """Chambers and walls of the GKZ stratification; cached per problem."""
    hit = _FAN_CACHE.get(p.key())
    if hit is not None:
        return hit
    k = p.k
    if k == 0:
        chamber = Chamber(0, (), (), frozenset([0]), (ArrangementCell((), ()),), True)
        fan = GkzFan(p, (), (), True, (chamber,), (), (((), ()),))
        _FAN_CACHE[p.key()] = fan
        return fan

    hyps = candidate_hyperplanes(p)
    cones = _incidence_cones(p)
    support = cone_of(p.weights, k)
    s_eqs, s_ineqs = support.facet_data()
    assert not s_eqs, "weights must span the stability space"
    support_full = not s_ineqs

    cells = arrangement_cells(hyps, within_ineqs=s_ineqs, ambient=k)
    groups: dict[frozenset, list[ArrangementCell]] = {}
    for cell in cells:
        key = incidence_key(cones, cell.sample)
        groups.setdefault(key, []).append(cell)
    minus_dv = tuple(-x for x in p.det_v)

    def closure_contains(cell_list, x) -> bool:
        for cell in cell_list:
            ok = all(
                s * dot(h, x) >= 0 for s, h in zip(cell.signs, hyps)
            ) and all(dot(g, x) >= 0 for g in s_ineqs)
            if ok:
                return True
        return False

    chamber_list = []
    for key, cl in sorted(groups.items(), key=lambda kv: sorted(c.signs for c in kv[1])[0]):
        cl = sorted(cl, key=lambda c: c.signs)
        minimal = closure_contains(cl, minus_dv)
        chamber_list.append((key, cl, minimal))
    chambers = tuple(
        Chamber(i, cl[0].sample, cl[0].signs, key, tuple(cl), minimal)
        for i, (key, cl, minimal) in enumerate(chamber_list)
    )
    by_incidence = {c.incidence: c.id for c in chambers}
    full_cone_idx = cones.index(Cone(tuple(sorted(set(map(primitive_vector, filter(any, map(tuple, p.weights)))))), k).facet_data())

    def classify_lex(x, d):
        key = incidence_key_lex(cones, x, d)
        cid = by_incidence.get(key)
        if cid is not None:
            return cid
        if full_cone_idx not in key:
            return EMPTY
        raise AssertionError("perturbed point did not land in a chamber")

    # walls: codim-1 pieces per hyperplane, grouped by incidence
    piece_groups: dict = {}
    for hi, h in enumerate(hyps):
        basis = la.kernel_basis(matrix([list(h)]))  # k x (k-1) columns
        amb_cols = basis
        sub_normals = []
        sub_map = []
        seen = {}
        for hj, h2 in enumerate(hyps):
            if hj == hi:
                continue
            restr = tuple(dot(h2, b) for b in amb_cols)
            if all(x == 0 for x in restr):
                continue
            cn = canonical_normal(restr)
            if cn not in seen:
                seen[cn] = True
                sub_normals.append(cn)
                sub_map.append(hj)
        within = []
        for g in s_ineqs:
            restr = tuple(dot(g, b) for b in amb_cols)
            if any(x != 0 for x in restr):
                within.append(restr)
        if within:
            from .linprog import strict_interior_point

            if strict_interior_point([list(w) for w in within]) is None:
                continue  # support meets this hyperplane in lower dimension
        elif s_ineqs:
            # support cut to this hyperplane leaves no open region only if some
            # restricted inequality was strictly negative somewhere; with all
            # restrictions identically zero the hyperplane lies inside support
            pass
        pieces = arrangement_cells(sub_normals, within_ineqs=within, ambient=k - 1)
        for piece in pieces:
            if k == 1:
                sample = tuple(0 for _ in range(k))
                amb_rays = ()
            else:
                sample = tuple(
                    sum(b[i] * y for b, y in zip(amb_cols, piece.sample))
                    for i in range(k)
                )
                amb_rays = tuple(
                    tuple(sum(b[i] * y for b, y in zip(amb_cols, r)) for i in range(k))
                    for r in piece.rays
                )
            if s_ineqs and not all(dot(g, sample) >= 0 for g in s_ineqs):
                continue
            key = incidence_key(cones, sample)
            lam0 = canonical_normal(h)
            plus = classify_lex(sample, lam0)
            minus = classify_lex(sample, tuple(-x for x in lam0))
            if plus == minus:
                continue  # spurious piece inside one stratum
            piece_groups.setdefault(key, []).append(
                (hi, lam0, sample, piece, plus, minus, amb_rays)
            )

    walls = []
    for key, entries in piece_groups.items():
        his = {e[0] for e in entries}
        assert len(his) == 1, "wall pieces must share a hyperplane"
        lam0 = entries[0][1]
        pairing = dot(lam0, p.det_v)
        if pairing < 0:
            lam = tuple(-x for x in lam0)
        elif pairing > 0:
            lam = lam0
        else:
            lam = lam0  # canonical already: first nonzero positive
        d = abs(pairing)
        # sides w.r.t. the oriented lam
        if lam == lam0:
            plus, minus = entries[0][4], entries[0][5]
        else:
            plus, minus = entries[0][5], entries[0][4]
        for e in entries[1:]:
            ep, em = (e[4], e[5]) if lam == lam0 else (e[5], e[4])
            assert (ep, em) == (plus, minus), "inconsistent wall sides"
        gens = {}
        for e in entries:
            for r in e[6]:
                if any(r):
                    gens[tuple(r)] = True
        rays = extreme_rays(list(gens.keys()), p.k) if gens else ((),)
        pieces = tuple(WallPiece(e[2], e[3].signs) for e in entries)
        walls.append(
            Wall(0, hyps[entries[0][0]], lam, d, (plus, minus), key, pieces, tuple(rays))
        )
    walls.sort(key=lambda w: (w.hyperplane, w.generators, w.pieces[0].sample))
    walls = tuple(
        Wall(i, w.hyperplane, w.lam, w.d, w.sides, w.incidence, w.pieces, w.generators)
        for i, w in enumerate(walls)
    )
    fan = GkzFan(p, tuple(hyps), tuple(s_ineqs), support_full, chambers, walls, tuple(cones))
    _FAN_CACHE[p.key()] = fan
    return fan


def chamber_of(fan: GkzFan, point):
    """Chamber containing the point, EMPTY, or ('ON_BOUNDARY', stratum key)."""
    x = pt(point)
    if fan.problem.k == 0:
        return fan.chambers[0]
    key = incidence_key(fan.cones, x)
    for c in fan.chambers:
        if c.incidence == key:
            return c
    if fan.support_ineqs and any(dot(g, x) < 0 for g in fan.support_ineqs):
        return EMPTY
    return ("ON_BOUNDARY", key)


def wall_of(fan: GkzFan, point):
    """The wall whose stratum contains the point, or None."""
    x = pt(point)
    key = incidence_key(fan.cones, x)
    for w in fan.walls:
        if w.incidence == key:
            return w
    return None


def minimal_chambers(fan: GkzFan) -> list[Chamber]:
    return [c for c in fan.chambers if c.is_minimal]


def chamber_closure_contains(fan: GkzFan, chamber: Chamber, x) -> bool:
    x = pt(x)
    for cell in chamber.cells:
        ok = all(s * dot(h, x) >= 0 for s, h in zip(cell.signs, fan.hyperplanes)) and all(
            dot(g, x) >= 0 for g in fan.support_ineqs
        )
        if ok:
            return True
    return False


_PERTURB_PRIME = 3


def _perturbed_start(fan: GkzFan, chamber: Chamber, attempt: int):
    if attempt == 0:
        return chamber.sample_point
    k = fan.problem.k
    eps = Fraction(1, _PERTURB_PRIME ** (attempt + 4))
    direction = tuple(1 if i == (attempt - 1) % k else 0 for i in range(k))
    cand = tuple(s + eps * d for s, d in zip(chamber.sample_point, direction))
    if incidence_key(fan.cones, cand) == chamber.incidence:
        return cand
    return None


def straight_line_run(fan: GkzFan, chamber: Chamber, max_attempts: int = 60):
    """Ordered walls crossed from the chamber in direction -det V.

    Stops on entering a minimal chamber or the empty region.  Starting points
    hitting codimension >= 2 strata are perturbed on a deterministic schedule.
    """
    p = fan.problem
    if p.is_calabi_yau():
        raise ValueError("no straight-line run for det V = 0")
    if chamber.is_minimal:
        return []
    dv = tuple(-x for x in p.det_v)
    for attempt in range(max_attempts):
        start = _perturbed_start(fan, chamber, attempt)
        if start is None:
            continue
        try:
            return _run_from(fan, start, dv)
        except CodimTwoHit:
            continue
    raise AssertionError("perturbation schedule exhausted")


def _run_from(fan: GkzFan, start, dv):
    crossings = []
    for h in fan.hyperplanes:
        a = dot(h, start)
        b = dot(h, dv)
        if b == 0:
            continue
        t = -Fraction(a) / b
        if t > 0:
            crossings.append((t, h))
    crossings.sort(key=lambda c: c[0])
    walls_hit = []
    prev_t = Fraction(0)
    i = 0
    while i < len(crossings):
        t, h = crossings[i]
        if i + 1 < len(crossings) and crossings[i + 1][0] == t:
            raise CodimTwoHit()
        point = tuple(s + t * d for s, d in zip(start, dv))
        key = incidence_key(fan.cones, point)
        wall = next((w for w in fan.walls if w.incidence == key), None)
        chamber = next((c for c in fan.chambers if c.incidence == key), None)
        if wall is not None:
            walls_hit.append(wall)
            # inspect the region after this crossing
            nxt = crossings[i + 1][0] if i + 1 < len(crossings) else t + 1
            mid = tuple(s + ((t + nxt) / 2) * d for s, d in zip(start, dv))
            mkey = incidence_key(fan.cones, mid)
            mchamber = next((c for c in fan.chambers if c.incidence == mkey), None)
            if mchamber is None:
                if fan.support_ineqs and any(dot(g, mid) < 0 for g in fan.support_ineqs):
                    break  # entered the empty region
                raise CodimTwoHit()
            if mchamber.is_minimal:
                break
        elif chamber is None:
            # neither a wall nor interior: codim >= 2 stratum or boundary point
            if not (fan.support_ineqs and any(dot(g, point) < 0 for g in fan.support_ineqs)):
                raise CodimTwoHit()
            break
        prev_t = t
        i += 1
    return walls_hit


def project_point_to_face_problem(p: GitProblem, face_indices, point):
    """Image of a stability point in the face problem (quotient by the partner subspace)."""
    from .problem import projection_to_face_problem

    proj, sub = projection_to_face_problem(p, face_indices)
    return tuple(dot(row, point) for row in proj), sub


def project_chamber(fan: GkzFan, chamber: Chamber, face_indices):
    """Chamber of the face problem's fan containing the image of this chamber."""
    img, sub = project_point_to_face_problem(fan.problem, face_indices, chamber.sample_point)
    subfan = build_fan(sub.problem)
    return chamber_of(subfan, img), sub


def fan_to_dict(fan: GkzFan) -> dict:
    """JSON-ready fan description with stable ordering."""

    def frac(x):
        return str(x)

    chambers = []
    for c in fan.chambers:
        rays = {}
        for cell in c.cells:
            for ray in cell.rays:
                if any(ray):
                    rays[ray] = True
        chambers.append(
            {
                "id": c.id,
                "sample_point": [frac(x) for x in c.sample_point],
                "rays": [list(r) for r in extreme_rays(list(rays), fan.problem.k)] if rays else [],
                "is_minimal": c.is_minimal,
            }
        )
    walls = []
    for w in fan.walls:
        sides = [s if s == EMPTY else int(s) for s in w.sides]
        walls.append(
            {
                "id": w.id,
                "generators": [list(g) for g in w.generators if g],
                "lambda": list(w.lam),
                "d": w.d,
                "sides": sides,
            }
        )
    return {
        "k": fan.problem.k,
        "num_chambers": len(fan.chambers),
        "num_walls": len(fan.walls),
        "has_empty_chamber": fan.has_empty_chamber,
        "chambers": chambers,
        "walls": walls,
    }


