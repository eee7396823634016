"""Regular marked subdivisions of Pi from a lift, and localized equivalence.

A lift b assigns heights to the configuration points (the origin always sits
at height 0); the subdivision is the projection of the lower convex hull of
the lifted points.  Markings record which lifted points touch the hull over
each cell, tracked by index so repeated points stay distinguishable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .geometry import affine_rank, dot, pt
from .problem import GitProblem

BASE = "base"


def _mark_key(m):
    return (1, m, 0) if isinstance(m, str) else (0, "", m)


@dataclass(frozen=True)
class SubdivisionCell:
    vertices: tuple  # tuples of Fractions
    marking: frozenset  # point indices, possibly BASE
    functional: tuple  # (alpha..., gamma): the affine function on the cell


@dataclass(frozen=True)
class MarkedSubdivision:
    problem_key: tuple
    lift: tuple
    cells: tuple[SubdivisionCell, ...]

    def base_cells(self):
        return [c for c in self.cells if BASE in c.marking]

    def uses_base_point(self) -> bool:
        return any(BASE in c.marking for c in self.cells)


def regular_subdivision(p: GitProblem, b) -> MarkedSubdivision:
    """Lower-hull subdivision of Pi = conv(0, a_i) for the lift b (len N)."""
    b = [Fraction(x) for x in b]
    if len(b) != p.n_weights:
        raise ValueError("lift length must match the weight count")
    r = p.free_rank
    lifted = [(pt(q.free), b[i], i) for i, q in enumerate(p.points)]
    lifted.append((tuple(Fraction(0) for _ in range(r)), Fraction(0), BASE))

    if r == 0:
        low = min(h for _, h, _ in lifted)
        marking = frozenset(i for _, h, i in lifted if h == low)
        cell = SubdivisionCell((tuple(),), marking, (Fraction(low),))
        return MarkedSubdivision(p.key(), tuple(b), (cell,))

    # hull facets: affine g(x) = alpha . x + gamma with g <= heights, tight on
    # an affinely spanning subset
    cells = {}
    n = len(lifted)
    for sub in itertools.combinations(range(n), r + 1):
        if affine_rank([lifted[i][0] for i in sub]) != r:
            continue
        # solve alpha . x_j + gamma = h_j
        rows = [list(lifted[i][0]) + [Fraction(1)] for i in sub]
        rhs = [lifted[i][1] for i in sub]
        sol = _solve(rows, rhs)
        if sol is None:
            continue
        alpha, gamma = sol[:-1], sol[-1]
        ok = True
        for x, h, _ in lifted:
            if dot(alpha, x) + gamma > h:
                ok = False
                break
        if not ok:
            continue
        key = (tuple(alpha), gamma)
        if key in cells:
            continue
        tight = [
            (x, idx) for x, h, idx in lifted if dot(alpha, x) + gamma == h
        ]
        verts = tuple(sorted(set(x for x, _ in tight)))
        marking = frozenset(idx for _, idx in tight)
        cells[key] = SubdivisionCell(verts, marking, tuple(alpha) + (gamma,))
    out = sorted(
        cells.values(), key=lambda c: (c.vertices, sorted(c.marking, key=_mark_key))
    )
    return MarkedSubdivision(p.key(), tuple(b), tuple(out))


def _solve(rows, rhs):
    from .intlinalg import solve_rational

    return solve_rational(rows, rhs)


def lift_of_point(p: GitProblem, c) -> tuple:
    """One rational lift b with Q b = c, by least-index pivoting."""
    if p.k == 0:
        return tuple(Fraction(0) for _ in range(p.n_weights))
    from .intlinalg import solve_rational

    sol = solve_rational([list(row) for row in p.Q], [Fraction(x) for x in c])
    if sol is None:
        raise ValueError("point not in the image of Q")
    return sol


def second_lift(p: GitProblem, b) -> tuple:
    """A different lift of the same stability point (shift along the fiber)."""
    r = p.free_rank
    if r == 0:
        return tuple(b)
    shift = [Fraction(0)] * p.n_weights
    for i, q in enumerate(p.points):
        shift[i] = sum(Fraction(x, 1 + j) for j, x in enumerate(q.free))
    return tuple(x + Fraction(1, 7) * s for x, s in zip(b, shift))


def subdivision_of_chamber(fan_obj, chamber) -> MarkedSubdivision:
    """T(b) for a lift of the chamber's sample point.

    The localized class at the base point does not depend on the lift; this is
    asserted by recomputing with a second lift.
    """
    p = fan_obj.problem
    b = lift_of_point(p, chamber.sample_point)
    t1 = regular_subdivision(p, b)
    t2 = regular_subdivision(p, second_lift(p, b))
    assert localized_equal(t1, t2, BASE), "localized class depends on the lift"
    return t1


def localized_equal(t1: MarkedSubdivision, t2: MarkedSubdivision, at) -> bool:
    """Same collection of cells whose marking contains `at` (vertices and markings)."""

    def select(t):
        return sorted(
            (c.vertices, tuple(sorted(c.marking, key=_mark_key)))
            for c in t.cells
            if at in c.marking
        )

    return select(t1) == select(t2)


def uses_base_point(t: MarkedSubdivision) -> bool:
    return t.uses_base_point()


def psi_value(t: MarkedSubdivision, x) -> Fraction:
    """The PL convex function of the subdivision evaluated at x (in Pi)."""
    x = pt(x)
    best = None
    for c in t.cells:
        alpha, gamma = c.functional[:-1], c.functional[-1]
        v = dot(alpha, x) + gamma
        if best is None or v > best:
            best = v
    if best is None:
        raise ValueError("empty subdivision")
    return best


def subdivision_to_dict(t: MarkedSubdivision) -> dict:
    return {
        "lift": [str(x) for x in t.lift],
        "cells": [
            {
                "vertices": [[str(x) for x in v] for v in c.vertices],
                "marking": [
                    (m if isinstance(m, str) else int(m))
                    for m in sorted(c.marking, key=_mark_key)
                ],
            }
            for c in t.cells
        ],
    }
