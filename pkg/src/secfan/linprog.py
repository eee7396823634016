"""Tiny exact-rational LP solver (two-phase primal simplex, Bland's rule).

Instance sizes in this package are a handful of variables and a few dozen
constraints, so a dense Fraction tableau is plenty.
"""

from __future__ import annotations

from fractions import Fraction

Vec = tuple[Fraction, ...]


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


def _simplex(tab, basis, ncols):
    """Maximize the objective in row -1 of the tableau; Bland's rule."""
    nrows = len(tab) - 1
    while True:
        obj = tab[-1]
        enter = next((j for j in range(ncols) if obj[j] > 0), None)
        if enter is None:
            return
        leave = None
        best = None
        for i in range(nrows):
            if tab[i][enter] > 0:
                ratio = tab[i][-1] / tab[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise Unbounded()
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(len(tab)):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[leave])]
        basis[leave] = enter


def lp_solve(c, a_ub=(), b_ub=(), a_eq=(), b_eq=()):
    """Maximize c . x subject to a_ub x <= b_ub, a_eq x = b_eq, x free.

    Returns (x, value) with exact Fractions.  Raises Infeasible / Unbounded.
    Free variables are split into positive and negative parts internally.
    """
    n = len(c)
    rows = []
    for row, b in zip(a_ub, b_ub):
        rows.append((list(row), Fraction(b), "ub"))
    for row, b in zip(a_eq, b_eq):
        rows.append((list(row), Fraction(b), "eq"))

    nslack = sum(1 for r in rows if r[2] == "ub")
    width = 2 * n + nslack  # x+ , x- , slacks
    tab = []
    art_cols = []
    si = 0
    for row, b, kind in rows:
        coeffs = [Fraction(v) for v in row] + [Fraction(-v) for v in row]
        slacks = [Fraction(0)] * nslack
        if kind == "ub":
            slacks[si] = Fraction(1)
            si += 1
        line = coeffs + slacks
        if b < 0:
            line = [-x for x in line]
            b = -b
        tab.append((line, Fraction(b)))

    m = len(tab)
    full = []
    basis = []
    for i, (line, b) in enumerate(tab):
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        full.append(line + art + [b])
        basis.append(width + i)
        art_cols.append(width + i)

    # phase 1: minimize sum of artificials
    obj = [Fraction(0)] * (width + m) + [Fraction(0)]
    for j in art_cols:
        obj[j] = Fraction(-1)
    full.append(obj)
    for i in range(m):
        full[-1] = [x + y for x, y in zip(full[-1], full[i])]
    _simplex(full, basis, width + m)
    if full[-1][-1] != 0:
        raise Infeasible()
    # drive remaining artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= width:
            enter = next((j for j in range(width) if full[i][j] != 0), None)
            if enter is not None:
                piv = full[i][enter]
                full[i] = [x / piv for x in full[i]]
                for k in range(len(full)):
                    if k != i and full[k][enter] != 0:
                        f = full[k][enter]
                        full[k] = [x - f * y for x, y in zip(full[k], full[i])]
                basis[i] = enter

    # phase 2
    full.pop()
    obj = [Fraction(0)] * (width + m) + [Fraction(0)]
    for j in range(n):
        obj[j] = Fraction(c[j])
        obj[n + j] = -Fraction(c[j])
    for j in art_cols:
        obj[j] = Fraction(-10**30)  # keep artificials out
    full.append(obj)
    for i in range(m):
        bj = basis[i]
        if full[-1][bj] != 0:
            f = full[-1][bj]
            full[-1] = [x - f * y for x, y in zip(full[-1], full[i])]
    _simplex(full, basis, width + m)

    x = [Fraction(0)] * (2 * n)
    for i in range(m):
        if basis[i] < 2 * n:
            x[basis[i]] = full[i][-1]
    sol = tuple(x[j] - x[n + j] for j in range(n))
    val = sum(Fraction(c[j]) * sol[j] for j in range(n))
    return sol, val


def lp_feasible(a_ub=(), b_ub=(), a_eq=(), b_eq=(), n=None):
    """Feasibility check; returns a point or None."""
    if n is None:
        for row in list(a_ub) + list(a_eq):
            n = len(row)
            break
        else:
            return ()
    try:
        x, _ = lp_solve([0] * n, a_ub, b_ub, a_eq, b_eq)
        return x
    except Infeasible:
        return None


def strict_interior_point(a_strict, a_eq=(), b_eq=(), bound=1):
    """A rational point with a_strict x > 0 (componentwise) and a_eq x = b_eq.

    Works on homogeneous strict systems (cones): maximizes the minimal slack t
    subject to |x_i| <= bound.  Returns None if no strictly feasible point.
    """
    rows = [list(r) for r in a_strict]
    if not rows and not a_eq:
        return None
    n = len(rows[0]) if rows else len(a_eq[0])
    # variables (x, t): maximize t
    a_ub = []
    b_ub = []
    for r in rows:
        a_ub.append([-v for v in r] + [1])  # t - r.x <= 0
        b_ub.append(0)
    for i in range(n):
        e = [0] * n
        e[i] = 1
        a_ub.append(e + [0])
        b_ub.append(bound)
        a_ub.append([-v for v in e] + [0])
        b_ub.append(bound)
    a_ub.append([0] * n + [1])
    b_ub.append(1)
    eqs = [list(r) + [0] for r in a_eq]
    try:
        x, val = lp_solve([0] * n + [1], a_ub, b_ub, eqs, list(b_eq))
    except Infeasible:
        return None
    if val <= 0:
        return None
    return tuple(x[:n])
