"""Exact integer linear algebra: Smith normal form, kernels, cokernels, saturation.

Everything here works on immutable tuple-of-tuple matrices of Python ints, so
arbitrary precision comes for free.  All operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

IntMatrix = tuple[tuple[int, ...], ...]
IntVector = tuple[int, ...]


def matrix(rows) -> IntMatrix:
    """Freeze a nested iterable of ints into an IntMatrix."""
    m = tuple(tuple(int(x) for x in row) for row in rows)
    if m and any(len(r) != len(m[0]) for r in m):
        raise ValueError("ragged matrix")
    return m


def shape(m: IntMatrix) -> tuple[int, int]:
    return (len(m), len(m[0]) if m else 0)


def zeros(r: int, c: int) -> IntMatrix:
    return tuple(tuple(0 for _ in range(c)) for _ in range(r))


def identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(m: IntMatrix) -> IntMatrix:
    r, c = shape(m)
    return tuple(tuple(m[i][j] for i in range(r)) for j in range(c))


def mat_mul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ca != rb:
        raise ValueError(f"shape mismatch {shape(a)} @ {shape(b)}")
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(ca)) for j in range(cb))
        for i in range(ra)
    )


def mat_vec(a: IntMatrix, v) -> tuple:
    r, c = shape(a)
    if r == 0:
        return ()
    if len(v) != c:
        raise ValueError("shape mismatch")
    return tuple(sum(a[i][k] * v[k] for k in range(c)) for i in range(r))


def columns(m: IntMatrix) -> list[IntVector]:
    r, c = shape(m)
    return [tuple(m[i][j] for i in range(r)) for j in range(c)]


def from_columns(cols, nrows: int | None = None) -> IntMatrix:
    cols = list(cols)
    if not cols:
        if nrows is None:
            raise ValueError("need nrows for empty column list")
        return tuple(() for _ in range(nrows))
    r = len(cols[0])
    return tuple(tuple(col[i] for col in cols) for i in range(r))


def content(v) -> int:
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    return g


def primitive_vector(v: IntVector) -> IntVector:
    """v / gcd(entries); errors on the zero vector."""
    g = content(v)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in v)


@dataclass(frozen=True)
class SnfResult:
    """U @ M @ V == D with U, V unimodular and D in Smith normal form."""

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    Uinv: IntMatrix
    Vinv: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        r, c = shape(self.D)
        return tuple(self.D[i][i] for i in range(min(r, c)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def smith_normal_form(m: IntMatrix) -> SnfResult:
    """Smith normal form with unimodular transforms and their inverses.

    Pivots on a minimal-absolute-value nonzero entry to limit coefficient
    growth.  The diagonal is made nonnegative with d1 | d2 | ... | dr.
    """
    r, c = shape(m)
    a = [list(row) for row in m]
    u = [list(row) for row in identity(r)]
    uinv = [list(row) for row in identity(r)]
    v = [list(row) for row in identity(c)]
    vinv = [list(row) for row in identity(c)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]
        for k in range(r):
            uinv[k][i], uinv[k][j] = uinv[k][j], uinv[k][i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]
        vinv[i], vinv[j] = vinv[j], vinv[i]

    def add_row(src, dst, q):
        # row[dst] += q * row[src]
        for k in range(c):
            a[dst][k] += q * a[src][k]
        for k in range(r):
            u[dst][k] += q * u[src][k]
        for k in range(r):
            uinv[k][src] -= q * uinv[k][dst]

    def add_col(src, dst, q):
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]
        for k in range(c):
            vinv[src][k] -= q * vinv[dst][k]

    def negate_row(i):
        for k in range(c):
            a[i][k] = -a[i][k]
        for k in range(r):
            u[i][k] = -u[i][k]
        for k in range(r):
            uinv[k][i] = -uinv[k][i]

    n = min(r, c)
    for t in range(n):
        while True:
            # locate minimal |entry| != 0 in the trailing block
            pivot = None
            best = None
            for i in range(t, r):
                for j in range(t, c):
                    x = abs(a[i][j])
                    if x and (best is None or x < best):
                        best, pivot = x, (i, j)
            if pivot is None:
                break
            pi, pj = pivot
            if pi != t:
                swap_rows(t, pi)
            if pj != t:
                swap_cols(t, pj)
            clean = True
            for i in range(t + 1, r):
                q = a[i][t] // a[t][t]
                if q:
                    add_row(t, i, -q)
                if a[i][t]:
                    clean = False
            for j in range(t + 1, c):
                q = a[t][j] // a[t][t]
                if q:
                    add_col(t, j, -q)
                if a[t][j]:
                    clean = False
            if clean:
                break
        if t < r and t < c and a[t][t] < 0:
            negate_row(t)

    # enforce the divisibility chain
    changed = True
    while changed:
        changed = False
        for t in range(n - 1):
            dt, dn = a[t][t], a[t + 1][t + 1]
            if dn == 0 or dt == 0:
                continue
            if dn % dt:
                changed = True
                add_col(t + 1, t, 1)
                # re-diagonalize the 2x2 block
                while a[t + 1][t] or a[t][t + 1]:
                    if a[t][t] == 0 or (a[t + 1][t] and abs(a[t + 1][t]) < abs(a[t][t])):
                        swap_rows(t, t + 1)
                    if a[t][t]:
                        q = a[t + 1][t] // a[t][t]
                        if q:
                            add_row(t, t + 1, -q)
                        if a[t + 1][t] == 0 and a[t][t + 1]:
                            q = a[t][t + 1] // a[t][t]
                            add_col(t, t + 1, -q)
                if a[t][t] < 0:
                    negate_row(t)
                if a[t + 1][t + 1] < 0:
                    negate_row(t + 1)

    # push zero diagonal entries to the back
    for t in range(n):
        if t < r and t < c and a[t][t] == 0:
            for s in range(t + 1, n):
                if a[s][s] != 0:
                    swap_rows(t, s)
                    swap_cols(t, s)
                    break

    res = SnfResult(
        U=matrix(u), D=matrix(a), V=matrix(v), Uinv=matrix(uinv), Vinv=matrix(vinv)
    )
    assert mat_mul(mat_mul(res.U, m), res.V) == res.D
    assert mat_mul(res.U, res.Uinv) == identity(r)
    assert mat_mul(res.V, res.Vinv) == identity(c)
    d = [x for x in res.diagonal if x]
    assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))
    return res


def rank(m: IntMatrix) -> int:
    r, c = shape(m)
    if r == 0 or c == 0:
        return 0
    return smith_normal_form(m).rank


def kernel_basis(m: IntMatrix) -> list[IntVector]:
    """Basis of the saturated integer kernel {x : m @ x = 0}, as columns."""
    r, c = shape(m)
    if c == 0:
        return []
    if r == 0:
        return columns(identity(c))
    s = smith_normal_form(m)
    return columns(s.V)[s.rank:]


def image_basis(m: IntMatrix) -> list[IntVector]:
    """Basis (as columns in the ambient) of the subgroup spanned by m's columns."""
    r, c = shape(m)
    if r == 0:
        return []
    s = smith_normal_form(m)
    cols = columns(s.Uinv)
    return [
        tuple(x * s.D[i][i] for x in cols[i]) for i in range(min(r, c)) if s.D[i][i]
    ]


@dataclass(frozen=True)
class FgAbelianGroup:
    """Finitely generated abelian group Z^free_rank + sum Z/f, f the invariant factors."""

    free_rank: int
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        if any(f <= 1 for f in self.invariant_factors):
            raise ValueError("invariant factors must be > 1")
        fs = self.invariant_factors
        if any(fs[i + 1] % fs[i] for i in range(len(fs) - 1)):
            raise ValueError("invariant factors must form a divisibility chain")

    @property
    def torsion_order(self) -> int:
        n = 1
        for f in self.invariant_factors:
            n *= f
        return n

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.invariant_factors


@dataclass(frozen=True)
class CokernelResult:
    """Cokernel Z^r / im(M) together with a projection in canonical coordinates.

    free_proj has free_rank rows; applying it to x in Z^r gives the free
    coordinates of [x].  torsion_proj[i] paired with invariant_factors[i]
    gives the residue mod that factor.
    """

    group: FgAbelianGroup
    free_proj: IntMatrix
    torsion_proj: IntMatrix

    def project(self, x: IntVector) -> tuple[IntVector, IntVector]:
        free = mat_vec(self.free_proj, x)
        tors = tuple(
            mat_vec(self.torsion_proj, x)[i] % f
            for i, f in enumerate(self.group.invariant_factors)
        )
        return free, tors


def cokernel(m: IntMatrix) -> CokernelResult:
    """Z^rows / image(M), with canonical projection maps."""
    r, c = shape(m)
    if r == 0:
        return CokernelResult(FgAbelianGroup(0), zeros(0, 0), zeros(0, 0))
    if c == 0:
        return CokernelResult(FgAbelianGroup(r), identity(r), zeros(0, r))
    s = smith_normal_form(m)
    diag = s.diagonal
    free_rows = [i for i in range(r) if i >= len(diag) or diag[i] == 0]
    tors_rows = [i for i in range(r) if i < len(diag) and diag[i] > 1]
    factors = tuple(diag[i] for i in tors_rows)
    free_proj = tuple(s.U[i] for i in free_rows)
    tors_proj = tuple(s.U[i] for i in tors_rows)
    return CokernelResult(FgAbelianGroup(len(free_rows), factors), free_proj, tors_proj)


def saturation(m: IntMatrix) -> IntMatrix:
    """Basis (columns) of the saturation of the column span of m in Z^rows.

    Requires independent columns; the index of the input lattice inside the
    saturation equals the product of the nonunit invariant factors.
    """
    r, c = shape(m)
    if c == 0:
        return tuple(() for _ in range(r))
    s = smith_normal_form(m)
    if s.rank != c:
        raise ValueError("not a sublattice basis")
    cols = columns(s.Uinv)[:c]
    return from_columns(cols, r)


def saturation_index(m: IntMatrix) -> int:
    """Index [saturation : column span]; the torsion order of the cokernel."""
    s = smith_normal_form(m)
    n = 1
    for d in s.diagonal:
        if d:
            n *= d
    return n


def solve_integer(m: IntMatrix, target: IntVector) -> IntVector | None:
    """One integer solution x of m @ x = target, or None."""
    r, c = shape(m)
    if len(target) != r:
        raise ValueError("shape mismatch")
    if c == 0:
        return () if all(t == 0 for t in target) else None
    s = smith_normal_form(m)
    y = mat_vec(s.U, target)
    diag = s.diagonal
    z = []
    for i in range(c):
        d = diag[i] if i < len(diag) else 0
        yi = y[i] if i < r else 0
        if d == 0:
            if i < r and yi != 0:
                return None
            z.append(0)
        else:
            if yi % d:
                return None
            z.append(yi // d)
    for i in range(c, r):
        if y[i] != 0:
            return None
    return mat_vec(s.V, tuple(z))


def solve_rational(m, target):
    """One rational solution x of m @ x = target (Fractions), or None."""
    r = len(m)
    c = len(m[0]) if r else 0
    a = [[Fraction(m[i][j]) for j in range(c)] + [Fraction(target[i])] for i in range(r)]
    piv_cols = []
    row = 0
    for col in range(c):
        piv = next((i for i in range(row, r) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = a[row][col]
        a[row] = [x / inv for x in a[row]]
        for i in range(r):
            if i != row and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[row])]
        piv_cols.append(col)
        row += 1
        if row == r:
            break
    for i in range(row, r):
        if a[i][c] != 0:
            return None
    x = [Fraction(0)] * c
    for i, col in enumerate(piv_cols):
        x[col] = a[i][c]
    return tuple(x)
