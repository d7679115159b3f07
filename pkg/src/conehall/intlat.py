"""Small exact integer matrix algorithms: Hermite and Smith normal forms
with unimodular transforms, integer kernels, and lattice membership.

Everything here operates on lists of Python ints; matrices are tiny
(nerve-sized), so the textbook algorithms are plenty.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = list[list[int]]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in a]
    cols = len(b[0])
    return [
        [sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(cols)]
        for i in range(len(a))
    ]


def hnf_with_transform(m: Matrix) -> tuple[Matrix, Matrix]:
    """Row-style Hermite normal form: returns (H, U) with U @ m = H and
    U unimodular.  H is in row echelon form with positive pivots and
    entries above each pivot reduced."""
    h = [row[:] for row in m]
    rows = len(h)
    cols = len(h[0]) if h else 0
    u = identity(rows)

    def rowop(i, j, a, b, c, d):
        # (row_i, row_j) <- (a*row_i + b*row_j, c*row_i + d*row_j)
        for mat in (h, u):
            ri, rj = mat[i], mat[j]
            mat[i] = [a * x + b * y for x, y in zip(ri, rj)]
            mat[j] = [c * x + d * y for x, y in zip(ri, rj)]

    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if h[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            h[r], h[piv] = h[piv], h[r]
            u[r], u[piv] = u[piv], u[r]
        for i in range(r + 1, rows):
            # Euclid on the pivot column: reduce then swap, until row i clears
            while h[i][c] != 0:
                q = h[r][c] // h[i][c]
                rowop(r, i, 1, -q, 0, 1)
                h[r], h[i] = h[i], h[r]
                u[r], u[i] = u[i], u[r]
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            q = h[i][c] // h[r][c]
            if q:
                h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                u[i] = [x - q * y for x, y in zip(u[i], u[r])]
        r += 1
    return h, u


def integer_kernel_basis(a: Matrix) -> Matrix:
    """Basis (rows) of the saturated lattice {x in Z^m : a @ x = 0}."""
    if not a:
        return identity(0)
    m = len(a[0])
    at = [[a[i][j] for i in range(len(a))] for j in range(m)]
    h, u = hnf_with_transform(at)
    out = [u[i] for i in range(m) if all(v == 0 for v in h[i])]
    return out


def smith_with_transforms(m: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form: returns (D, U, V) with U @ m @ V = D diagonal,
    U and V unimodular, and each diagonal entry dividing the next."""
    d = [row[:] for row in m]
    rows = len(d)
    cols = len(d[0]) if d else 0
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def addmul_row(dst, src, q):
        d[dst] = [x + q * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def addmul_col(dst, src, q):
        for row in d:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    t = 0
    while t < min(rows, cols):
        # find a nonzero pivot in the remaining block
        piv = None
        for i in range(t, rows):
            for j in range(t, cols):
                if d[i][j] != 0:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            done = True
            for i in range(t + 1, rows):
                if d[i][t] != 0:
                    q = d[i][t] // d[t][t]
                    addmul_row(i, t, -q)
                    if d[i][t] != 0:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, cols):
                if d[t][j] != 0:
                    q = d[t][j] // d[t][t]
                    addmul_col(j, t, -q)
                    if d[t][j] != 0:
                        swap_cols(t, j)
                        done = False
            if done and all(d[i][t] == 0 for i in range(t + 1, rows)) and all(
                d[t][j] == 0 for j in range(t + 1, cols)
            ):
                break
        # divisibility fix-up
        bad = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if d[i][j] % d[t][t] != 0:
                    bad = (i, j)
                    break
            if bad:
                break
        if bad:
            addmul_row(t, bad[0], 1)
            continue
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return d, u, v


def solve_integer(a: Matrix, b: list[int]) -> list[int] | None:
    """One integer solution x of a @ x = b, or None."""
    if not a:
        return [] if all(v == 0 for v in b) else None
    rows, cols = len(a), len(a[0])
    d, u, v = smith_with_transforms(a)
    ub = [sum(u[i][k] * b[k] for k in range(rows)) for i in range(rows)]
    y = [0] * cols
    for i in range(rows):
        di = d[i][i] if i < cols else 0
        if di == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % di != 0:
                return None
            if i < cols:
                y[i] = ub[i] // di
    return [sum(v[i][k] * y[k] for k in range(cols)) for i in range(cols)]


def rational_rank(a: list[list]) -> int:
    """Exact rank over Q via fraction Gaussian elimination."""
    mat = [[Fraction(x) for x in row] for row in a]
    rank = 0
    rows = len(mat)
    cols = len(mat[0]) if mat else 0
    for c in range(cols):
        piv = next((i for i in range(rank, rows) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = 1 / mat[rank][c]
        mat[rank] = [x * inv for x in mat[rank]]
        for i in range(rows):
            if i != rank and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def rational_nullspace(a: list[list]) -> list[list[Fraction]]:
    """Basis of the rational kernel {x : a @ x = 0} as rows."""
    mat = [[Fraction(x) for x in row] for row in a]
    rows = len(mat)
    cols = len(mat[0]) if mat else 0
    pivots: list[int] = []
    rank = 0
    for c in range(cols):
        piv = next((i for i in range(rank, rows) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = 1 / mat[rank][c]
        mat[rank] = [x * inv for x in mat[rank]]
        for i in range(rows):
            if i != rank and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[rank])]
        pivots.append(c)
        rank += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * cols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -mat[r][f]
        basis.append(vec)
    return basis
