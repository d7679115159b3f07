"""Exact rational linear programming over free variables.

Solves max c.x subject to A x <= b with x free, entirely in Fraction
arithmetic.  A two-phase primal simplex with Bland's rule guarantees
termination and exact answers; problem sizes here are tiny (ambient
dimension <= 4, a few dozen constraints), so clarity wins over speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: tuple[Fraction, ...] | None = None
    value: Fraction | None = None


def _to_fraction_matrix(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    return [[Fraction(v) for v in row] for row in rows]


class _Tableau:
    """Dense simplex tableau for min c.y, M y = rhs, y >= 0."""

    def __init__(self, m: list[list[Fraction]], rhs: list[Fraction]):
        self.m = m
        self.rhs = rhs
        self.nrows = len(m)
        self.ncols = len(m[0]) if m else 0
        self.basis: list[int] = [-1] * self.nrows

    def pivot(self, row: int, col: int) -> None:
        piv = self.m[row][col]
        inv = 1 / piv
        self.m[row] = [v * inv for v in self.m[row]]
        self.rhs[row] *= inv
        for r in range(self.nrows):
            if r == row:
                continue
            f = self.m[r][col]
            if f == 0:
                continue
            mrow = self.m[row]
            self.m[r] = [a - f * b for a, b in zip(self.m[r], mrow)]
            self.rhs[r] -= f * self.rhs[row]
        self.basis[row] = col

    def reduced_costs(self, cost: list[Fraction]) -> tuple[list[Fraction], Fraction]:
        # cost of current basic solution and reduced cost row via y = cB . B^-1 N
        lam = [cost[self.basis[r]] for r in range(self.nrows)]
        red = list(cost)
        obj = Fraction(0)
        for r in range(self.nrows):
            lr = lam[r]
            if lr == 0:
                continue
            row = self.m[r]
            for j in range(self.ncols):
                if row[j] != 0:
                    red[j] -= lr * row[j]
            obj += lr * self.rhs[r]
        return red, obj

    def run(self, cost: list[Fraction]) -> str:
        """Minimize cost over the current basis; Bland's rule."""
        while True:
            red, _ = self.reduced_costs(cost)
            enter = -1
            for j in range(self.ncols):
                if red[j] < 0 and j not in self.basis:
                    enter = j
                    break
            if enter < 0:
                return OPTIMAL
            leave = -1
            best: Fraction | None = None
            for r in range(self.nrows):
                a = self.m[r][enter]
                if a > 0:
                    ratio = self.rhs[r] / a
                    if best is None or ratio < best or (
                        ratio == best and self.basis[r] < self.basis[leave]
                    ):
                        best = ratio
                        leave = r
            if leave < 0:
                return UNBOUNDED
            self.pivot(leave, enter)

    def solution(self, nvars: int) -> list[Fraction]:
        x = [Fraction(0)] * nvars
        for r, b in enumerate(self.basis):
            if b < nvars:
                x[b] = self.rhs[r]
        return x


def solve_lp(c: Sequence, a_rows: Sequence[Sequence], b: Sequence) -> LPResult:
    """max c.x  s.t.  a_rows[i] . x <= b[i],  x free.

    Returns an LPResult whose x attains the optimum when status is
    "optimal".  Unboundedness and infeasibility are reported exactly.
    """
    c = [Fraction(v) for v in c]
    a = _to_fraction_matrix(a_rows)
    b = [Fraction(v) for v in b]
    n = len(c)
    nrows = len(a)
    for row in a:
        if len(row) != n:
            raise ValueError("constraint row length mismatch")

    # Standard form: x = u - v with u,v >= 0, slack s >= 0:
    #   [A, -A, I] [u; v; s] = b,  minimize -c.(u - v)
    ncols = 2 * n + nrows
    m = []
    rhs = []
    for i in range(nrows):
        row = [Fraction(0)] * ncols
        for j in range(n):
            row[j] = a[i][j]
            row[n + j] = -a[i][j]
        row[2 * n + i] = Fraction(1)
        if b[i] < 0:
            row = [-v for v in row]
            rhs.append(-b[i])
        else:
            rhs.append(b[i])
        m.append(row)

    if nrows == 0:
        # no constraints: optimum is 0 at origin iff c == 0, else unbounded
        if any(v != 0 for v in c):
            return LPResult(UNBOUNDED)
        return LPResult(OPTIMAL, tuple(Fraction(0) for _ in range(n)), Fraction(0))

    # Phase 1 with artificial variables.
    tab = _Tableau([row + [Fraction(0)] * nrows for row in m], list(rhs))
    tab.ncols = ncols + nrows
    for i in range(nrows):
        tab.m[i][ncols + i] = Fraction(1)
        tab.basis[i] = ncols + i
    phase1_cost = [Fraction(0)] * ncols + [Fraction(1)] * nrows
    status = tab.run(phase1_cost)
    assert status == OPTIMAL  # phase 1 is always bounded below by 0
    _, obj = tab.reduced_costs(phase1_cost)
    if obj != 0:
        return LPResult(INFEASIBLE)
    # Drive artificial variables out of the basis where possible.
    for r in range(tab.nrows):
        if tab.basis[r] >= ncols:
            for j in range(ncols):
                if tab.m[r][j] != 0:
                    tab.pivot(r, j)
                    break
    # Degenerate rows with artificial basics are all-zero; safe to keep.
    phase2_cost = [Fraction(0)] * tab.ncols
    for j in range(n):
        phase2_cost[j] = -c[j]
        phase2_cost[n + j] = c[j]
    # Forbid artificial re-entry by pricing them high.
    big = sum(abs(v) for v in c) + 1
    for j in range(ncols, tab.ncols):
        phase2_cost[j] = big
    status = tab.run(phase2_cost)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    y = tab.solution(2 * n)
    x = tuple(y[j] - y[n + j] for j in range(n))
    value = sum(ci * xi for ci, xi in zip(c, x))
    return LPResult(OPTIMAL, x, value)


def feasible(a_rows: Sequence[Sequence], b: Sequence, n: int) -> bool:
    """Is {x in R^n : A x <= b} nonempty?"""
    res = solve_lp([Fraction(0)] * n, a_rows, b)
    return res.status == OPTIMAL


def feasible_with_strict(
    a_rows: Sequence[Sequence],
    b: Sequence,
    strict_rows: Sequence[Sequence],
    strict_b: Sequence,
    n: int,
) -> tuple[bool, tuple[Fraction, ...] | None]:
    """Is {x : A x <= b, C x < d} nonempty?  Exact via a slack variable.

    Maximizes e subject to A x <= b, C x + e <= d, e <= 1; the strict
    system is feasible iff the optimum is positive.  Returns a witness
    point on success.
    """
    c = [Fraction(0)] * n + [Fraction(1)]
    rows = [list(r) + [Fraction(0)] for r in a_rows]
    rhs = list(b)
    for r, d in zip(strict_rows, strict_b):
        rows.append(list(r) + [Fraction(1)])
        rhs.append(d)
    rows.append([Fraction(0)] * n + [Fraction(1)])
    rhs.append(Fraction(1))
    res = solve_lp(c, rows, rhs)
    if res.status == UNBOUNDED:  # cannot happen: e is capped
        raise AssertionError("capped LP reported unbounded")
    if res.status == INFEASIBLE or res.value <= 0:
        return False, None
    return True, res.x[:n]
