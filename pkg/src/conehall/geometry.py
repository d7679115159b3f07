"""Exact rational geometry of closed semilinear sets under the l-infinity metric.

Closed semilinear sets are finite unions of H-represented polyhedra.  The
fuzzy pre-order U <= V (containment in some finite thickening of V) is
decided exactly on canonical cone skeletons; meets, joins, thickenings and
point distances are all computed in Fraction arithmetic so that containment
and emptiness answers are never approximate.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Sequence

from .exactlp import OPTIMAL, UNBOUNDED, feasible, feasible_with_strict, solve_lp

MAX_DIM = 4

Vec = tuple[Fraction, ...]


def _vec(values: Iterable) -> Vec:
    return tuple(Fraction(v) for v in values)


def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum(a * b for a, b in zip(u, v))


@dataclass(frozen=True)
class HalfSpace:
    """normal . x <= offset (strict: normal . x < offset)."""

    normal: Vec
    offset: Fraction
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "normal", _vec(self.normal))
        object.__setattr__(self, "offset", Fraction(self.offset))
        if all(v == 0 for v in self.normal):
            raise ValueError("half-space normal must be nonzero")

    def normalized(self) -> "HalfSpace":
        """Scale so the coefficients are coprime integers (sign preserved)."""
        denoms = [v.denominator for v in self.normal] + [self.offset.denominator]
        lcm = 1
        for d in denoms:
            lcm = lcm * d // gcd(lcm, d)
        ints = [int(v * lcm) for v in self.normal] + [int(self.offset * lcm)]
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        g = g or 1
        return HalfSpace(
            tuple(Fraction(int(v * lcm), g) for v in self.normal),
            Fraction(int(self.offset * lcm), g),
            self.strict,
        )

    def contains(self, x: Sequence) -> bool:
        lhs = _dot(self.normal, _vec(x))
        return lhs < self.offset if self.strict else lhs <= self.offset

    def to_json(self) -> dict:
        d = {"normal": [str(v) for v in self.normal], "offset": str(self.offset)}
        if self.strict:
            d["strict"] = True
        return d

    @staticmethod
    def from_json(d: dict) -> "HalfSpace":
        return HalfSpace(
            tuple(Fraction(s) for s in d["normal"]),
            Fraction(d["offset"]),
            bool(d.get("strict", False)),
        )


@dataclass(frozen=True)
class Polyhedron:
    """Intersection of closed half-spaces; an empty list means all of R^n."""

    halfspaces: tuple[HalfSpace, ...]
    dim: int

    def __post_init__(self):
        if not (1 <= self.dim <= MAX_DIM):
            raise ValueError(f"ambient dimension must be in 1..{MAX_DIM}")
        hs = tuple(self.halfspaces)
        for h in hs:
            if len(h.normal) != self.dim:
                raise ValueError("half-space dimension mismatch")
            if h.strict:
                raise ValueError("polyhedra use non-strict half-spaces only")
        object.__setattr__(self, "halfspaces", hs)

    # -- basic predicates ------------------------------------------------

    def _ab(self) -> tuple[list[list[Fraction]], list[Fraction]]:
        return [list(h.normal) for h in self.halfspaces], [h.offset for h in self.halfspaces]

    def is_empty(self) -> bool:
        a, b = self._ab()
        return not feasible(a, b, self.dim)

    def contains(self, x: Sequence) -> bool:
        p = _vec(x)
        return all(h.contains(p) for h in self.halfspaces)

    def is_cone(self) -> bool:
        return all(h.offset == 0 for h in self.halfspaces)

    def interior_point(self) -> Vec | None:
        """A point strictly inside every half-space, if one exists."""
        ok, x = feasible_with_strict(
            [], [], [list(h.normal) for h in self.halfspaces],
            [h.offset for h in self.halfspaces], self.dim,
        )
        return _vec(x) if ok else None

    def dedupe(self) -> "Polyhedron":
        seen, out = set(), []
        for h in self.halfspaces:
            key = h.normalized()
            if key not in seen:
                seen.add(key)
                out.append(key)
        return Polyhedron(tuple(out), self.dim)

    def remove_redundant(self) -> "Polyhedron":
        """Drop half-spaces implied by the others (exact LP test)."""
        hs = list(self.dedupe().halfspaces)
        i = 0
        while i < len(hs):
            others = hs[:i] + hs[i + 1:]
            a = [list(h.normal) for h in others]
            b = [h.offset for h in others]
            res = solve_lp(list(hs[i].normal), a, b)
            if res.status == OPTIMAL and res.value <= hs[i].offset:
                hs.pop(i)
            else:
                i += 1
        return Polyhedron(tuple(hs), self.dim)

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return Polyhedron(self.halfspaces + other.halfspaces, self.dim)

    def distance(self, x: Sequence) -> Fraction:
        """Exact l-infinity distance from a point; raises if empty."""
        p = _vec(x)
        n = self.dim
        # variables (y, t): minimize t s.t. y in P, |x_i - y_i| <= t
        rows: list[list[Fraction]] = []
        rhs: list[Fraction] = []
        for h in self.halfspaces:
            rows.append(list(h.normal) + [Fraction(0)])
            rhs.append(h.offset)
        for i in range(n):
            r1 = [Fraction(0)] * (n + 1)
            r1[i] = Fraction(-1)
            r1[n] = Fraction(-1)
            rows.append(r1)  # -y_i - t <= -x_i
            rhs.append(-p[i])
            r2 = [Fraction(0)] * (n + 1)
            r2[i] = Fraction(1)
            r2[n] = Fraction(-1)
            rows.append(r2)  # y_i - t <= x_i
            rhs.append(p[i])
        c = [Fraction(0)] * n + [Fraction(-1)]  # max -t
        res = solve_lp(c, rows, rhs)
        if res.status != OPTIMAL:
            raise ValueError("distance to an empty polyhedron is undefined")
        return -res.value

    def to_json(self) -> dict:
        return {"halfspaces": [h.to_json() for h in self.halfspaces]}

    @staticmethod
    def from_json(d: dict, dim: int) -> "Polyhedron":
        return Polyhedron(tuple(HalfSpace.from_json(h) for h in d["halfspaces"]), dim)


def box_polyhedron(lo: Sequence, hi: Sequence) -> Polyhedron:
    lo, hi = _vec(lo), _vec(hi)
    n = len(lo)
    hs = []
    for i in range(n):
        e = [Fraction(0)] * n
        e[i] = Fraction(1)
        hs.append(HalfSpace(tuple(e), hi[i]))
        e2 = [Fraction(0)] * n
        e2[i] = Fraction(-1)
        hs.append(HalfSpace(tuple(e2), -lo[i]))
    return Polyhedron(tuple(hs), n)


def point_polyhedron(x: Sequence) -> Polyhedron:
    p = _vec(x)
    return box_polyhedron(p, p)


@dataclass(frozen=True)
class SemilinearSet:
    """Nonempty finite union of nonempty polyhedra."""

    pieces: tuple[Polyhedron, ...]
    dim: int

    def __post_init__(self):
        kept = tuple(p for p in self.pieces if not p.is_empty())
        if not kept:
            raise ValueError("semilinear sets must be nonempty")
        for p in kept:
            if p.dim != self.dim:
                raise ValueError("piece dimension mismatch")
        object.__setattr__(self, "pieces", kept)

    def contains(self, x: Sequence) -> bool:
        return any(p.contains(x) for p in self.pieces)

    def distance(self, x: Sequence) -> Fraction:
        return min(p.distance(x) for p in self.pieces)

    def to_json(self) -> dict:
        return {"dim": self.dim, "pieces": [p.to_json() for p in self.pieces]}

    @staticmethod
    def from_json(d: dict) -> "SemilinearSet":
        dim = int(d["dim"])
        return SemilinearSet(
            tuple(Polyhedron.from_json(p, dim) for p in d["pieces"]), dim
        )

    @staticmethod
    def loads(s: str) -> "SemilinearSet":
        return SemilinearSet.from_json(json.loads(s))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def whole_space(n: int) -> SemilinearSet:
    return SemilinearSet((Polyhedron((), n),), n)


def from_halfspaces(rows: Sequence[Sequence], offsets: Sequence, n: int) -> SemilinearSet:
    hs = tuple(HalfSpace(_vec(r), Fraction(b)) for r, b in zip(rows, offsets))
    return SemilinearSet((Polyhedron(hs, n),), n)


@dataclass(frozen=True)
class ConeComplex:
    """Union of line-free polyhedral cones with apex 0; the spherical skeleton.

    An empty cone list means the source set was bounded (its set at the
    sphere at infinity is empty); `bounded` records that.
    """

    cones: tuple[Polyhedron, ...]
    dim: int
    bounded: bool = False

    def __post_init__(self):
        for k in self.cones:
            if not k.is_cone():
                raise ValueError("cone complexes require zero offsets")
        if self.bounded and self.cones:
            raise ValueError("bounded complexes carry no cones")
        if not self.bounded and not self.cones:
            raise ValueError("unbounded complexes need at least one cone")

    def as_semilinear(self) -> SemilinearSet:
        if self.bounded:
            return SemilinearSet((point_polyhedron([0] * self.dim),), self.dim)
        return SemilinearSet(self.cones, self.dim)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "bounded": self.bounded,
            "cones": [k.to_json() for k in self.cones],
        }


@dataclass(frozen=True)
class TransversalityWitness:
    constant: Fraction
    sample_bound: Fraction

    def __post_init__(self):
        if self.constant < self.sample_bound:
            raise ValueError("declared constant must dominate the sampled bound")


@dataclass(frozen=True)
class Ray:
    """Witness of a failed fuzzy inclusion: d(t*direction, V) is unbounded."""

    direction: Vec


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination and thickening


def _fm_eliminate(rows: list[list[Fraction]], rhs: list[Fraction], col: int,
                  keep_cols: list[int]) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Eliminate one variable; returns rows restricted to keep_cols order."""
    pos, neg, zero = [], [], []
    for r, b in zip(rows, rhs):
        if r[col] > 0:
            pos.append((r, b))
        elif r[col] < 0:
            neg.append((r, b))
        else:
            zero.append((r, b))
    out_rows, out_rhs = [], []
    for r, b in zero:
        out_rows.append([r[j] for j in keep_cols])
        out_rhs.append(b)
    for (rp, bp), (rn, bn) in itertools.product(pos, neg):
        cp, cn = rp[col], -rn[col]
        # cn*rp + cp*rn has zero coefficient at col
        row = [cn * rp[j] + cp * rn[j] for j in keep_cols]
        out_rows.append(row)
        out_rhs.append(cn * bp + cp * bn)
    return out_rows, out_rhs


def _normalize_row(row: list[Fraction], b: Fraction) -> tuple[tuple[Fraction, ...], Fraction]:
    lcm = 1
    for v in list(row) + [b]:
        lcm = lcm * v.denominator // gcd(lcm, v.denominator)
    ints = [int(v * lcm) for v in row] + [int(b * lcm)]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    g = g or 1
    return tuple(Fraction(v, g) for v in ints[:-1]), Fraction(ints[-1], g)


def _prune(rows: list[list[Fraction]], rhs: list[Fraction], n: int) -> tuple[list, list]:
    """Dedupe and remove redundant inequalities via exact LP.

    Works on raw rows so it can run mid-elimination, when the number of
    columns exceeds the ambient dimension cap.
    """
    seen = set()
    kept_rows: list[list[Fraction]] = []
    kept_rhs: list[Fraction] = []
    for row, b in zip(rows, rhs):
        if all(v == 0 for v in row):
            if b < 0:
                raise AssertionError("elimination produced an infeasible system")
            continue
        nr, nb = _normalize_row(row, b)
        if (nr, nb) in seen:
            continue
        seen.add((nr, nb))
        kept_rows.append(list(nr))
        kept_rhs.append(nb)
    i = 0
    while i < len(kept_rows):
        others = kept_rows[:i] + kept_rows[i + 1:]
        orhs = kept_rhs[:i] + kept_rhs[i + 1:]
        res = solve_lp(kept_rows[i], others, orhs)
        if res.status == OPTIMAL and res.value <= kept_rhs[i]:
            kept_rows.pop(i)
            kept_rhs.pop(i)
        else:
            i += 1
    return kept_rows, kept_rhs


def thicken_polyhedron(p: Polyhedron, r) -> Polyhedron:
    """Minkowski sum with the l-infinity ball [-r, r]^n, exactly.

    Eliminates the auxiliary copy of the space from
    {(x, y) : y in P, |x_i - y_i| <= r} by Fourier-Motzkin, pruning
    redundant rows after each elimination step.
    """
    r = Fraction(r)
    if r < 0:
        raise ValueError("thickening radius must be nonnegative")
    n = p.dim
    # variables x_0..x_{n-1}, y_0..y_{n-1}
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for h in p.halfspaces:
        rows.append([Fraction(0)] * n + list(h.normal))
        rhs.append(h.offset)
    for i in range(n):
        row = [Fraction(0)] * (2 * n)
        row[i] = Fraction(1)
        row[n + i] = Fraction(-1)
        rows.append(list(row))  # x_i - y_i <= r
        rhs.append(r)
        rows.append([-v for v in row])  # y_i - x_i <= r
        rhs.append(r)
    ncols = 2 * n
    for _ in range(n):
        # eliminate the last remaining column (a y variable)
        col = ncols - 1
        keep = list(range(col))
        rows, rhs = _fm_eliminate(rows, rhs, col, keep)
        ncols -= 1
        if rows:
            rows, rhs = _prune(rows, rhs, ncols)
    hs = tuple(
        HalfSpace(tuple(row), b).normalized()
        for row, b in zip(rows, rhs)
        if any(v != 0 for v in row)
    )
    return Polyhedron(hs, n)


def thicken(s: SemilinearSet, r) -> SemilinearSet:
    """r-thickening {x : d(x, S) <= r}, piecewise exact."""
    r = Fraction(r)
    if r == 0:
        return s
    return SemilinearSet(tuple(thicken_polyhedron(p, r) for p in s.pieces), s.dim)


def distance_linf(x: Sequence, s: SemilinearSet) -> Fraction:
    return s.distance(x)


# ---------------------------------------------------------------------------
# Canonical cone skeletons


def _row_space_rank(rows: list[Vec]) -> int:
    mat = [list(r) for r in rows]
    rank, m = 0, len(mat)
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, m) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = 1 / mat[rank][col]
        mat[rank] = [v * inv for v in mat[rank]]
        for i in range(m):
            if i != rank and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def _complete_to_span(normals: list[Vec], n: int) -> list[Vec]:
    """Standard basis vectors extending the normals to a spanning set."""
    rows = list(normals)
    extra: list[Vec] = []
    for j in range(n):
        if _row_space_rank(rows) == n:
            break
        e = tuple(Fraction(1 if i == j else 0) for i in range(n))
        if _row_space_rank(rows + [e]) > _row_space_rank(rows):
            rows.append(e)
            extra.append(e)
    return extra


def _cone_is_origin(k: Polyhedron) -> bool:
    """Does the cone {A x <= 0} contain only the origin?"""
    n = k.dim
    for i in range(n):
        for sign in (1, -1):
            # feasibility of K with x_i = sign
            e = [Fraction(0)] * n
            e[i] = Fraction(sign)
            rows = [list(h.normal) for h in k.halfspaces]
            rhs = [h.offset for h in k.halfspaces]
            rows.append(list(e))
            rhs.append(Fraction(1))
            rows.append([-v for v in e])
            rhs.append(Fraction(-1))
            if feasible(rows, rhs, n):
                return False
    return True


def canonicalize(s: SemilinearSet) -> ConeComplex:
    """Canonical conical skeleton: the spherical CS set of S.

    Each piece's offsets are zeroed (a polyhedron is fuzzy-isomorphic to its
    recession cone), cones whose normals do not span are split along
    completing coordinate directions until line-free, and trivial cones are
    dropped.  An empty result marks a bounded set.
    """
    n = s.dim
    out: list[Polyhedron] = []
    seen: set[tuple] = set()
    for piece in s.pieces:
        base = Polyhedron(
            tuple(HalfSpace(h.normal, Fraction(0)) for h in piece.halfspaces), n
        ).dedupe()
        stack = [base]
        while stack:
            k = stack.pop()
            normals = [h.normal for h in k.halfspaces]
            extra = _complete_to_span(normals, n)
            if extra:
                m = extra[0]
                for sign in (1, -1):
                    h = HalfSpace(tuple(sign * v for v in m), Fraction(0))
                    stack.append(Polyhedron(k.halfspaces + (h,), n))
                continue
            if _cone_is_origin(k):
                continue
            k = k.remove_redundant()
            key = tuple(sorted((h.normal, h.offset) for h in (x.normalized() for x in k.halfspaces)))
            if key not in seen:
                seen.add(key)
                out.append(k)
    if not out:
        return ConeComplex((), n, bounded=True)
    return ConeComplex(tuple(out), n, bounded=False)


# ---------------------------------------------------------------------------
# The fuzzy pre-order


def _nonzero_point(k: Polyhedron) -> Vec:
    """Some nonzero point of a cone that is not just the origin."""
    n = k.dim
    for i in range(n):
        for sign in (1, -1):
            e = [Fraction(0)] * n
            e[i] = Fraction(sign)
            rows = [list(h.normal) for h in k.halfspaces] + [list(e), [-v for v in e]]
            rhs = [h.offset for h in k.halfspaces] + [Fraction(1), Fraction(-1)]
            res = solve_lp([Fraction(0)] * n, rows, rhs)
            if res.status == OPTIMAL:
                return res.x
    raise ValueError("cone is the origin only")


def _cone_in_union(k: Polyhedron, cones: Sequence[Polyhedron]) -> tuple[bool, Vec | None]:
    """Is the cone K contained in the union of the cones?  DFS over the
    complement decomposition with exact strict-feasibility pruning; on
    failure returns a point of K outside every cone."""
    n = k.dim
    base_rows = [list(h.normal) for h in k.halfspaces]
    base_rhs = [h.offset for h in k.halfspaces]

    def dfs(idx: int, strict_rows: list, strict_rhs: list) -> Vec | None:
        ok, x = feasible_with_strict(base_rows, base_rhs, strict_rows, strict_rhs, n)
        if not ok:
            return None
        if idx == len(cones):
            return _vec(x)
        for h in cones[idx].halfspaces:
            # escape through the complement of this half-space: normal.x > 0
            w = dfs(idx + 1, strict_rows + [[-v for v in h.normal]], strict_rhs + [-h.offset])
            if w is not None:
                return w
        return None

    if not cones:
        witness = dfs(len(cones), [], [])
        # K nonempty and union empty: contained only if K = {0}
        return (_cone_is_origin(k), witness)
    witness = dfs(0, [], [])
    return (witness is None), witness


def _subset_of_thickening(u: SemilinearSet, v: SemilinearSet, r: Fraction) -> bool:
    """Exact test of U subseteq V^r."""
    thick = [thicken_polyhedron(q, r) for q in v.pieces]
    for p in u.pieces:
        base_rows = [list(h.normal) for h in p.halfspaces]
        base_rhs = [h.offset for h in p.halfspaces]

        def dfs(idx: int, srows: list, srhs: list) -> bool:
            """True iff some point of P escapes every thickened piece."""
            ok, _ = feasible_with_strict(base_rows, base_rhs, srows, srhs, p.dim)
            if not ok:
                return False
            if idx == len(thick):
                return True
            for h in thick[idx].halfspaces:
                if dfs(idx + 1, srows + [[-x for x in h.normal]], srhs + [-h.offset]):
                    return True
            return False

        if dfs(0, [], []):
            return False
    return True


def fuzzy_leq(u: SemilinearSet, v: SemilinearSet):
    """Decide U <= V in the fuzzy pre-order.

    Returns (True, r) with an exact integer radius such that U is inside
    V^r, or (False, Ray) with a direction along which d(x, V) is unbounded.
    """
    sku = canonicalize(u)
    skv = canonicalize(v)
    if not sku.bounded:
        if skv.bounded:
            # an unbounded set never fits inside a bounded one
            return False, Ray(_nonzero_point(sku.cones[0]))
        for k in sku.cones:
            ok, witness = _cone_in_union(k, skv.cones)
            if not ok:
                return False, Ray(witness)
    # containment holds at infinity; find a certificate radius
    r = Fraction(0)
    while not _subset_of_thickening(u, v, r):
        r = r * 2 if r > 0 else Fraction(1)
        if r > Fraction(2) ** 40:
            raise AssertionError("certificate search runaway; skeleton logic wrong")
    if r > 0:
        lo, hi = r // 2, r
        while lo < hi:
            mid = (lo + hi) // 2
            if _subset_of_thickening(u, v, mid):
                hi = mid
            else:
                lo = mid + 1
        r = hi
    return True, r


def fuzzy_isomorphic(u: SemilinearSet, v: SemilinearSet) -> bool:
    return fuzzy_leq(u, v)[0] and fuzzy_leq(v, u)[0]


def join(u: SemilinearSet, v: SemilinearSet) -> SemilinearSet:
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    return SemilinearSet(u.pieces + v.pieces, u.dim)


def _piece_distance(p: Polyhedron, q: Polyhedron) -> Fraction:
    """Exact l-infinity distance between two nonempty polyhedra."""
    n = p.dim
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    # variables (x, y, t)
    for h in p.halfspaces:
        rows.append(list(h.normal) + [Fraction(0)] * (n + 1))
        rhs.append(h.offset)
    for h in q.halfspaces:
        rows.append([Fraction(0)] * n + list(h.normal) + [Fraction(0)])
        rhs.append(h.offset)
    for i in range(n):
        row = [Fraction(0)] * (2 * n + 1)
        row[i], row[n + i], row[2 * n] = Fraction(1), Fraction(-1), Fraction(-1)
        rows.append(list(row))
        rhs.append(Fraction(0))
        row = [Fraction(0)] * (2 * n + 1)
        row[i], row[n + i], row[2 * n] = Fraction(-1), Fraction(1), Fraction(-1)
        rows.append(list(row))
        rhs.append(Fraction(0))
    c = [Fraction(0)] * (2 * n) + [Fraction(-1)]
    res = solve_lp(c, rows, rhs)
    if res.status != OPTIMAL:
        raise ValueError("piece distance undefined")
    return -res.value


def meet(u: SemilinearSet, v: SemilinearSet, prune: bool = False) -> SemilinearSet:
    """A meet of U and V in the fuzzy pre-order.

    Pairs of pieces sharing a point (all cones with a common apex do) are
    intersected directly; otherwise both sets are first thickened by the
    smallest integer radius making every piece pair intersect.
    """
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    r = Fraction(0)
    for p, q in itertools.product(u.pieces, v.pieces):
        d = _piece_distance(p, q)
        if d > 0:
            need = -((-d) // 2)  # ceil(d / 2)
            r = max(r, Fraction(need))
    up = [thicken_polyhedron(p, r) for p in u.pieces] if r > 0 else list(u.pieces)
    vp = [thicken_polyhedron(q, r) for q in v.pieces] if r > 0 else list(v.pieces)
    pieces = []
    for p, q in itertools.product(up, vp):
        inter = p.intersect(q).dedupe()
        if not inter.is_empty():
            pieces.append(inter.remove_redundant() if prune else inter)
    if not pieces:
        return SemilinearSet((point_polyhedron([0] * u.dim),), u.dim)
    return SemilinearSet(tuple(pieces), u.dim)


def piece_is_bounded(p: Polyhedron) -> bool:
    """A polyhedron is bounded iff its recession cone is trivial."""
    rec = Polyhedron(
        tuple(HalfSpace(h.normal, Fraction(0)) for h in p.halfspaces), p.dim
    )
    return _cone_is_origin(rec)


def is_bounded(s: SemilinearSet) -> bool:
    return all(piece_is_bounded(p) for p in s.pieces)


# ---------------------------------------------------------------------------
# Transversality estimation and Voronoi predicates


def _grid_points(n: int, radius: int, step: Fraction) -> Iterable[Vec]:
    count = int(Fraction(radius) / step)
    axis = [step * i for i in range(-count, count + 1)]
    return (tuple(p) for p in itertools.product(axis, repeat=n))


def transversality_constant(
    u: SemilinearSet, v: SemilinearSet, radius: int = 6, step=Fraction(1)
) -> TransversalityWitness:
    """Sampled estimate of the best constant in
    d(x, U cap V) <= C max(d(x, U), d(x, V)).

    The intersection is taken after meet-level thickening; the result is a
    grid estimate, not a certificate.
    """
    r = Fraction(0)
    for p, q in itertools.product(u.pieces, v.pieces):
        d = _piece_distance(p, q)
        if d > 0:
            r = max(r, -((-d) // 2))
    up = [thicken_polyhedron(p, r) for p in u.pieces] if r > 0 else list(u.pieces)
    vp = [thicken_polyhedron(q, r) for q in v.pieces] if r > 0 else list(v.pieces)
    inter = []
    for p, q in itertools.product(up, vp):
        w = p.intersect(q)
        if not w.is_empty():
            inter.append(w)
    if not inter:
        raise ValueError("intersection empty even after meet-level thickening")
    su = SemilinearSet(tuple(up), u.dim)
    sv = SemilinearSet(tuple(vp), v.dim)
    sw = SemilinearSet(tuple(inter), u.dim)
    best = Fraction(0)
    for x in _grid_points(u.dim, radius, Fraction(step)):
        du, dv = su.distance(x), sv.distance(x)
        m = max(du, dv)
        if m == 0:
            continue
        best = max(best, sw.distance(x) / m)
    declared = max(Fraction(1), best)
    return TransversalityWitness(declared, best)


@dataclass(frozen=True)
class VoronoiRegions:
    """Membership and distance-comparison predicates for the regions
    U' = {d(.,U) <= d(.,V)} and V' = {d(.,V) <= d(.,U)}."""

    u: SemilinearSet
    v: SemilinearSet

    def in_u_prime(self, x: Sequence) -> bool:
        return self.u.distance(x) <= self.v.distance(x)

    def in_v_prime(self, x: Sequence) -> bool:
        return self.v.distance(x) <= self.u.distance(x)

    def d_union(self, x: Sequence) -> Fraction:
        return min(self.u.distance(x), self.v.distance(x))


def voronoi_regions(u: SemilinearSet, v: SemilinearSet) -> VoronoiRegions:
    return VoronoiRegions(u, v)


# ---------------------------------------------------------------------------
# Convenience constructors for cones

def cone_from_rays(rays: Sequence[Sequence], dim: int) -> Polyhedron:
    """2-d helper: the cone spanned between two rays (counterclockwise)."""
    if dim != 2 or len(rays) != 2:
        raise ValueError("only 2-d two-ray cones supported")
    (a1, a2), (b1, b2) = (_vec(rays[0]), _vec(rays[1]))
    # normals point outwards: rotate ray a by -90deg, ray b by +90deg
    h1 = HalfSpace((Fraction(a2), Fraction(-a1)), Fraction(0))
    h2 = HalfSpace((Fraction(-b2), Fraction(b1)), Fraction(0))
    return Polyhedron((h1, h2), 2)


def sector_cover(num: int) -> list[SemilinearSet]:
    """Cover of R^2 by `num` cones with a common apex at the origin.

    Rational ray directions approximating equal sectors; consecutive rays
    bound each sector, so adjacent sectors share a boundary ray.
    """
    if num < 3:
        raise ValueError("need at least three sectors")
    dirs = _rational_circle(num)
    out = []
    for i in range(num):
        k = cone_from_rays([dirs[i], dirs[(i + 1) % num]], 2)
        out.append(SemilinearSet((k,), 2))
    return out


def _rational_circle(num: int) -> list[Vec]:
    """num rational unit-ish directions in counterclockwise order."""
    from math import cos, pi, sin

    dirs = []
    for i in range(num):
        a = 2 * pi * i / num
        x = Fraction(round(cos(a) * 720), 720)
        y = Fraction(round(sin(a) * 720), 720)
        dirs.append((x, y))
    return dirs
