"""Covers in the fuzzy site, their Cech nerves, and simplicial cohomology.

A tuple of cover indices is a simplex of the nerve when the iterated meet
of its members is unbounded (nonempty at the sphere at infinity); bounded
tuples are kept with flags because the pairing with derivation-valued
chains needs them.  Cohomology is computed over the rationals by exact
elimination; fundamental cocycles are integral generators extracted with
Hermite/Smith normal forms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import intlat
from .geometry import SemilinearSet, fuzzy_leq, is_bounded, join, meet

IndexTuple = tuple[int, ...]


def _insert_sign(s: IndexTuple, i: int) -> tuple[IndexTuple, int]:
    """Sorted insertion of i into s with the sign (-1)^position."""
    pos = sum(1 for x in s if x < i)
    t = tuple(sorted(s + (i,)))
    return t, (-1) ** pos


def _sort_sign(t: Sequence[int]) -> tuple[IndexTuple, int]:
    """Sort a tuple with repeated-entry detection; sign of the permutation."""
    if len(set(t)) != len(t):
        return tuple(t), 0
    perm = sorted(range(len(t)), key=lambda k: t[k])
    sign = 1
    seen = [False] * len(t)
    for start in range(len(t)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return tuple(sorted(t)), sign


@dataclass(frozen=True)
class Cover:
    """An ordered cover {U_i} of a base W in the fuzzy site."""

    base: SemilinearSet
    elements: tuple[SemilinearSet, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValueError("covers must be nonempty")

    @staticmethod
    def build(base: SemilinearSet, elements: Sequence[SemilinearSet], check: bool = True) -> "Cover":
        elements = tuple(elements)
        if check:
            for i, u in enumerate(elements):
                ok, _ = fuzzy_leq(u, base)
                if not ok:
                    raise ValueError(f"cover element {i} is not below the base")
            total = elements[0]
            for u in elements[1:]:
                total = join(total, u)
            ok, _ = fuzzy_leq(base, total)
            if not ok:
                raise ValueError("cover elements do not cover the base")
        return Cover(base, elements)

    def __len__(self) -> int:
        return len(self.elements)


@dataclass
class Nerve:
    """All index tuples with their meets' boundedness flags."""

    cover: Cover
    bounded: dict[IndexTuple, bool]
    meets: dict[IndexTuple, SemilinearSet] = field(repr=False, default_factory=dict)

    def is_simplex(self, s: IndexTuple) -> bool:
        return s in self.bounded and not self.bounded[s]

    def simplices(self, p: int) -> list[IndexTuple]:
        """Unbounded tuples of length p + 1, sorted lexicographically."""
        return sorted(s for s, b in self.bounded.items() if len(s) == p + 1 and not b)

    def all_tuples(self, p: int) -> list[IndexTuple]:
        return sorted(s for s in self.bounded if len(s) == p + 1)

    def max_degree(self) -> int:
        return len(self.cover) - 1

    def betti_numbers(self) -> list[int]:
        out = []
        for p in range(self.max_degree() + 1):
            if not self.simplices(p):
                break
            out.append(cohomology(self, p)[0])
        return out

    def to_json(self) -> dict:
        return {
            "simplices": [
                {"indices": list(s), "bounded": b}
                for s, b in sorted(self.bounded.items(), key=lambda kv: (len(kv[0]), kv[0]))
            ]
        }


def build_nerve(cover: Cover) -> Nerve:
    """Enumerate all index tuples, compute iterated meets, flag bounded ones."""
    idx = range(len(cover))
    meets: dict[IndexTuple, SemilinearSet] = {}
    bounded: dict[IndexTuple, bool] = {}
    for i in idx:
        meets[(i,)] = cover.elements[i]
        bounded[(i,)] = is_bounded(cover.elements[i])
    for size in range(2, len(cover) + 1):
        for s in itertools.combinations(idx, size):
            prefix, last = s[:-1], s[-1]
            if bounded[prefix]:
                # meet of a bounded set with anything stays bounded
                meets[s] = meets[prefix]
                bounded[s] = True
                continue
            m = meet(meets[prefix], cover.elements[last])
            meets[s] = m
            bounded[s] = is_bounded(m)
    return Nerve(cover, bounded, meets)


@dataclass(frozen=True)
class Cochain:
    """Antisymmetric rational cochain stored on sorted index tuples.

    Values on tuples with bounded meets are zero by convention for CS
    cochains; pullbacks along refinements may populate them (they are
    needed when pairing against derivation-valued chains).
    """

    degree: int
    values: dict[IndexTuple, Fraction]

    def __post_init__(self):
        clean = {
            s: Fraction(v)
            for s, v in self.values.items()
            if v != 0
        }
        for s in clean:
            if len(s) != self.degree + 1:
                raise ValueError("tuple length does not match degree")
            if list(s) != sorted(set(s)):
                raise ValueError("tuples must be strictly increasing")
        object.__setattr__(self, "values", clean)

    def __getitem__(self, s: Sequence[int]) -> Fraction:
        t, sign = _sort_sign(tuple(s))
        if sign == 0:
            return Fraction(0)
        return sign * self.values.get(t, Fraction(0))

    def __add__(self, other: "Cochain") -> "Cochain":
        vals = dict(self.values)
        for s, v in other.values.items():
            vals[s] = vals.get(s, Fraction(0)) + v
        return Cochain(self.degree, vals)

    def __neg__(self) -> "Cochain":
        return Cochain(self.degree, {s: -v for s, v in self.values.items()})

    def scale(self, a) -> "Cochain":
        a = Fraction(a)
        return Cochain(self.degree, {s: a * v for s, v in self.values.items()})

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "values": {",".join(map(str, s)): str(v) for s, v in sorted(self.values.items())},
        }

    @staticmethod
    def from_json(d: dict) -> "Cochain":
        vals = {
            tuple(int(x) for x in k.split(",")): Fraction(v)
            for k, v in d["values"].items()
        }
        return Cochain(int(d["degree"]), vals)


def coboundary(nv: Nerve, beta: Cochain) -> Cochain:
    """Simplicial coboundary restricted to unbounded simplices."""
    out: dict[IndexTuple, Fraction] = {}
    for t in nv.simplices(beta.degree + 1):
        acc = Fraction(0)
        for k in range(len(t)):
            face = t[:k] + t[k + 1:]
            acc += (-1) ** k * beta.values.get(face, Fraction(0))
        if acc != 0:
            out[t] = acc
    return Cochain(beta.degree + 1, out)


def is_cocycle(nv: Nerve, beta: Cochain) -> bool:
    return not coboundary(nv, beta).values


def _delta_matrix(nv: Nerve, p: int) -> tuple[list[list[int]], list[IndexTuple], list[IndexTuple]]:
    """Integer matrix of delta: C^p -> C^{p+1} on unbounded simplices."""
    rows = nv.simplices(p + 1)
    cols = nv.simplices(p)
    col_index = {s: j for j, s in enumerate(cols)}
    mat = [[0] * len(cols) for _ in rows]
    for i, t in enumerate(rows):
        for k in range(len(t)):
            face = t[:k] + t[k + 1:]
            j = col_index.get(face)
            if j is not None:
                mat[i][j] += (-1) ** k
    return mat, rows, cols


def cohomology(nv: Nerve, p: int) -> tuple[int, list[Cochain]]:
    """Betti number and representative cocycles in degree p, over Q."""
    cols = nv.simplices(p)
    if not cols:
        return 0, []
    d_p, _, _ = _delta_matrix(nv, p)
    kernel = intlat.rational_nullspace(d_p) if d_p else [
        [Fraction(1) if i == j else Fraction(0) for i in range(len(cols))]
        for j in range(len(cols))
    ]
    if p == 0:
        image_rows: list[list[Fraction]] = []
    else:
        d_prev, rows_prev, cols_prev = _delta_matrix(nv, p - 1)
        image_rows = [
            [Fraction(d_prev[i][j]) for i in range(len(rows_prev))]
            for j in range(len(cols_prev))
        ]
    # rank bookkeeping: representatives are kernel vectors independent mod image
    reps: list[Cochain] = []
    basis = [row[:] for row in image_rows]
    base_rank = intlat.rational_rank(basis) if basis else 0
    rank = 0
    for vec in kernel:
        cand = basis + [list(vec)]
        if intlat.rational_rank(cand) > base_rank + rank:
            basis = cand
            rank += 1
            reps.append(Cochain(p, {s: v for s, v in zip(cols, vec) if v != 0}))
    return rank, reps


def fundamental_cocycle(nv: Nerve, orientation: int = 1) -> Cochain:
    """Integral generator of H^{n-1} of the nerve, deterministically normalized.

    Requires the rational cohomology in degree n-1 to have rank one.  The
    generator is computed from the integer kernel lattice modulo the image
    lattice via Smith normal form, reduced to a canonical representative
    and sign-fixed lexicographically; `orientation` in {+1, -1} flips it.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    n = nv.cover.base.dim
    p = n - 1
    rank, _ = cohomology(nv, p)
    if rank != 1:
        raise ValueError(f"degree-{p} cohomology has rank {rank}, need 1")
    cols = nv.simplices(p)
    d_p, _, _ = _delta_matrix(nv, p)
    if not d_p:
        kernel = intlat.identity(len(cols))
    else:
        kernel = intlat.integer_kernel_basis(d_p)
    # image lattice of delta_{p-1} inside Z^{cols}
    if p == 0:
        image_vecs: list[list[int]] = []
    else:
        d_prev, _, _ = _delta_matrix(nv, p - 1)
        ncols_prev = len(d_prev[0]) if d_prev else 0
        image_vecs = [
            [d_prev[i][j] for i in range(len(d_prev))] for j in range(ncols_prev)
        ]
    kt = [[kernel[r][i] for r in range(len(kernel))] for i in range(len(cols))]
    coords = []
    for v in image_vecs:
        c = intlat.solve_integer(kt, v)
        if c is None:
            raise AssertionError("image vector outside the saturated kernel")
        coords.append(c)
    k = len(kernel)
    cmat = [[coords[g][i] for g in range(len(coords))] for i in range(k)]
    if coords:
        d, u, _ = intlat.smith_with_transforms(cmat)
        free = [
            i for i in range(k)
            if i >= min(len(d), len(d[0]) if d else 0) or d[i][i] == 0
        ]
    else:
        u = intlat.identity(k)
        free = list(range(k))
    if len(free) != 1:
        raise AssertionError("free rank of the cohomology lattice is not 1")
    e = [1 if i == free[0] else 0 for i in range(k)]
    x = intlat.solve_integer(u, e)
    gen = [sum(x[r] * kernel[r][i] for r in range(k)) for i in range(len(cols))]
    # canonical representative modulo the image lattice; the lexicographically
    # smaller of the reduced +/- representatives defines orientation +1
    red = _reduce_mod_lattice(gen, image_vecs)
    red_neg = _reduce_mod_lattice([-v for v in gen], image_vecs)
    gen = min(red, red_neg)
    vals = {s: Fraction(orientation * v) for s, v in zip(cols, gen) if v != 0}
    return Cochain(p, vals)


def _reduce_mod_lattice(v: list[int], lattice_gens: list[list[int]]) -> list[int]:
    """Canonical residue of v modulo the integer lattice spanned by the rows."""
    if not lattice_gens:
        return list(v)
    h, _ = intlat.hnf_with_transform([list(g) for g in lattice_gens])
    h = [row for row in h if any(row)]
    out = list(v)
    for row in h:
        piv = next(j for j, x in enumerate(row) if x != 0)
        q = out[piv] // row[piv]
        if q:
            out = [a - q * b for a, b in zip(out, row)]
    return out


# ---------------------------------------------------------------------------
# Refinements


@dataclass(frozen=True)
class Refinement:
    """A refinement fine -> coarse along an index map phi with
    V_j <= U_{phi(j)} for every j."""

    coarse: Cover
    fine: Cover
    phi: tuple[int, ...]

    @staticmethod
    def build(coarse: Cover, fine: Cover, phi: Sequence[int], check: bool = True) -> "Refinement":
        phi = tuple(int(i) for i in phi)
        if len(phi) != len(fine):
            raise ValueError("phi must map every fine index")
        if any(not (0 <= i < len(coarse)) for i in phi):
            raise ValueError("phi image out of range")
        if check:
            for j, i in enumerate(phi):
                ok, _ = fuzzy_leq(fine.elements[j], coarse.elements[i])
                if not ok:
                    raise ValueError(
                        f"refinement violated: fine element {j} not below coarse element {i}"
                    )
        return Refinement(coarse, fine, phi)

    def pullback(self, beta: Cochain) -> Cochain:
        """(phi* beta)_{j0..jk} = beta_{phi(j0)..phi(jk)} with antisymmetry.

        Produces values on every fine tuple whose image supports beta,
        including tuples with bounded meets (the pairing needs those).
        """
        out: dict[IndexTuple, Fraction] = {}
        nfine = len(self.fine)
        for t in itertools.combinations(range(nfine), beta.degree + 1):
            img = tuple(self.phi[j] for j in t)
            sorted_img, sign = _sort_sign(img)
            if sign == 0:
                continue
            v = beta.values.get(sorted_img, Fraction(0))
            if v != 0:
                out[t] = sign * v
        return Cochain(beta.degree, out)

    def pushforward(self, chain: dict[IndexTuple, object], degree: int) -> dict[IndexTuple, object]:
        """(phi_* c)_{i0..ik} collects fine components over the fibers."""
        out: dict[IndexTuple, object] = {}
        for t, val in chain.items():
            if len(t) != degree + 1:
                raise ValueError("chain tuple length mismatch")
            img = tuple(self.phi[j] for j in t)
            s, sign = _sort_sign(img)
            if sign == 0:
                continue
            contrib = val if sign == 1 else _negate(val)
            if s in out:
                out[s] = out[s] + contrib
            else:
                out[s] = contrib
        return out


def _negate(v):
    try:
        return -v
    except TypeError:
        return v * (-1)


def chain_boundary_map(chain: dict[IndexTuple, object], index_count: int) -> dict[IndexTuple, object]:
    """Boundary of a tuple-indexed chain: (d c)_s = sum_i sign * c_{s + i}."""
    out: dict[IndexTuple, object] = {}
    degrees = {len(s) for s in chain}
    if not degrees:
        return {}
    if len(degrees) != 1:
        raise ValueError("mixed-degree chain")
    size = degrees.pop()
    if size == 1:
        return {}
    for t, val in chain.items():
        for k in range(len(t)):
            face = t[:k] + t[k + 1:]
            contrib = val if (-1) ** k == 1 else _negate(val)
            if face in out:
                out[face] = out[face] + contrib
            else:
                out[face] = contrib
    return out


def pair_cochain(chain: dict[IndexTuple, object], beta: Cochain):
    """<c, beta> = sum_s beta_s c_s over tuples present in both supports."""
    total = None
    for s, v in chain.items():
        b = beta.values.get(s, Fraction(0))
        if b == 0:
            continue
        term = v * b if not isinstance(v, Fraction) else b * v
        total = term if total is None else total + term
    return total
