"""Cech chain complexes valued in pre-cosheaves of Lie algebras, with the
graded bracket, central curvature cycle, and the inhomogeneous
Maurer-Cartan solver.

Chains embed into (values) tensor (exterior algebra on the cover indices)
tensor (symmetric coefficient monomials); the differential is contraction
with the sum of dual basis covectors, which fixes every sign.  Degrees:
a component on a (p+1)-tuple with a Sym^k monomial has total degree
(p + 1) - 2k; the augmentation slot (empty tuple) contributes 0 - 2k.
Solutions of d(p) + [p,p]/2 = B are built order by order in the coefficient
grading: the leading term comes from the pre-cosheaf splitting, higher
defects are killed by a minimum-norm solve against the combinatorial
boundary matrix (exact because the complex is a cone at finite volume).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import intlat
from .geometry import SemilinearSet, join
from .nerve import Cochain, Cover, IndexTuple, Nerve, _sort_sign, coboundary

Monomial = tuple[int, ...]
SlotKey = tuple[IndexTuple, Monomial]


@dataclass
class PreCosheafHandle:
    """Callbacks tying the abstract complex to a concrete local Lie algebra.

    Values must support +, unary -, scalar *, and the callbacks below.
    `split` must be a right inverse of the sum map: split(x, U, V) returns
    (x_U, x_V) with x_U + x_V = x.
    """

    name: str
    bracket: Callable
    split: Callable
    norm: Callable
    dim: Callable
    average: Callable | None = None


class CechElement:
    """Finite sum of components keyed by (index tuple, Sym monomial)."""

    def __init__(self, handle: PreCosheafHandle, components: dict[SlotKey, object] | None = None):
        self.handle = handle
        self.components: dict[SlotKey, object] = dict(components or {})

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "CechElement") -> "CechElement":
        out = dict(self.components)
        for k, v in other.components.items():
            out[k] = out[k] + v if k in out else v
        return CechElement(self.handle, out)

    def __sub__(self, other: "CechElement") -> "CechElement":
        return self + other.scale(-1.0)

    def scale(self, a) -> "CechElement":
        a = float(a) if isinstance(a, Fraction) else a
        return CechElement(self.handle, {k: v * a for k, v in self.components.items()})

    def truncate(self, order: int) -> "CechElement":
        return CechElement(
            self.handle,
            {k: v for k, v in self.components.items() if len(k[1]) <= order},
        )

    def sym_part(self, order: int) -> "CechElement":
        return CechElement(
            self.handle,
            {k: v for k, v in self.components.items() if len(k[1]) == order},
        )

    def drop_tiny(self, tol: float = 1e-14) -> "CechElement":
        return CechElement(
            self.handle,
            {k: v for k, v in self.components.items() if self.handle.norm(v) > tol},
        )

    def norm(self) -> float:
        return max(
            (self.handle.norm(v) for v in self.components.values()), default=0.0
        )

    def degrees(self) -> set[int]:
        return {len(s) - 2 * len(mu) for (s, mu) in self.components}

    def chain_dict(self, degree: int, mu: Monomial) -> dict[IndexTuple, object]:
        return {
            s: v
            for (s, m), v in self.components.items()
            if m == mu and len(s) == degree + 1
        }


def cech_boundary(c: CechElement) -> CechElement:
    """Contraction with the sum of dual covectors; the augmentation slot is
    the empty tuple and C_0 components co-restrict into it."""
    out: dict[SlotKey, object] = {}
    for (s, mu), v in c.components.items():
        if len(s) == 0:
            continue
        for k in range(len(s)):
            face = s[:k] + s[k + 1:]
            contrib = v if (-1) ** k == 1 else v * (-1.0)
            key = (face, mu)
            out[key] = out[key] + contrib if key in out else contrib
    return CechElement(c.handle, out)


def cech_bracket(a: CechElement, b: CechElement, order: int | None = None) -> CechElement:
    """Graded bracket: exterior shuffle sign on the index tuples, commutative
    product on the Sym monomials, handle bracket on the values."""
    out: dict[SlotKey, object] = {}
    handle = a.handle
    for (s, mu), x in a.components.items():
        for (t, nu), y in b.components.items():
            if order is not None and len(mu) + len(nu) > order:
                continue
            if set(s) & set(t):
                continue
            merged, sign = _sort_sign(s + t)
            if sign == 0:
                continue
            val = handle.bracket(x, y)
            if sign < 0:
                val = val * (-1.0)
            key = (merged, tuple(sorted(mu + nu)))
            out[key] = out[key] + val if key in out else val
    return CechElement(handle, out)


@dataclass
class PointedDGLA:
    """The 1-shifted augmented Cech complex of a cover valued in a handle,
    pointed by a central curvature cycle of degree -2."""

    cover: Cover
    handle: PreCosheafHandle
    curvature: CechElement
    order: int = 2

    def __post_init__(self):
        for (s, mu) in self.curvature.components:
            if s != () or len(mu) != 1:
                raise ValueError(
                    "curvature must live in the augmentation slot at Sym order 1"
                )

    def boundary(self, c: CechElement) -> CechElement:
        return cech_boundary(c)

    def bracket(self, a: CechElement, b: CechElement) -> CechElement:
        return cech_bracket(a, b, self.order)

    def mc_defect(self, p: CechElement) -> CechElement:
        return (
            self.boundary(p)
            + self.bracket(p, p).scale(0.5)
            - self.curvature
        ).truncate(self.order)

    # -- combinatorics ---------------------------------------------------------

    def tuples(self, size: int) -> list[IndexTuple]:
        if size == 0:
            return [()]
        return sorted(itertools.combinations(range(len(self.cover)), size))

    def boundary_matrix(self, size: int) -> list[list[int]]:
        """Matrix of the boundary from tuples of `size` to tuples of size-1."""
        rows = self.tuples(size - 1)
        cols = self.tuples(size)
        row_index = {s: i for i, s in enumerate(rows)}
        mat = [[0] * len(cols) for _ in rows]
        for j, t in enumerate(cols):
            if len(t) == 1:
                mat[row_index[()]][j] += 1
                continue
            for k in range(len(t)):
                face = t[:k] + t[k + 1:]
                mat[row_index[face]][j] += (-1) ** k
        return mat

    def acyclicity_ranks(self) -> dict[int, int]:
        """Homology ranks of the augmented combinatorial complex, exact over
        the rationals; the complex at finite volume is this tensor the fiber,
        so vanishing here is vanishing of the full homology."""
        n = len(self.cover)
        ranks: dict[int, int] = {}
        dims = {size: len(self.tuples(size)) for size in range(0, n + 1)}
        rank_d = {
            size: intlat.rational_rank(self.boundary_matrix(size)) if size >= 1 else 0
            for size in range(0, n + 1)
        }
        for size in range(0, n + 1):
            incoming = rank_d.get(size + 1, 0)
            kernel = dims[size] - rank_d.get(size, 0)
            ranks[size] = kernel - incoming
        return ranks


class MCUnsolvableError(RuntimeError):
    def __init__(self, order: int, residual: float):
        super().__init__(
            f"Maurer-Cartan defect at coefficient order {order} is not exact "
            f"(residual {residual:.3e})"
        )
        self.order = order
        self.residual = residual


@dataclass
class MCElement:
    element: CechElement
    residuals: dict[int, float]
    order: int

    def residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def solve_mc(dgla: PointedDGLA, tol: float = 1e-9) -> MCElement:
    """Order-by-order solution of d(p) + [p,p]/2 = B.

    The Sym^1 part splits the curvature value across the cover with the
    handle's right splitting; each higher defect is a cycle in a single
    chain degree and is killed by the minimum-norm preimage under the
    combinatorial boundary (pseudoinverse acting slot-wise)."""
    cover = dgla.cover
    handle = dgla.handle

    # order 1: iterated splitting of every curvature component
    comps: dict[SlotKey, object] = {}
    m = len(cover)
    for (_, mu1), b_value in dgla.curvature.components.items():
        residual_value = b_value
        for i in range(m - 1):
            rest = cover.elements[i + 1]
            for u in cover.elements[i + 2:]:
                rest = join(rest, u)
            xi, residual_value = handle.split(residual_value, cover.elements[i], rest)
            comps[((i,), mu1)] = xi
        comps[((m - 1,), mu1)] = residual_value
    p = CechElement(handle, comps)

    residuals: dict[int, float] = {}
    defect = dgla.mc_defect(p)
    residuals[1] = defect.sym_part(1).norm()

    for k in range(2, dgla.order + 1):
        q = dgla.mc_defect(p).sym_part(k)
        if not q.components:
            residuals[k] = 0.0
            continue
        tuple_size = 2 * k - 2  # chain degree 2k-3
        target_size = 2 * k - 1
        cols = dgla.tuples(target_size) if target_size <= m else []
        if not cols:
            res = q.norm()
            residuals[k] = res
            if res > tol:
                raise MCUnsolvableError(k, res)
            continue
        mat = np.array(dgla.boundary_matrix(target_size), dtype=float)
        pinv = np.linalg.pinv(mat)
        rows = dgla.tuples(tuple_size)
        row_index = {s: i for i, s in enumerate(rows)}
        new_comps: dict[SlotKey, object] = {}
        for mu in {muk for (_, muk) in q.components}:
            qvec: dict[int, object] = {}
            for (s, muk), v in q.components.items():
                if muk == mu:
                    qvec[row_index[s]] = v
            for jcol, t in enumerate(cols):
                acc = None
                for i, v in qvec.items():
                    w = -pinv[jcol, i]
                    if abs(w) < 1e-15:
                        continue
                    term = v * w
                    acc = term if acc is None else acc + term
                if acc is not None and handle.norm(acc) > 1e-15:
                    new_comps[(t, mu)] = acc
        p = p + CechElement(handle, new_comps)
        res = dgla.mc_defect(p).sym_part(k).norm()
        residuals[k] = res
        if res > tol:
            raise MCUnsolvableError(k, res)
    return MCElement(p, residuals, dgla.order)


def gauge_act(dgla: PointedDGLA, a: CechElement, p: CechElement) -> CechElement:
    """exp(ad_a)(p) + (1 - exp(ad_a))/ad_a (da) for a degree-0 gauge
    parameter of positive coefficient order (hence nilpotent here)."""
    for (s, mu) in a.components:
        if len(s) - 2 * len(mu) != 0:
            raise ValueError("gauge parameters must be homogeneous of degree 0")
        if len(mu) < 1:
            raise ValueError("gauge parameters need positive coefficient order")
    # exp(ad_a) p
    out = p
    term = p
    for n in range(1, 2 * dgla.order + 2):
        term = dgla.bracket(a, term).scale(1.0 / n)  # ad_a^n(p) / n!
        if not term.components:
            break
        out = out + term
    # (1 - exp(ad_a)) / ad_a applied to da: -sum_{n>=0} ad_a^n(da) / (n+1)!
    da = dgla.boundary(a)
    series = da
    term = da
    for n in range(1, 2 * dgla.order + 2):
        term = dgla.bracket(a, term).scale(1.0 / n)  # ad_a^n(da) / n!
        if not term.components:
            break
        series = series + term.scale(1.0 / (n + 1))
    return (out - series).truncate(dgla.order)


def commutator_class(mc: MCElement, dgla: PointedDGLA) -> CechElement:
    """[p, p]: a cycle of the commutator subalgebra whose pairing with CS
    cocycles is the invariant (the homology quotient itself is not formed)."""
    return dgla.bracket(mc.element, mc.element)


def pair(
    dgla: PointedDGLA,
    f: CechElement,
    beta: Cochain,
    nv: Nerve,
    cycle_tol: float = 1e-8,
) -> dict[Monomial, complex]:
    """<f, beta> followed by the state average, one value per Sym monomial.

    Components on tuples with bounded meets contribute only where beta
    carries (pulled-back) values there; CS cochains are zero on them."""
    scale = 1.0 + f.norm()
    bf = cech_boundary(f)
    if bf.norm() > cycle_tol * scale:
        raise ValueError("pairing requires a cycle")
    cs_part = Cochain(
        beta.degree,
        {s: v for s, v in beta.values.items() if nv.is_simplex(s)},
    )
    if coboundary(nv, cs_part).values:
        raise ValueError("pairing requires a cocycle")
    if dgla.handle.average is None:
        raise ValueError("handle has no state average")
    sums: dict[Monomial, object] = {}
    for (s, mu), v in f.components.items():
        if len(s) != beta.degree + 1:
            continue
        w = beta.values.get(s, Fraction(0))
        if w == 0:
            continue
        term = v * float(w)
        sums[mu] = sums[mu] + term if mu in sums else term
    return {mu: dgla.handle.average(v) for mu, v in sums.items()}


def pushforward(dgla_fine: PointedDGLA, dgla_coarse: PointedDGLA, phi: Sequence[int],
                c: CechElement) -> CechElement:
    """Chain pushforward along a refinement map, per degree and monomial."""
    out: dict[SlotKey, object] = {}
    for (s, mu), v in c.components.items():
        if len(s) == 0:
            key = ((), mu)
            out[key] = out[key] + v if key in out else v
            continue
        img = tuple(phi[j] for j in s)
        sorted_img, sign = _sort_sign(img)
        if sign == 0:
            continue
        val = v if sign == 1 else v * (-1.0)
        key = (sorted_img, mu)
        out[key] = out[key] + val if key in out else val
    return CechElement(dgla_coarse.handle, out)
