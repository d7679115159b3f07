"""Brick-decomposed operator algebra on a finite lattice truncation.

Operators are dense complex matrices over the tensor factors of the sites
inside a brick (an axis-aligned integer-corner box).  A derivation is a
finitely supported map from bricks to traceless anti-hermitian matrices,
each orthogonal to every strictly smaller brick subalgebra; partial traces
realize those orthogonal projections, and the recursive inclusion-exclusion
decomposition is exact at finite volume.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .geometry import SemilinearSet, box_polyhedron

DEFAULT_DIM_CAP = 2 ** 12

Site = tuple[int, ...]


@dataclass(frozen=True)
class Brick:
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if len(lo) != len(hi):
            raise ValueError("corner length mismatch")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("bricks must be nonempty")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def diam(self) -> int:
        return max(b - a for a, b in zip(self.lo, self.hi))

    def sites(self) -> list[Site]:
        return [
            tuple(p)
            for p in itertools.product(
                *(range(a, b + 1) for a, b in zip(self.lo, self.hi))
            )
        ]

    def contains_brick(self, other: "Brick") -> bool:
        return all(a <= c and d <= b for a, c, d, b in zip(self.lo, other.lo, other.hi, self.hi))

    def contains_site(self, site: Site) -> bool:
        return all(a <= s <= b for a, s, b in zip(self.lo, site, self.hi))

    def intersects(self, other: "Brick") -> bool:
        return all(
            max(a1, a2) <= min(b1, b2)
            for a1, b1, a2, b2 in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def join(self, other: "Brick") -> "Brick":
        return Brick(
            tuple(min(a, c) for a, c in zip(self.lo, other.lo)),
            tuple(max(b, d) for b, d in zip(self.hi, other.hi)),
        )

    def distance(self, other: "Brick") -> int:
        return max(
            max(0, a2 - b1, a1 - b2)
            for a1, b1, a2, b2 in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def distance_point(self, x: Sequence) -> Fraction:
        return max(
            (max(Fraction(0), Fraction(a) - Fraction(v), Fraction(v) - Fraction(b))
             for a, b, v in zip(self.lo, self.hi, x)),
            default=Fraction(0),
        )

    def sub_bricks(self) -> Iterable["Brick"]:
        axes = [
            [(a, b) for a in range(lo, hi + 1) for b in range(a, hi + 1)]
            for lo, hi in zip(self.lo, self.hi)
        ]
        for combo in itertools.product(*axes):
            yield Brick(tuple(c[0] for c in combo), tuple(c[1] for c in combo))

    def as_semilinear(self) -> SemilinearSet:
        return SemilinearSet((box_polyhedron(self.lo, self.hi),), self.dim)

    def to_json(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}

    @staticmethod
    def from_json(d: dict) -> "Brick":
        return Brick(tuple(d["lo"]), tuple(d["hi"]))


def brick_join(x: Brick, y: Brick) -> Brick:
    return x.join(y)


class LatticeSystem:
    """Finite box truncation of Z^n with a qudit at every integer point."""

    def __init__(self, lo: Sequence[int], hi: Sequence[int], local_dim: int = 2,
                 dim_cap: int = DEFAULT_DIM_CAP):
        self.box = Brick(tuple(lo), tuple(hi))
        self.dim = self.box.dim
        self.local_dim = int(local_dim)
        self.sites: tuple[Site, ...] = tuple(sorted(self.box.sites()))
        self.site_index = {s: i for i, s in enumerate(self.sites)}
        total = self.local_dim ** len(self.sites)
        if total > dim_cap:
            raise ValueError(
                f"total Hilbert dimension {total} exceeds the cap {dim_cap}"
            )
        self.total_dim = total

    def site_dim(self, site: Site) -> int:
        return self.local_dim

    def brick_sites(self, brick: Brick) -> list[Site]:
        return [s for s in brick.sites() if s in self.site_index]

    def clip(self, brick: Brick) -> Brick:
        """Minimal brick with the same lattice sites (canonical key)."""
        sites = self.brick_sites(brick)
        if not sites:
            raise ValueError("brick contains no lattice sites")
        lo = tuple(min(s[i] for s in sites) for i in range(self.dim))
        hi = tuple(max(s[i] for s in sites) for i in range(self.dim))
        return Brick(lo, hi)

    def hilbert_dim(self, sites: Sequence[Site]) -> int:
        return self.local_dim ** len(sites)

    def box_bricks(self) -> list[Brick]:
        return list(self.box.sub_bricks())


# ---------------------------------------------------------------------------
# Tensor utilities


def embed(lat: LatticeSystem, mat: np.ndarray, frm: Sequence[Site], to: Sequence[Site]) -> np.ndarray:
    """Embed an operator on `frm` into the algebra of `to` (sorted site lists)."""
    frm, to = list(frm), list(to)
    if frm == to:
        return mat
    missing = [s for s in frm if s not in to]
    if missing:
        raise ValueError(f"sites {missing} not inside the target")
    extra = [s for s in to if s not in frm]
    d_extra = lat.hilbert_dim(extra)
    big = np.kron(mat, np.eye(d_extra, dtype=complex))
    order = frm + extra
    perm = [order.index(s) for s in to]
    dims = [lat.site_dim(s) for s in order]
    n = len(order)
    t = big.reshape(dims + dims)
    t = t.transpose(perm + [n + p for p in perm])
    d_to = lat.hilbert_dim(to)
    return np.ascontiguousarray(t.reshape(d_to, d_to))


def partial_trace_normalized(
    lat: LatticeSystem, mat: np.ndarray, sites: Sequence[Site], keep: Sequence[Site]
) -> np.ndarray:
    """tr-bar over the complement of `keep` inside `sites`; both sorted."""
    sites, keep = list(sites), list(keep)
    for s in keep:
        if s not in sites:
            raise ValueError(f"site {s} not in the support")
    if keep == sites:
        return mat
    traced = [s for s in sites if s not in keep]
    n = len(sites)
    dims = [lat.site_dim(s) for s in sites]
    perm = [sites.index(s) for s in keep] + [sites.index(s) for s in traced]
    t = mat.reshape(dims + dims).transpose(perm + [n + p for p in perm])
    dk = lat.hilbert_dim(keep)
    dt = lat.hilbert_dim(traced)
    t = t.reshape(dk, dt, dk, dt)
    out = np.einsum("abcb->ac", t)
    return out / dt


def normalized_trace(mat: np.ndarray) -> complex:
    return complex(np.trace(mat)) / mat.shape[0]


def operator_norm(mat: np.ndarray) -> float:
    if mat.size == 0:
        return 0.0
    return float(np.linalg.norm(mat, 2))


# ---------------------------------------------------------------------------
# Brick operators and derivations


@dataclass(frozen=True)
class BrickOperator:
    """A matrix intrinsically supported on its brick: traceless,
    anti-hermitian, and with vanishing partial trace onto every strictly
    smaller sub-brick."""

    brick: Brick
    matrix: np.ndarray

    def validate(self, lat: LatticeSystem, tol: float = 1e-10) -> None:
        m = self.matrix
        scale = 1.0 + operator_norm(m)
        if abs(normalized_trace(m)) > tol * scale:
            raise ValueError("brick operator is not traceless")
        if operator_norm(m + m.conj().T) > tol * scale:
            raise ValueError("brick operator is not anti-hermitian")
        sites = lat.brick_sites(self.brick)
        for sub in self.brick.sub_bricks():
            if sub == self.brick:
                continue
            keep = lat.brick_sites(sub)
            if not keep or keep == sites:
                continue
            red = partial_trace_normalized(lat, m, sites, keep)
            if operator_norm(red) > tol * scale:
                raise ValueError(f"partial trace onto {sub} does not vanish")


class AlmostLocalDerivation:
    """Finitely supported map from (canonical) bricks to brick operators."""

    def __init__(self, lat: LatticeSystem, comps: Mapping[Brick, np.ndarray] | None = None):
        self.lat = lat
        self.comps: dict[Brick, np.ndarray] = {}
        if comps:
            for b, m in comps.items():
                cb = lat.clip(b)
                if cb != b:
                    raise ValueError(f"brick {b} is not canonical (expected {cb})")
                self.comps[b] = np.asarray(m, dtype=complex)

    # -- linear structure --------------------------------------------------

    def __add__(self, other: "AlmostLocalDerivation") -> "AlmostLocalDerivation":
        out = dict(self.comps)
        for b, m in other.comps.items():
            out[b] = out[b] + m if b in out else m
        res = AlmostLocalDerivation(self.lat)
        res.comps = out
        return res

    def __sub__(self, other: "AlmostLocalDerivation") -> "AlmostLocalDerivation":
        return self + other * (-1)

    def __mul__(self, a) -> "AlmostLocalDerivation":
        a = complex(a) if not isinstance(a, (int, float, complex)) else a
        res = AlmostLocalDerivation(self.lat)
        res.comps = {b: m * a for b, m in self.comps.items()}
        return res

    __rmul__ = __mul__

    def __neg__(self) -> "AlmostLocalDerivation":
        return self * (-1.0)

    def copy(self) -> "AlmostLocalDerivation":
        res = AlmostLocalDerivation(self.lat)
        res.comps = {b: m.copy() for b, m in self.comps.items()}
        return res

    def drop_tiny(self, tol: float = 1e-13) -> "AlmostLocalDerivation":
        res = AlmostLocalDerivation(self.lat)
        res.comps = {
            b: m for b, m in self.comps.items() if operator_norm(m) > tol
        }
        return res

    def support(self) -> list[Brick]:
        return sorted(self.comps, key=lambda b: (b.lo, b.hi))

    # -- evaluation ----------------------------------------------------------

    def assemble(self) -> np.ndarray:
        """Sum of all components embedded into the full truncation."""
        full = list(self.lat.sites)
        out = np.zeros((self.lat.total_dim, self.lat.total_dim), dtype=complex)
        for b, m in self.comps.items():
            out += embed(self.lat, m, self.lat.brick_sites(b), full)
        return out

    def norm(self) -> float:
        return operator_norm(self.assemble()) if self.comps else 0.0

    def max_component_norm(self) -> float:
        return max((operator_norm(m) for m in self.comps.values()), default=0.0)

    def bracket(self, other: "AlmostLocalDerivation") -> "AlmostLocalDerivation":
        return commutator(self, other)

    def validate(self, tol: float = 1e-10) -> None:
        for b, m in self.comps.items():
            BrickOperator(b, m).validate(self.lat, tol)

    def to_json(self) -> dict:
        comps = []
        for b in self.support():
            m = self.comps[b]
            flat: list[float] = []
            for v in m.reshape(-1):
                flat.extend((float(v.real), float(v.imag)))
            comps.append({"brick": b.to_json(), "dim": m.shape[0], "entries": flat})
        return {"box_lo": list(self.lat.box.lo), "box_hi": list(self.lat.box.hi),
                "local_dim": self.lat.local_dim, "components": comps}

    @staticmethod
    def from_json(d: dict, lat: LatticeSystem | None = None) -> "AlmostLocalDerivation":
        if lat is None:
            lat = LatticeSystem(d["box_lo"], d["box_hi"], d.get("local_dim", 2))
        comps = {}
        for c in d["components"]:
            b = Brick.from_json(c["brick"])
            n = int(c["dim"])
            vals = np.array(c["entries"], dtype=float).reshape(n * n, 2)
            comps[b] = (vals[:, 0] + 1j * vals[:, 1]).reshape(n, n)
        return AlmostLocalDerivation(lat, comps)


def site_operator(lat: LatticeSystem, site: Site, mat: np.ndarray) -> AlmostLocalDerivation:
    """Single-site derivation component from a traceless anti-hermitian matrix."""
    b = Brick(site, site)
    return AlmostLocalDerivation(lat, {b: np.asarray(mat, dtype=complex)})


# ---------------------------------------------------------------------------
# Decomposition


def brick_decompose(lat: LatticeSystem, mat: np.ndarray, brick: Brick | None = None,
                    tol: float = 1e-9, drop: float = 1e-13) -> AlmostLocalDerivation:
    """Resolve a traceless anti-hermitian matrix into brick components.

    Recursively F^Y = trbar_{Y^c}(A) - sum_{X strictly inside Y} F^X over
    canonical sub-bricks; the components sum back to the input exactly and
    each is annihilated by partial traces onto smaller bricks.
    """
    if brick is None:
        brick = lat.box
    brick = lat.clip(brick)
    sites = lat.brick_sites(brick)
    if mat.shape[0] != lat.hilbert_dim(sites):
        raise ValueError("matrix dimension does not match the brick")
    scale = 1.0 + operator_norm(mat)
    if abs(normalized_trace(mat)) > tol * scale:
        raise ValueError("input must be traceless")
    if operator_norm(mat + mat.conj().T) > tol * scale:
        raise ValueError("input must be anti-hermitian")

    subs = sorted(
        {lat.clip(b) for b in brick.sub_bricks()},
        key=lambda b: (len(lat.brick_sites(b)), b.lo, b.hi),
    )
    comps: dict[Brick, np.ndarray] = {}
    for y in subs:
        keep = lat.brick_sites(y)
        acc = partial_trace_normalized(lat, mat, sites, keep)
        for x, fx in comps.items():
            if y.contains_brick(x) and x != y:
                acc = acc - embed(lat, fx, lat.brick_sites(x), keep)
        comps[y] = acc
    res = AlmostLocalDerivation(lat)
    res.comps = comps
    return res.drop_tiny(drop)


# ---------------------------------------------------------------------------
# Seminorms

Region = SemilinearSet | Brick | tuple


class _DistanceCache:
    def __init__(self):
        self.cache: dict[tuple, Fraction] = {}

    def brick_to_region(self, brick: Brick, region: Region) -> Fraction:
        if isinstance(region, Brick):
            return Fraction(brick.distance(region))
        if isinstance(region, tuple):
            return brick.distance_point(region)
        key = (brick, region)
        if key not in self.cache:
            self.cache[key] = _brick_set_distance(brick, region)
        return self.cache[key]


_dcache = _DistanceCache()


def _brick_set_distance(brick: Brick, s: SemilinearSet) -> Fraction:
    from .geometry import _piece_distance, box_polyhedron as _bp

    bp = _bp(brick.lo, brick.hi)
    return min(_piece_distance(bp, q) for q in s.pieces)


def region_distance(brick: Brick, region: Region) -> Fraction:
    """l-infinity distance between a brick and a region (exact)."""
    return _dcache.brick_to_region(brick, region)


def seminorm(f: AlmostLocalDerivation, region: Region, k: int) -> float:
    """sup over supported bricks of |F^Y| (1 + diam(Y) + d(U, Y))^k.

    Empty regions are unrepresentable (SemilinearSet is nonempty by
    construction), so d(U, Y) is always finite here.
    """
    best = 0.0
    for b, m in f.comps.items():
        w = float(1 + b.diam() + region_distance(b, region)) ** k
        best = max(best, operator_norm(m) * w)
    return best


# ---------------------------------------------------------------------------
# Lie bracket

_PAIRWISE_LIMIT = 256


def commutator(f: AlmostLocalDerivation, g: AlmostLocalDerivation,
               drop: float = 1e-13) -> AlmostLocalDerivation:
    """Brick-wise commutator: pairwise over supports when small, otherwise
    the equivalent global decomposition of [assemble(F), assemble(G)]."""
    lat = f.lat
    if lat.box != g.lat.box or lat.local_dim != g.lat.local_dim:
        raise ValueError("derivations live on different lattices")
    pairs = len(f.comps) * len(g.comps)
    if pairs == 0:
        return AlmostLocalDerivation(lat)
    if pairs > _PAIRWISE_LIMIT:
        m = f.assemble() @ g.assemble() - g.assemble() @ f.assemble()
        return brick_decompose(lat, m, drop=drop)
    acc: dict[Brick, np.ndarray] = {}
    for (x, fx), (y, gy) in itertools.product(f.comps.items(), g.comps.items()):
        if not x.intersects(y):
            continue
        j = lat.clip(x.join(y))
        sites = lat.brick_sites(j)
        a = embed(lat, fx, lat.brick_sites(x), sites)
        b = embed(lat, gy, lat.brick_sites(y), sites)
        c = a @ b - b @ a
        if operator_norm(c) <= drop:
            continue
        part = brick_decompose(lat, c, j, drop=drop)
        for z, m in part.comps.items():
            acc[z] = acc[z] + m if z in acc else m
    res = AlmostLocalDerivation(lat)
    res.comps = acc
    return res.drop_tiny(drop)


# ---------------------------------------------------------------------------
# Splittings


def chi_weight(brick: Brick, u: Region, v: Region) -> Fraction:
    du = region_distance(brick, u)
    dv = region_distance(brick, v)
    if du < dv:
        return Fraction(1)
    if du == dv:
        return Fraction(1, 2)
    return Fraction(0)


def split(f: AlmostLocalDerivation, u: Region, v: Region) -> tuple[AlmostLocalDerivation, AlmostLocalDerivation]:
    """Right splitting of the sum map: F = F_U + F_V with the seminorm
    bounds |F_U|_{U,k} <= |F|_{U cup V,k} and symmetrically."""
    fu = AlmostLocalDerivation(f.lat)
    fv = AlmostLocalDerivation(f.lat)
    for b, m in f.comps.items():
        w = float(chi_weight(b, u, v))
        if w > 0:
            fu.comps[b] = m * w
        if w < 1:
            fv.comps[b] = m * (1 - w)
    return fu, fv


# ---------------------------------------------------------------------------
# 0-chains


@dataclass
class ZeroChain:
    lat: LatticeSystem
    entries: dict[Site, AlmostLocalDerivation]

    def norm(self, k: int) -> float:
        return max(
            (seminorm(a, Brick(j, j), k) for j, a in self.entries.items()),
            default=0.0,
        )


def _u1_integer_points(lat: LatticeSystem, u: SemilinearSet, extra: int) -> list[Site]:
    """Integer points of the 1-thickening of U within a window around the box."""
    box = lat.box
    d_box = region_distance(box, u)
    radius = box.diam() + int(math.ceil(float(d_box))) + 2 + extra
    ranges = [range(lo - radius, hi + radius + 1) for lo, hi in zip(box.lo, box.hi)]
    total = 1
    for r in ranges:
        total *= len(r)
    if total > 300_000:
        raise ValueError("candidate window too large for chain decomposition")
    out = []
    for z in itertools.product(*ranges):
        if u.distance(z) <= 1:
            out.append(tuple(z))
    if not out:
        raise ValueError("no integer points in the 1-thickening")
    return out


def chain_decompose(f: AlmostLocalDerivation, u: SemilinearSet) -> ZeroChain:
    """Split F into a 0-chain supported on the integer points of U^1.

    Every brick goes to its nearest candidate point, lexicographic
    tie-break, so the boundary reassembles F exactly and the chain norms
    obey |f|_k <= 2^k |F|_{U,k}.
    """
    lat = f.lat
    pts = sorted(_u1_integer_points(lat, u, extra=0))
    entries: dict[Site, AlmostLocalDerivation] = {}
    for b, m in f.comps.items():
        best = min(pts, key=lambda z: (b.distance_point(z), z))
        if best not in entries:
            entries[best] = AlmostLocalDerivation(lat)
        entries[best].comps[b] = m
    return ZeroChain(lat, entries)


def chain_boundary(chain: ZeroChain) -> AlmostLocalDerivation:
    out = AlmostLocalDerivation(chain.lat)
    for a in chain.entries.values():
        out = out + a
    return out


# ---------------------------------------------------------------------------
# Kitaev-Shen-style ball norms


def ks_norm(a: AlmostLocalDerivation, x: Site, k: int) -> float:
    """sup over integer radii of (1+r)^k inf_b |a - b| with b supported on
    the radius-r ball; the inf is evaluated by the tr-bar projection."""
    lat = a.lat
    if not a.comps:
        return 0.0
    rmax = lat.box.diam() + max(
        int(math.ceil(float(b.distance_point(x)))) + b.diam() for b in a.comps
    ) + 1
    best = 0.0
    for r in range(1, rmax + 1):
        ball = Brick(tuple(v - r for v in x), tuple(v + r for v in x))
        tail = AlmostLocalDerivation(lat)
        tail.comps = {
            b: m for b, m in a.comps.items() if not ball.contains_brick(b)
        }
        if not tail.comps:
            break
        best = max(best, (1 + r) ** k * tail.norm())
    return best
