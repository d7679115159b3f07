"""Gapped states at finite volume and the quasiadiabatic machinery.

The exact backend diagonalizes the assembled Hamiltonian once and
evaluates the filter transforms J and K in the energy eigenbasis, where
they are exact: J multiplies matrix elements by a smooth bump w-hat
supported inside the gap, K by (w-hat - 1)/(i omega), and the identity
F = J(F) - K([H, F]) holds to machine precision.  A free-fermion backend
carries single-particle data and serves as a quantitative oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import SemilinearSet
from .lattice import (
    AlmostLocalDerivation,
    Brick,
    LatticeSystem,
    brick_decompose,
    chi_weight,
    normalized_trace,
    operator_norm,
    split,
)


@dataclass(frozen=True)
class FilterFunction:
    """Smooth even frequency profile w-hat with w-hat(0) = 1 supported in
    [-gap/2, gap/2], and the derived odd profile for K."""

    gap: float
    shape: float = 1.0

    def __post_init__(self):
        if self.gap <= 0 or self.shape <= 0:
            raise ValueError("gap and shape must be positive")

    def w_hat(self, omega: float) -> float:
        u = 2.0 * omega / self.gap
        if abs(u) >= 1.0:
            return 0.0
        return math.exp(self.shape - self.shape / (1.0 - u * u))

    def k_hat(self, omega: float) -> complex:
        if omega == 0.0:
            return 0.0
        return (self.w_hat(omega) - 1.0) / (1j * omega)

    def w_hat_array(self, omega: np.ndarray) -> np.ndarray:
        u = 2.0 * np.asarray(omega, dtype=float) / self.gap
        out = np.zeros_like(u)
        mask = np.abs(u) < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            um = u[mask]
            out[mask] = np.exp(self.shape - self.shape / (1.0 - um * um))
        return out

    def k_hat_array(self, omega: np.ndarray) -> np.ndarray:
        om = np.asarray(omega, dtype=float)
        out = np.zeros(om.shape, dtype=complex)
        mask = om != 0.0
        out[mask] = (self.w_hat_array(om[mask]) - 1.0) / (1j * om[mask])
        return out

    def w_time(self, t: float, nodes: int = 400) -> float:
        """Time profile w(t) by quadrature of the compactly supported
        transform; used only by the time-integral cross-check."""
        xs, ws = np.polynomial.legendre.leggauss(nodes)
        half = self.gap / 2.0
        om = xs * half
        vals = np.array([self.w_hat(o) for o in om])
        integrand = vals * np.cos(om * t)
        return float(np.sum(ws * integrand) * half / (2.0 * math.pi))


class HamiltonianDerivation:
    """A lattice Hamiltonian with a declared spectral gap.

    `h` is the assembled hermitian generator; the derivation acts as
    A -> [i h, A], whose brick decomposition is cached for seminorm work.
    """

    def __init__(self, lat: LatticeSystem, h: np.ndarray, gap: float):
        h = np.asarray(h, dtype=complex)
        if operator_norm(h - h.conj().T) > 1e-10 * (1 + operator_norm(h)):
            raise ValueError("generator must be hermitian")
        if gap <= 0:
            raise ValueError("declared gap must be positive")
        self.lat = lat
        self.h = h
        self.gap = float(gap)
        self._derivation: AlmostLocalDerivation | None = None

    def derivation(self) -> AlmostLocalDerivation:
        if self._derivation is None:
            traceless = self.h - np.trace(self.h) / self.h.shape[0] * np.eye(self.h.shape[0])
            self._derivation = brick_decompose(self.lat, 1j * traceless)
        return self._derivation

    def apply(self, mat: np.ndarray) -> np.ndarray:
        """H(A) = [i h, A]."""
        return 1j * (self.h @ mat - mat @ self.h)


class GapError(ValueError):
    def __init__(self, message: str, measured_gap: float):
        super().__init__(message)
        self.measured_gap = measured_gap


class GappedState:
    """Exact-diagonalization ground state with cached spectrum."""

    backend = "exact"

    def __init__(self, ham: HamiltonianDerivation, energies: np.ndarray,
                 vectors: np.ndarray, filt: FilterFunction):
        self.ham = ham
        self.lat = ham.lat
        self.energies = energies
        self.vectors = vectors
        self.ground = vectors[:, 0]
        self.projector = np.outer(self.ground, self.ground.conj())
        self.filt = filt
        self.measured_gap = float(energies[1] - energies[0])

    # -- averages ----------------------------------------------------------

    def average_matrix(self, mat: np.ndarray) -> complex:
        return complex(self.ground.conj() @ (mat @ self.ground))

    def average(self, f: AlmostLocalDerivation) -> complex:
        return self.average_matrix(f.assemble())

    def variance(self, mat: np.ndarray) -> float:
        a2 = self.average_matrix(mat.conj().T @ mat)
        a1 = self.average_matrix(mat)
        return float((a2 - abs(a1) ** 2).real)

    def preserves(self, f: AlmostLocalDerivation | np.ndarray, tol: float = 1e-8) -> bool:
        mat = f if isinstance(f, np.ndarray) else f.assemble()
        comm = mat @ self.projector - self.projector @ mat
        return operator_norm(comm) <= tol * (1 + operator_norm(mat))

    # -- spectral filter transforms -----------------------------------------

    def _to_eigenbasis(self, mat: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ mat @ self.vectors

    def _from_eigenbasis(self, mat: np.ndarray) -> np.ndarray:
        return self.vectors @ mat @ self.vectors.conj().T

    def _diffs(self) -> np.ndarray:
        return self.energies[:, None] - self.energies[None, :]

    def j_matrix(self, mat: np.ndarray) -> np.ndarray:
        mult = self.filt.w_hat_array(self._diffs())
        return self._from_eigenbasis(mult * self._to_eigenbasis(mat))

    def k_matrix(self, mat: np.ndarray) -> np.ndarray:
        mult = self.filt.k_hat_array(self._diffs())
        return self._from_eigenbasis(mult * self._to_eigenbasis(mat))

    def j_matrix_time(self, mat: np.ndarray, t_max: float = 40.0, nodes: int = 200) -> np.ndarray:
        """Cross-check mode: J as the time integral of the Heisenberg flow
        by Gauss-Legendre quadrature on |t| <= t_max."""
        xs, ws = np.polynomial.legendre.leggauss(nodes)
        ts = xs * t_max
        acc = np.zeros_like(mat)
        mt = self._to_eigenbasis(mat)
        diffs = self.energies[:, None] - self.energies[None, :]
        for t, w in zip(ts, ws):
            phase = np.exp(1j * diffs * t)
            acc = acc + w * self.filt.w_time(t) * (phase * mt)
        return self._from_eigenbasis(acc * t_max)


def ground_state(ham: HamiltonianDerivation, filt: FilterFunction | None = None,
                 degeneracy_tol: float = 1e-8) -> GappedState:
    """Dense eigensolve with gap and uniqueness verification."""
    energies, vectors = np.linalg.eigh(ham.h)
    measured = float(energies[1] - energies[0])
    if measured < degeneracy_tol:
        raise GapError(
            f"ground space is degenerate (splitting {measured:.2e})", measured
        )
    if measured < ham.gap:
        raise GapError(
            f"measured gap {measured:.6f} is below the declared gap {ham.gap}",
            measured,
        )
    if filt is None:
        filt = FilterFunction(ham.gap)
    return GappedState(ham, energies, vectors, filt)


def quasiadiabatic_j(state: GappedState, f: AlmostLocalDerivation) -> AlmostLocalDerivation:
    """J lands in the state-preserving derivations; exact in the eigenbasis."""
    return brick_decompose(state.lat, state.j_matrix(f.assemble()))


def quasiadiabatic_k(state: GappedState, f: AlmostLocalDerivation) -> AlmostLocalDerivation:
    return brick_decompose(state.lat, state.k_matrix(f.assemble()))


def exp_derivation(lat: LatticeSystem, f: AlmostLocalDerivation, t: float = 1.0) -> np.ndarray:
    """Unitary exponential of an anti-hermitian derivation generator."""
    m = f.assemble()
    herm = -1j * m
    evals, evecs = np.linalg.eigh(herm)
    return evecs @ np.diag(np.exp(1j * t * evals)) @ evecs.conj().T


# ---------------------------------------------------------------------------
# The state-preserving splitting


def _voronoi_chi(brick: Brick, u: SemilinearSet, v: SemilinearSet) -> Fraction:
    """Weight of a brick for the Voronoi-region split of the Hamiltonian:
    membership of the brick center in U' = {d(.,U) <= d(.,V)} decided
    exactly; centers stand in for the regions' unavailable H-forms."""
    center = tuple(Fraction(a + b, 2) for a, b in zip(brick.lo, brick.hi))
    du, dv = u.distance(center), v.distance(center)
    if du < dv:
        return Fraction(1)
    if du == dv:
        return Fraction(1, 2)
    return Fraction(0)


def psi_preserving_split(
    state: GappedState,
    f: AlmostLocalDerivation,
    u: SemilinearSet,
    v: SemilinearSet,
    tol: float = 1e-8,
    tie: str = "half",
) -> tuple[AlmostLocalDerivation, AlmostLocalDerivation]:
    """Split a state-preserving derivation as F = F_U + F_V with both parts
    state-preserving and approximately localized.

    F_U = J(chi_U F) - K([J(chi'_U H), F]) where chi is the distance split
    for (U, V) and chi' the Voronoi split of the Hamiltonian; the two parts
    sum to F exactly because J(H) = H and the K terms telescope.
    """
    if tie not in ("half", "u-first", "v-first"):
        raise ValueError("tie must be half, u-first or v-first")
    mat = f.assemble()
    if not state.preserves(mat, tol):
        raise ValueError("derivation does not preserve the state")
    g1, g2 = split(f, u, v)
    h_der = state.ham.derivation()
    h1 = AlmostLocalDerivation(state.lat)
    for b, m in h_der.comps.items():
        w = _voronoi_chi(b, u, v)
        if w == Fraction(1, 2) and tie != "half":
            w = Fraction(1) if tie == "u-first" else Fraction(0)
        if w > 0:
            h1.comps[b] = m * float(w)
    h1_mat = h1.assemble()
    h2_mat = h_der.assemble() - h1_mat
    ju1 = state.j_matrix(h1_mat)
    ju2 = state.j_matrix(h2_mat)

    def k_term(jh: np.ndarray) -> np.ndarray:
        comm = jh @ mat - mat @ jh
        return state.k_matrix(comm)

    fu_mat = state.j_matrix(g1.assemble()) - k_term(ju1)
    fv_mat = state.j_matrix(g2.assemble()) - k_term(ju2)
    fu = brick_decompose(state.lat, fu_mat)
    # force exact complementarity in the decomposed representation
    fv_exact = f - fu
    resid = operator_norm(fv_exact.assemble() - fv_mat)
    if resid > 1e-6 * (1 + operator_norm(mat)):
        raise AssertionError(f"split halves drifted apart by {resid:.2e}")
    return fu, fv_exact


# ---------------------------------------------------------------------------
# Free-fermion backend (verification oracle)


@dataclass
class FreeFermionState:
    """Single-particle data: correlation projector P and hopping matrix."""

    backend = "free-fermion"

    h1: np.ndarray
    p: np.ndarray
    gap: float

    def validate(self, tol: float = 1e-10) -> None:
        if operator_norm(self.p @ self.p - self.p) > tol:
            raise ValueError("correlation matrix is not a projector")


def free_fermion_ground(h1: np.ndarray, gap_tol: float = 1e-8) -> FreeFermionState:
    """Fill all negative-energy single-particle modes."""
    h1 = np.asarray(h1, dtype=complex)
    energies, modes = np.linalg.eigh(h1)
    gap = float(np.min(np.abs(energies)))
    if gap < gap_tol:
        raise GapError("single-particle spectrum is gapless at zero", gap)
    occ = modes[:, energies < 0]
    p = occ @ occ.conj().T
    return FreeFermionState(h1, p, gap)


def fermion_pairing(p: np.ndarray, a: np.ndarray, b: np.ndarray,
                    tol: float = 1e-10) -> complex:
    """tr(P [[P, A], [P, B]]): the single-particle evaluation of commutator
    pairings for quadratic charges."""
    if operator_norm(p @ p - p) > tol:
        raise ValueError("first argument must be a projector")
    ca = p @ a - a @ p
    cb = p @ b - b @ p
    comm = ca @ cb - cb @ ca
    return complex(np.trace(p @ comm))
