"""Desk-scale model Hamiltonians: spin models for the exact backend and the
two-band hopping model driving the free-fermion oracle."""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .lattice import LatticeSystem, embed

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SP = np.array([[0, 1], [0, 0]], dtype=complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


def neighbor_pairs(lat: LatticeSystem) -> list[tuple]:
    """Axis-aligned unit-distance site pairs."""
    out = []
    for s in lat.sites:
        for axis in range(lat.dim):
            t = tuple(v + (1 if i == axis else 0) for i, v in enumerate(s))
            if t in lat.site_index:
                out.append((s, t))
    return out


def onsite_sum(lat: LatticeSystem, mat: np.ndarray) -> np.ndarray:
    full = list(lat.sites)
    out = np.zeros((lat.total_dim, lat.total_dim), dtype=complex)
    for s in lat.sites:
        out += embed(lat, mat, [s], full)
    return out


def twosite_sum(lat: LatticeSystem, mat_a: np.ndarray, mat_b: np.ndarray) -> np.ndarray:
    full = list(lat.sites)
    out = np.zeros((lat.total_dim, lat.total_dim), dtype=complex)
    for s, t in neighbor_pairs(lat):
        pair = sorted([s, t])
        local = np.kron(mat_a, mat_b) if pair == [s, t] else np.kron(mat_b, mat_a)
        out += embed(lat, local, pair, full)
    return out


def product_field(lat: LatticeSystem, field: float = 1.0) -> np.ndarray:
    """Polarizing field: h = -field * sum_j sz_j; gap 2*field, product ground state."""
    return -field * onsite_sum(lat, SZ)


def transverse_field_ising(lat: LatticeSystem, coupling: float = 1.0,
                           field: float = 2.0) -> np.ndarray:
    """h = -J sum sz sz - g sum sx; gapped for g > J."""
    return -coupling * twosite_sum(lat, SZ, SZ) - field * onsite_sum(lat, SX)


def xy_charge_model(lat: LatticeSystem, field: float = 2.0,
                    hop: float = 0.4) -> np.ndarray:
    """U(1)-invariant interacting model: polarizing field plus hopping
    (s+ s- + s- s+); conserves total sz."""
    hopping = twosite_sum(lat, SP, SM) + twosite_sum(lat, SM, SP)
    return -field * onsite_sum(lat, SZ) + hop * hopping


def tfim_with_charge(lat: LatticeSystem, field: float = 2.0, hop: float = 0.4,
                     zz: float = 0.3) -> np.ndarray:
    """Charge-conserving desk model with an Ising interaction on top of the
    hopping; still U(1)-invariant since zz commutes with total sz."""
    return xy_charge_model(lat, field, hop) - zz * twosite_sum(lat, SZ, SZ)


# ---------------------------------------------------------------------------
# Two-band hopping model on Z^2 (free-fermion oracle)


def qwz_bloch(kx: float, ky: float, m: float) -> np.ndarray:
    return (
        math.sin(kx) * SX
        + math.sin(ky) * SY
        + (m + math.cos(kx) + math.cos(ky)) * SZ
    )


def qwz_real_space(length: int, m: float, periodic: bool = False) -> np.ndarray:
    """Single-particle Hamiltonian on an length x length lattice with two
    orbitals per site; hopping kernels reproduce the Bloch matrix."""
    n = length * length
    idx = {}
    for x in range(length):
        for y in range(length):
            idx[(x, y)] = len(idx)
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    tx = (SZ - 1j * SX) / 2.0
    ty = (SZ - 1j * SY) / 2.0
    for (x, y), i in idx.items():
        h[2 * i: 2 * i + 2, 2 * i: 2 * i + 2] += m * SZ
        for (dx, dy), t in (((1, 0), tx), ((0, 1), ty)):
            xx, yy = x + dx, y + dy
            if periodic:
                xx %= length
                yy %= length
            if (xx, yy) not in idx:
                continue
            j = idx[(xx, yy)]
            h[2 * j: 2 * j + 2, 2 * i: 2 * i + 2] += t
            h[2 * i: 2 * i + 2, 2 * j: 2 * j + 2] += t.conj().T
    return h


def qwz_site_positions(length: int) -> list[tuple[int, int]]:
    return [(x, y) for x in range(length) for y in range(length)]


def chern_number(m: float, grid: int = 48) -> float:
    """Plaquette Berry-curvature sum over the Brillouin zone (integer up to
    discretization error for gapped parameters)."""
    ks = np.linspace(-math.pi, math.pi, grid, endpoint=False)
    # lower-band eigenvectors on the grid
    vecs = np.zeros((grid, grid, 2), dtype=complex)
    for i, kx in enumerate(ks):
        for j, ky in enumerate(ks):
            evals, evecs = np.linalg.eigh(qwz_bloch(kx, ky, m))
            vecs[i, j] = evecs[:, 0]
    total = 0.0
    for i in range(grid):
        for j in range(grid):
            u1 = vecs[i, j]
            u2 = vecs[(i + 1) % grid, j]
            u3 = vecs[(i + 1) % grid, (j + 1) % grid]
            u4 = vecs[i, (j + 1) % grid]
            prod = (
                np.vdot(u1, u2) * np.vdot(u2, u3) * np.vdot(u3, u4) * np.vdot(u4, u1)
            )
            total += float(np.angle(prod))
    return total / (2.0 * math.pi)
