from fractions import Fraction

import numpy as np
import pytest

from conehall import intlat


def unimodular_check(u):
    a = np.array(u, dtype=float)
    assert abs(abs(np.linalg.det(a)) - 1.0) < 1e-8


@pytest.mark.parametrize("seed", range(20))
def test_hnf_random(seed):
    rng = np.random.default_rng(seed)
    m = rng.integers(-5, 6, size=(rng.integers(1, 5), rng.integers(1, 5))).tolist()
    h, u = intlat.hnf_with_transform(m)
    assert intlat.matmul(u, m) == h
    unimodular_check(u)
    # echelon: pivot columns strictly increase
    last = -1
    for row in h:
        nz = [j for j, v in enumerate(row) if v != 0]
        if nz:
            assert nz[0] > last
            assert row[nz[0]] > 0
            last = nz[0]


@pytest.mark.parametrize("seed", range(20))
def test_smith_random(seed):
    rng = np.random.default_rng(seed)
    m = rng.integers(-4, 5, size=(rng.integers(1, 5), rng.integers(1, 5))).tolist()
    d, u, v = intlat.smith_with_transforms(m)
    assert intlat.matmul(intlat.matmul(u, m), v) == d
    unimodular_check(u)
    unimodular_check(v)
    diag = [d[i][i] for i in range(min(len(d), len(d[0])))]
    for i in range(len(diag) - 1):
        if diag[i] != 0:
            assert diag[i + 1] % diag[i] == 0 or diag[i + 1] == 0
        else:
            assert diag[i + 1] == 0
    for i in range(len(d)):
        for j in range(len(d[0])):
            if i != j:
                assert d[i][j] == 0


@pytest.mark.parametrize("seed", range(15))
def test_integer_kernel(seed):
    rng = np.random.default_rng(seed + 100)
    a = rng.integers(-3, 4, size=(2, 4)).tolist()
    basis = intlat.integer_kernel_basis(a)
    for vec in basis:
        assert all(
            sum(a[i][j] * vec[j] for j in range(4)) == 0 for i in range(2)
        )
    # saturation: rank over Q matches nullity
    assert len(basis) == 4 - intlat.rational_rank(a)


def test_solve_integer():
    a = [[2, 0], [0, 3]]
    assert intlat.solve_integer(a, [4, 9]) == [2, 3]
    assert intlat.solve_integer(a, [1, 0]) is None


def test_rational_rank_and_nullspace():
    a = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert intlat.rational_rank(a) == 2
    ns = intlat.rational_nullspace(a)
    assert len(ns) == 1
    v = ns[0]
    for row in a:
        assert sum(Fraction(x) * y for x, y in zip(row, v)) == 0
