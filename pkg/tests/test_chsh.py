import math

import numpy as np
import pytest
from scipy.optimize import brentq

from collective_chsh.chsh import (
    TSIRELSON,
    chsh_value,
    correlation_matrix,
    correlation_matrix_symmetric,
    horodecki_bound,
    jacobi_eigenvalues,
    sparse_block_eigenvalues,
    xor_bound_closed_form,
)
from collective_chsh.oracle import direct_chsh_max, random_row_pair
from collective_chsh.protocol import reduce_pairs, xor_reduced_closed_form
from collective_chsh.states import make_werner

from conftest import random_rotation


def random_state(rng, real=False):
    a = rng.standard_normal((4, 4))
    if not real:
        a = a + 1j * rng.standard_normal((4, 4))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.mark.parametrize("x", [0.0, 0.2, 0.5, 1.0])
def test_werner_correlations(x):
    np.testing.assert_allclose(correlation_matrix(make_werner(x)), -x * np.eye(3), atol=1e-15)


def test_xor_two_pair_correlations():
    t = correlation_matrix(xor_reduced_closed_form(2, 0.5).rho_new)
    np.testing.assert_allclose(t, np.diag([-0.4, -0.4, -0.8]), atol=1e-15)


def test_correlation_rejects_non_hermitian():
    rho = np.array(make_werner(0.5))
    rho[0, 3] += 0.1j
    with pytest.raises(ValueError):
        correlation_matrix(rho)


def test_correlation_entries_bounded(rng):
    for _ in range(200):
        t = correlation_matrix(random_state(rng))
        assert np.all(np.abs(t) <= 1 + 1e-10)


def test_symmetric_form_werner_half():
    t = correlation_matrix_symmetric(make_werner(0.5))
    assert t[0, 0] == pytest.approx(-0.5, abs=1e-15)
    np.testing.assert_allclose(t, -0.5 * np.eye(3), atol=1e-15)


def test_symmetric_form_matches_trace_formula(rng):
    for _ in range(200):
        rho = random_state(rng, real=True)
        np.testing.assert_allclose(
            correlation_matrix_symmetric(rho), correlation_matrix(rho), atol=1e-13, rtol=0
        )


def test_symmetric_txz_substitution():
    rho = np.eye(4) / 4
    rho[0, 2] = rho[2, 0] = 0.1  # rho_{00,10}
    rho[1, 3] = rho[3, 1] = 0.03  # rho_{01,11}
    t = correlation_matrix_symmetric(rho)
    assert t[0, 2] == pytest.approx(2 * (0.1 - 0.03), abs=1e-15)
    assert t[2, 0] == 0.0


def test_symmetric_form_preconditions():
    rho = np.array(make_werner(0.5))
    rho[0, 3] = 0.01
    with pytest.raises(ValueError, match="symmetric"):
        correlation_matrix_symmetric(rho)
    with pytest.raises(ValueError, match="real"):
        correlation_matrix_symmetric(make_werner(0.5) + 1e-6j)


def test_jacobi_matches_lapack(rng):
    for _ in range(300):
        a = rng.standard_normal((3, 3))
        a = a + a.T
        np.testing.assert_allclose(jacobi_eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-12)
    np.testing.assert_array_equal(jacobi_eigenvalues(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    np.testing.assert_array_equal(jacobi_eigenvalues(np.zeros((3, 3))), [0, 0, 0])


def test_bound_singlet_and_werner():
    assert horodecki_bound(-np.eye(3)).bound == pytest.approx(TSIRELSON, abs=1e-15)
    for x in np.linspace(0, 1, 11):
        assert horodecki_bound(-x * np.eye(3)).bound == pytest.approx(2 * math.sqrt(2) * x, abs=1e-12)
    # crosses 2 at 1/sqrt(2); the direction search sees the same
    x0 = 1 / math.sqrt(2)
    assert horodecki_bound(-x0 * np.eye(3)).bound == pytest.approx(2.0, abs=1e-12)
    assert direct_chsh_max(make_werner(x0)) == pytest.approx(2.0, abs=1e-3)


def test_bound_xor_two_pairs():
    b = horodecki_bound(correlation_matrix(xor_reduced_closed_form(2, 0.5).rho_new))
    assert b.m_value == pytest.approx(0.8, abs=1e-14)
    assert b.bound == pytest.approx(1.788854, abs=1e-6)


def test_sparse_block_eigenvalues(rng):
    for _ in range(100):
        t = np.zeros((3, 3))
        for i, j in [(0, 0), (1, 1), (2, 2), (0, 2), (2, 0)]:
            t[i, j] = rng.uniform(-1, 1)
        np.testing.assert_allclose(sparse_block_eigenvalues(t), jacobi_eigenvalues(t.T @ t), atol=1e-12)
    for _ in range(50):
        t = correlation_matrix(reduce_pairs([make_werner(rng.uniform())] * 2, random_row_pair(rng, 2), random_row_pair(rng, 2)).rho_new)
        np.testing.assert_allclose(sparse_block_eigenvalues(t), jacobi_eigenvalues(t.T @ t), atol=1e-12)


def test_bound_rotation_invariance(rng):
    for _ in range(100):
        t = correlation_matrix(random_state(rng))
        r1, r2 = random_rotation(rng, 3), random_rotation(rng, 3)
        assert horodecki_bound(r1 @ t @ r2).bound == pytest.approx(horodecki_bound(t).bound, abs=1e-10)


def test_chsh_canonical_singlet():
    t = -np.eye(3)
    x, y = np.eye(3)[0], np.eye(3)[1]
    v = chsh_value(t, x, y, -(x + y) / math.sqrt(2), (y - x) / math.sqrt(2))
    assert v == pytest.approx(TSIRELSON, abs=1e-14)


def test_chsh_degenerate_settings(rng):
    for _ in range(100):
        t = correlation_matrix(random_state(rng))
        a = rng.standard_normal(3)
        b = rng.standard_normal(3)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        v = chsh_value(t, a, a, b, b)
        assert v == pytest.approx(2 * a @ t @ b, abs=1e-14)
        assert v <= 2 + 1e-12


def test_chsh_sampling_never_beats_bound(rng):
    for _ in range(5):
        t = correlation_matrix(random_state(rng))
        bound = horodecki_bound(t).bound
        dirs = rng.standard_normal((10_000, 4, 3))
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        a, a2, b, b2 = (dirs[:, i] for i in range(4))
        vals = np.einsum("ki,ij,kj->k", a, t, b + b2) + np.einsum("ki,ij,kj->k", a2, t, b - b2)
        assert vals.max() <= bound + 1e-9
        assert chsh_value(t, a[0], a2[0], b[0], b2[0]) == pytest.approx(vals[0], abs=1e-12)


def test_chsh_rejects_non_unit():
    with pytest.raises(ValueError):
        chsh_value(np.eye(3), [1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1])


@pytest.mark.parametrize("x", np.linspace(0, 1, 11))
def test_xor_bound_small_n(x):
    assert xor_bound_closed_form(1, x) == pytest.approx(2 * math.sqrt(2) * x, abs=1e-14)
    assert xor_bound_closed_form(2, x) == pytest.approx(4 * x / math.sqrt(1 + x * x), abs=1e-14)


def test_xor_bound_exact_values():
    assert xor_bound_closed_form(2, 1 / math.sqrt(3)) == pytest.approx(2.0, abs=1e-14)
    # T_xx = -2/7, T_zz = -13/14
    assert xor_bound_closed_form(3, 0.5) == pytest.approx(2 * math.sqrt(185) / 14, abs=1e-14)
    # T_xx = 8/41, T_zz = -40/41
    assert xor_bound_closed_form(4, 0.5) == pytest.approx(2 * math.sqrt(1664) / 41, abs=1e-14)
    # T_xx = -8/61, T_zz = -121/122
    v5 = xor_bound_closed_form(5, 0.5)
    assert v5 == pytest.approx(2 * math.sqrt(14897 / 14884), abs=1e-14)
    assert v5 == pytest.approx(2.0008733, abs=1e-7)
    assert v5 > 2


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_xor_bound_matches_pipeline(n, rng):
    for x in rng.uniform(size=10):
        s = xor_reduced_closed_form(n, x)
        assert horodecki_bound(correlation_matrix(s.rho_new)).bound == pytest.approx(
            xor_bound_closed_form(n, x), abs=1e-12
        )


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_xor_bound_nondecreasing(n):
    vals = [xor_bound_closed_form(n, x) for x in np.linspace(0, 1, 1001)]
    assert np.all(np.diff(vals) >= 0)


def test_xor_thresholds_decrease():
    roots = [brentq(lambda x: xor_bound_closed_form(n, x) - 2, 1e-6, 1, xtol=1e-14) for n in range(1, 6)]
    assert roots[0] == pytest.approx(1 / math.sqrt(2), abs=1e-10)
    assert roots[1] == pytest.approx(1 / math.sqrt(3), abs=1e-10)
    assert roots[2] == pytest.approx(0.533, abs=1e-3)
    assert roots[3] == pytest.approx(0.511, abs=1e-3)
    assert np.all(np.diff(roots) < 0)


@pytest.mark.parametrize("x", np.linspace(0.01, 0.5, 50))
def test_xor_bound_increases_with_n_below_half(x):
    vals = [xor_bound_closed_form(n, x) for n in range(1, 6)]
    assert np.all(np.diff(vals) > 0)


def test_xor_bound_not_monotone_in_n_at_large_x():
    # XOR rows alone lose ground as pairs are added once x is large; the
    # ordering by n holds for the optimized rows only
    assert xor_bound_closed_form(3, 0.7) < xor_bound_closed_form(2, 0.7)


def test_xor_bound_domain():
    with pytest.raises(ValueError):
        xor_bound_closed_form(0, 0.5)
    with pytest.raises(ValueError):
        xor_bound_closed_form(2, 1.5)
