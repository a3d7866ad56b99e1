import numpy as np
import pytest
from hypothesis import given, strategies as st

from qctl.quadrature import (M, ladder_to_quadratures, make_gamma, make_permutation, make_theta,
                             quadratures_to_ladder, theta_blockdiag)

even = st.integers(1, 10).map(lambda k: 2 * k)


def test_theta_two():
    np.testing.assert_array_equal(make_theta(2).theta, [[0, 1], [-1, 0]])


def test_theta_four_is_block_diagonal():
    J = np.array([[0, 1], [-1, 0]])
    expected = np.zeros((4, 4))
    expected[:2, :2] = J
    expected[2:, 2:] = J
    t = make_theta(4).theta
    np.testing.assert_array_equal(t, expected)
    np.testing.assert_array_equal(t @ t, -np.eye(4))


@pytest.mark.parametrize("n", [0, -2, 3, 5, 2.5, True])
def test_theta_rejects_bad_n(n):
    with pytest.raises(ValueError):
        make_theta(n)


@given(even)
def test_theta_properties(n):
    t = make_theta(n).theta
    np.testing.assert_array_equal(t.T, -t)
    np.testing.assert_array_equal(t @ t, -np.eye(n))
    assert np.linalg.det(t) == pytest.approx(1.0)


def test_theta_is_immutable():
    with pytest.raises(ValueError):
        make_theta(2).theta[0, 0] = 1.0


def test_gamma_two_is_m():
    np.testing.assert_array_equal(make_gamma(2).gamma, M)


def test_permutation_four():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(make_permutation(4).apply(a), [1, 3, 2, 4])
    np.testing.assert_array_equal(make_permutation(4).matrix @ a, [1, 3, 2, 4])


@given(even)
def test_permutation_matrix_orthogonal(n):
    P = make_permutation(n).matrix
    np.testing.assert_array_equal(P.T @ P, np.eye(n))
    assert sorted(make_permutation(n).perm) == list(range(n))


@given(even)
def test_gamma_invertible_one_block_per_channel(n):
    g = make_gamma(n).gamma
    assert abs(np.linalg.det(g)) > 0
    # each quadrature column feeds exactly one annihilation and one creation row
    assert np.all(np.count_nonzero(g, axis=0) == 2)
    assert np.all(np.count_nonzero(g, axis=1) == 2)


@given(st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6))
def test_ladder_round_trip(vals):
    x = np.array(vals)
    a = quadratures_to_ladder(x)
    # oracle: independent dense solve against the raw matrix
    back = np.linalg.solve(make_gamma(6).gamma, a)
    np.testing.assert_allclose(back.real, x, atol=1e-9)
    np.testing.assert_allclose(ladder_to_quadratures(a).real, x, atol=1e-9)


def test_ladder_pairs_are_conjugate():
    x = np.array([0.3, -1.2, 2.0, 0.5])
    a = quadratures_to_ladder(x)
    np.testing.assert_allclose(a[:2], np.conj(a[2:]))
    np.testing.assert_allclose(a[0], (0.3 - 1.2j) / 2)


def test_theta_blockdiag_skips_empty():
    t = theta_blockdiag(2, 0, 4)
    assert t.shape == (6, 6)
    np.testing.assert_array_equal(t, make_theta(6).theta)
