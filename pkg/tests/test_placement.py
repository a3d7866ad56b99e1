import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qctl.placement import (PlacementError, PoleRegion, PoleSpec, closed_loop_char_poly,
                            is_conjugate_closed, place_observer_gain, place_state_feedback,
                            pole_pairing_error, poles_in_region, real_block_form,
                            structured_gain_search, structured_region_scan)
from qctl.qsde import DirectCoupling, ObserverController
from qctl.quadrature import theta
from qctl.synthesis import assemble_closed_loop

REGION = PoleRegion.from_degrees(0.1, 0.05, 60)


def random_conjugate_closed(rng, n, lo=-3.0, hi=-0.2):
    poles = []
    while len(poles) < n:
        if n - len(poles) >= 2 and rng.random() < 0.5:
            z = complex(rng.uniform(lo, hi), rng.uniform(0.1, 2.0))
            poles += [z, z.conjugate()]
        else:
            poles.append(complex(rng.uniform(lo, hi)))
    return poles


@pytest.mark.parametrize("h", [0.5, 0.6, 0.75, 0.9, 1.0])
def test_arc_without_direct_coupling(plant, h):
    poles = np.linalg.eigvals(plant.A + plant.B2 @ (h * np.eye(2)))
    expected = [complex(-0.1 * h, 0.1 * math.sqrt(1 - h * h)),
                complex(-0.1 * h, -0.1 * math.sqrt(1 - h * h))]
    assert pole_pairing_error(poles, expected) <= 1e-10
    np.testing.assert_allclose(np.abs(poles), 0.1, atol=1e-12)


def test_direct_coupling_regulator_char_poly(plant, rc):
    reg, obs = closed_loop_char_poly(plant, 0.5 * np.eye(2), np.eye(2), rc)
    np.testing.assert_allclose(reg, [1.0, 0.1, 0.0076], atol=1e-15)
    np.testing.assert_allclose(obs, [1.0, 0.2, 0.0056], atol=1e-15)
    # quadratic formula oracle
    roots = np.roots(reg)
    assert pole_pairing_error(roots, [-0.05 + 1j * math.sqrt(0.0051), -0.05 - 1j * math.sqrt(0.0051)]) <= 1e-12
    assert pole_pairing_error(roots, [-0.05 + 0.0714j, -0.05 - 0.0714j]) <= 5e-4


def test_char_poly_trivial(plant):
    Z = np.zeros((2, 2))
    reg, obs = closed_loop_char_poly(plant, Z, Z, DirectCoupling(Z))
    np.testing.assert_allclose(reg, np.poly(plant.A))
    np.testing.assert_allclose(obs, np.poly(plant.A))


def test_char_poly_refuses_asymmetric_rc(plant):
    with pytest.raises(ValueError):
        closed_loop_char_poly(plant, np.eye(2), np.eye(2), np.array([[0, 0.01], [-0.01, 0]]))


def test_observer_poles_with_direct_coupling(plant, rc):
    A_eff = plant.A - 2 * theta(2) @ rc.Rc
    poles = np.sort(np.linalg.eigvals(A_eff - np.eye(2) @ plant.C).real)
    expected = np.array([-0.1 - math.sqrt(0.0044), -0.1 + math.sqrt(0.0044)])
    np.testing.assert_allclose(poles, expected, atol=1e-12)
    np.testing.assert_allclose(poles, [-0.166, -0.034], atol=5e-4)


def test_observer_double_pole_without_coupling(plant):
    M = plant.A - plant.C
    np.testing.assert_allclose(M, [[-0.2, 0.1], [-0.1, 0.0]], atol=1e-15)
    np.testing.assert_allclose(np.poly(M), [1.0, 0.2, 0.01], atol=1e-15)


def test_place_double_integrator():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    H = place_state_feedback(A, B, [-1.0, -2.0], np.random.default_rng(1))
    # char poly z^2 + 3z + 2 fixes the SISO gain uniquely
    np.testing.assert_allclose(H, [[-2.0, -3.0]], atol=1e-10)


def test_no_motion_gives_zero_gain(plant):
    spec = PoleSpec(tuple(np.linalg.eigvals(plant.A)))
    H = place_state_feedback(plant.A, plant.B2, spec)
    np.testing.assert_array_equal(H, 0.0)
    G1 = place_observer_gain(plant.A, plant.C, spec)
    np.testing.assert_array_equal(G1, 0.0)


def test_placement_errors():
    with pytest.raises(ValueError):
        PoleSpec((-1 + 1j, -2.0))
    with pytest.raises(PlacementError):
        place_state_feedback(np.eye(2), np.array([[1.0], [0.0]]), [-1.0, -2.0])
    with pytest.raises(PlacementError):
        place_observer_gain(np.diag([1.0, -1.0]), np.array([[0.0, 1.0]]), [-1.0, -2.0])
    with pytest.raises(ValueError):
        place_state_feedback(np.eye(2), np.eye(2), [-1.0])


def test_real_block_form_spectrum():
    poles = [-1.0, -0.5 + 2j, -0.5 - 2j, -3.0]
    L = real_block_form(poles)
    assert pole_pairing_error(np.linalg.eigvals(L), poles) <= 1e-14
    assert np.isrealobj(L)


def test_conjugate_closed():
    assert is_conjugate_closed([-1 + 1j, -1 - 1j, -2])
    assert not is_conjugate_closed([-1 + 1j, -2])


@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_random_placement_residual(seed, n, m):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    B = rng.standard_normal((n, m))
    poles = random_conjugate_closed(rng, n)
    H = place_state_feedback(A, B, poles, rng)
    assert pole_pairing_error(np.linalg.eigvals(A + B @ H), poles) <= 1e-6


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
@settings(max_examples=30, deadline=None)
def test_observer_duality_is_exact(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    C = rng.standard_normal((2, n))
    poles = random_conjugate_closed(rng, n)
    G1 = place_observer_gain(A, C, poles, np.random.default_rng(seed))
    K = place_state_feedback(A.T, C.T, poles, np.random.default_rng(seed))
    assert np.array_equal(G1, -K.T)
    assert pole_pairing_error(np.linalg.eigvals(A - G1 @ C), poles) <= 1e-6


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
@settings(max_examples=20, deadline=None)
def test_agrees_with_independent_placer(seed, n):
    from scipy.signal import place_poles

    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    B = rng.standard_normal((n, 2))
    poles = [complex(p) for p in -np.sort(rng.uniform(0.5, 3.0, n))]
    H = place_state_feedback(A, B, poles, rng)
    K = place_poles(A, B, np.real(poles)).gain_matrix
    ours = np.sort_complex(np.linalg.eigvals(A + B @ H))
    theirs = np.sort_complex(np.linalg.eigvals(A - B @ K))
    np.testing.assert_allclose(ours, theirs, atol=1e-6)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 6]))
@settings(max_examples=30, deadline=None)
def test_char_poly_product_matches_closed_loop(seed, n):
    rng = np.random.default_rng(seed)
    from qctl.qsde import random_physical_plant

    p = random_physical_plant(rng, n, 2, 2, scale=0.5)
    R = rng.standard_normal((n, n))
    Rc = 0.5 * (R + R.T)
    H, G1 = rng.standard_normal((2, n)), rng.standard_normal((n, 2))
    F = p.A - G1 @ p.C + p.B2 @ H
    ctrl = ObserverController(F, G1, theta(n) @ H.T @ theta(2), np.zeros((n, 0)), H)
    cls = assemble_closed_loop(p, ctrl, Rc)
    reg, obs = closed_loop_char_poly(p, H, G1, Rc)
    full = np.real(np.poly(cls.A_s))
    scale = max(1.0, np.abs(full).max())
    np.testing.assert_allclose(np.polymul(reg, obs), full, atol=1e-8 * scale)


def test_arc_constraint_for_scalar_gain(plant):
    for h in np.linspace(0.5, 1.0, 51):
        poles = np.linalg.eigvals(plant.A + h * plant.B2)
        np.testing.assert_allclose(np.abs(poles), 0.1, atol=1e-12)


def test_region_examples():
    assert poles_in_region([-0.05 + 0.0714j, -0.05 - 0.0714j], REGION).ok
    edge = [complex(-0.05, 0.05 * math.sqrt(3)), complex(-0.05, -0.05 * math.sqrt(3))]
    assert abs(abs(edge[0]) - 0.1) < 1e-15
    assert poles_in_region(edge, REGION).ok
    rep = poles_in_region([0.01], REGION)
    assert not rep.ok and not rep.checks[0].decay_ok
    rep = poles_in_region([-0.03], REGION)
    assert not rep.ok and rep.checks[0].modulus_ok and not rep.checks[0].decay_ok
    rep = poles_in_region([-0.05 + 0.2j], REGION)
    assert not rep.checks[0].modulus_ok and not rep.checks[0].damping_ok


def test_region_validation():
    with pytest.raises(ValueError):
        PoleRegion(0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        PoleRegion(1.0, 0.0, 2.0)


def test_structured_search_recovers_scalar(plant, rc):
    A_eff = plant.A + 2 * theta(2) @ rc.Rc
    target = np.roots([1.0, 0.1, 0.0076])
    s, poles, err = structured_gain_search(A_eff, plant.B2, target)
    assert s == pytest.approx(0.5, abs=1e-8)
    assert err <= 1e-8


def test_structured_scan_finds_arc(plant):
    scan = structured_region_scan(plant.A, plant.B2, REGION, bounds=(-2, 2), grid=4001)
    assert scan["feasible"][0] == pytest.approx(0.5, abs=1e-3)
    assert scan["feasible"][-1] == pytest.approx(1.0, abs=1e-3)
    lo, hi = scan["modulus_range"]
    assert lo == pytest.approx(0.1, abs=1e-12) and hi == pytest.approx(0.1, abs=1e-12)
