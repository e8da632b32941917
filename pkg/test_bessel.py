import cmath
import math

import numpy as np
import pytest
from scipy.special import jv

from lcu_walk.bessel import (
    abs_sum_estimate,
    abs_sum_upper_bound,
    bessel_row,
    bessel_series,
    choose_k,
    describe,
    generating_sum,
    generating_target,
    k_envelope,
    lcu_coefficients,
    tail_bound,
    truncation_bound,
)
from lcu_walk.errors import CapacityError, ParameterError


def test_bessel_at_zero():
    row = bessel_row(0.0, 4)
    expected = np.zeros(9)
    expected[4] = 1.0
    assert np.array_equal(row, expected)


@pytest.mark.parametrize("z", [-0.5, 2.0, -8.0, 30.0])
def test_miller_matches_power_series(z):
    assert np.max(np.abs(bessel_row(z, 40) - bessel_series(z, 40))) <= 1e-13


def test_known_values():
    row = bessel_row(1.0, 3)
    assert row[3] == pytest.approx(0.7651976865579666, abs=1e-14)
    assert row[4] == pytest.approx(0.44005058574493355, abs=1e-14)
    assert row[2] == pytest.approx(-0.44005058574493355, abs=1e-14)


def test_negative_orders_mirror_exactly():
    row = bessel_row(-3.7, 8)
    for m in range(1, 9):
        assert row[8 - m] == (-1) ** m * row[8 + m]


@pytest.mark.parametrize("z", [-17.5, -0.5, 3.0, 11.0])
def test_sum_of_squares_at_most_one(z):
    assert np.sum(bessel_row(z, 60) ** 2) <= 1.0 + 1e-12


def test_coefficients_at_zero():
    coefficients = lcu_coefficients(0.0, 3)
    assert coefficients[0] == 1.0
    assert all(coefficients[m] == 0.0 for m in (-3, -2, -1, 1, 2, 3))
    assert coefficients.bound == 0.0


def test_coefficients_fixed_z():
    coefficients = lcu_coefficients(-0.5, 5)
    assert coefficients.abs_sum < 2.0
    assert coefficients.abs_sum >= 1.0
    assert np.sum(coefficients.a) == pytest.approx(1.0, abs=1e-14)
    series = bessel_series(-0.5, 5)
    normalized = series / np.sum(series)
    assert np.max(np.abs(coefficients.a - normalized)) <= 1e-13


def test_coefficient_symmetry():
    coefficients = lcu_coefficients(-2.0, 9)
    for m in range(1, 10):
        assert coefficients[-m] == (-1) ** m * coefficients[m]
    assert coefficients[10] == 0.0


def test_coefficients_reject_large_z():
    with pytest.raises(ParameterError):
        lcu_coefficients(-3.5, 3)
    with pytest.raises(ParameterError):
        truncation_bound(5.0, 4)


def test_truncation_bound_values():
    assert truncation_bound(0.0, 3) == 0.0
    assert tail_bound(-0.5, 4) == pytest.approx(4 * 0.25 ** 5 / 120, rel=1e-12)
    b = 0.25 ** 5 / 120
    assert truncation_bound(-0.5, 4) == pytest.approx(8 * b / (1 - 4 * b), rel=1e-12)
    weighted = 4 * b * (0.1 * 0.5 + 6 * math.asin(0.1)) / (1 - 4 * b)
    assert truncation_bound(-0.5, 4, 0.1) == pytest.approx(weighted, rel=1e-12)


def test_truncation_bound_decreasing():
    bounds = [truncation_bound(-2.0, k) for k in range(2, 20)]
    assert all(later < earlier for earlier, later in zip(bounds, bounds[1:]))
    ratios = [later / earlier for earlier, later in zip(bounds, bounds[1:])]
    assert all(later < earlier for earlier, later in zip(ratios[2:], ratios[3:]))


def test_truncation_bound_infinite_when_tail_large():
    assert math.isinf(truncation_bound(-4.0, 4))


def test_abs_sum():
    assert abs_sum_estimate(0.0) == 1.0
    for z in (1.0, 4.0, 16.0, 64.0):
        total = abs_sum_estimate(z)
        assert total / math.sqrt(z) <= 2.0
        assert total <= abs_sum_upper_bound(z)


def test_choose_k_first_candidate():
    bound = truncation_bound(-2.0, 2)
    assert choose_k(-2.0, bound * 1.01) == 2


def test_choose_k_envelope():
    k = choose_k(-0.5, 1e-12)
    assert k <= k_envelope(1e-12)
    assert truncation_bound(-0.5, k) <= 1e-12
    assert truncation_bound(-0.5, k - 1) > 1e-12


def test_choose_k_monotone_in_delta():
    ks = [choose_k(-0.5, 10.0 ** -e) for e in range(2, 13)]
    assert ks == sorted(ks)


def test_choose_k_errors():
    with pytest.raises(ParameterError):
        choose_k(-0.5, 0.0)
    with pytest.raises(CapacityError):
        choose_k(-0.5, 1e-6, cap=3)


@pytest.mark.parametrize("z", [-0.5, -2.0, -8.0])
def test_generating_function_within_bound(z):
    for k in range(int(math.ceil(abs(z))), int(math.ceil(abs(z))) + 10):
        coefficients = lcu_coefficients(z, k)
        if math.isinf(coefficients.bound):
            continue
        for theta in np.linspace(-math.pi, math.pi, 100):
            mu = cmath.exp(1j * theta)
            error = abs(generating_sum(coefficients, mu) - generating_target(z, mu))
            assert error <= coefficients.bound + 1e-15


@pytest.mark.parametrize("z", [-0.5, -2.0, -8.0])
def test_generating_function_converges(z):
    coefficients = lcu_coefficients(z, 40)
    for theta in np.linspace(-math.pi, math.pi, 100):
        mu = cmath.exp(1j * theta)
        assert abs(generating_sum(coefficients, mu) - cmath.exp(1j * math.sin(theta) * z)) <= 1e-12


def test_describe():
    text = describe(lcu_coefficients(-0.5, 5), "segment")
    assert text.startswith("segment: z=-0.5 k=5 ")


@pytest.mark.parametrize("z", [-12.0, -0.25, 5.5, 29.0])
def test_miller_matches_scipy(z):
    orders = np.arange(-50, 51)
    assert np.max(np.abs(bessel_row(z, 50) - jv(orders, z))) <= 1e-13
