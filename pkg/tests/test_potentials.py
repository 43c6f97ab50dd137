import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sci_integrate

from heattrace import potentials as pot
from heattrace.potentials import (ConfigError, Potential, bump, eval, fd_derivative,
                                  from_dict, integrate_power, max_abs, poly_bump,
                                  scaled, shifted, sum_of, support, to_dict)
from heattrace.quadrature import QuadratureSpec

CANON = bump()                                  # exp(1 - 1/(1-x^2)) on (-1, 1)
SKEW = poly_bump(center=0.3, halfwidth=0.8, amplitude=1.2, poly_coeffs=(1.0, 0.7, -0.4))


def test_outside_support_is_zero_all_orders():
    assert eval(CANON, 2.0, 0) == 0.0
    rng = np.random.default_rng(7)
    for p in (CANON, SKEW, sum_of([CANON, bump(center=3.0)])):
        lo, hi = support(p)
        xs = np.concatenate([lo - 1e-9 - rng.uniform(0, 5, 50),
                             hi + 1e-9 + rng.uniform(0, 5, 50)])
        for k in (0, 1, 3, 6):
            assert np.all(eval(p, xs, k) == 0.0)


def test_center_values():
    assert eval(CANON, 0.0, 0) == pytest.approx(1.0, abs=0)   # rho(center)=amplitude
    assert eval(bump(amplitude=-2.5), 0.0, 0) == -2.5
    assert eval(CANON, 0.0, 1) == 0.0                          # even function


def test_first_derivative_closed_form():
    # rho'(x) = -2x/(1-x^2)^2 * rho(x)
    xs = np.linspace(-0.95, 0.95, 41)
    s = 1 - xs ** 2
    expect = -2 * xs / s ** 2 * eval(CANON, xs, 0)
    np.testing.assert_allclose(eval(CANON, xs, 1), expect, rtol=1e-12)


@pytest.mark.parametrize("p", [CANON, bump(0.5, 2.0, -0.8), SKEW])
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_derivatives_match_finite_differences(p, order):
    # Richardson-extrapolated central differences; points kept away from the
    # support edge, where the higher bump derivatives blow up and dominate
    # the O(h^4) truncation of the extrapolated stencil.
    rng = np.random.default_rng(order)
    lo, hi = support(p)
    xs = rng.uniform(lo + 0.3 * (hi - lo), hi - 0.3 * (hi - lo), 12)
    h = 5e-3 * (hi - lo)          # balances noise amplification ~eps/h^order
    for x in xs:
        coarse = fd_derivative(p, x, order, h)
        fine = fd_derivative(p, x, order, h / 2)
        richardson = (4 * fine - coarse) / 3
        analytic = eval(p, x, order)
        assert analytic == pytest.approx(richardson, rel=1e-5, abs=1e-7)


def test_second_derivative_matches_richardson_closely():
    coarse = fd_derivative(CANON, 0.5, 2, 1e-3)
    fine = fd_derivative(CANON, 0.5, 2, 5e-4)
    richardson = (4 * fine - coarse) / 3
    assert eval(CANON, 0.5, 2) == pytest.approx(richardson, rel=1e-6)


@pytest.mark.parametrize("p", [CANON, SKEW])
def test_fd_convergence_rate_is_h_squared(p):
    x = 0.31
    exact = eval(p, x, 2)
    e1 = abs(fd_derivative(p, x, 2, 1e-2) - exact)
    e2 = abs(fd_derivative(p, x, 2, 5e-3) - exact)
    assert e2 == pytest.approx(e1 / 4, rel=0.2)


def test_fd_order_zero_is_eval():
    assert fd_derivative(CANON, 0.4, 0, 1e-3) == eval(CANON, 0.4, 0)


def test_fd_stencil_outside_support():
    assert fd_derivative(CANON, 1.5, 3, 1e-3) == 0.0


def test_integrate_power_against_romberg():
    # independent fixed-grid Romberg oracle
    n = 1 + 2 ** 12
    xs = np.linspace(-1.0, 1.0, n)
    for power in (1, 2, 3):
        ours = integrate_power(CANON, power)
        assert ours.converged
        ref = sci_integrate.romb(eval(CANON, xs, 0) ** power, dx=xs[1] - xs[0])
        np.testing.assert_allclose(ours.value, ref, rtol=1e-8)


def test_integrate_power_zero_and_linear():
    zero = scaled(CANON, 0.0)
    assert integrate_power(zero, 1).value == 0.0
    c = 3.2
    base = integrate_power(CANON, 1).value
    np.testing.assert_allclose(integrate_power(scaled(CANON, c), 1).value,
                               c * base, rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(0.1, 4), q=st.integers(1, 4))
def test_integrate_power_amplitude_scaling(c, q):
    lhs = integrate_power(scaled(CANON, c), q).value
    rhs = c ** q * integrate_power(CANON, q).value
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10)


def test_sum_family():
    two = sum_of([bump(center=-2.0), bump(center=2.0, amplitude=0.5)])
    assert support(two) == (-3.0, 3.0)
    np.testing.assert_allclose(eval(two, -2.0, 0), 1.0)
    np.testing.assert_allclose(eval(two, 2.0, 0), 0.5)
    assert eval(two, 0.0, 0) == 0.0                  # gap between children
    total = integrate_power(two, 1)
    np.testing.assert_allclose(total.value, 1.5 * integrate_power(CANON, 1).value,
                               rtol=1e-9)


def test_max_abs():
    assert max_abs(bump(amplitude=-3.0)) == 3.0
    assert max_abs(SKEW) > 0


def test_shift_moves_support():
    q = shifted(SKEW, 1.7)
    lo, hi = support(SKEW)
    assert support(q) == (lo + 1.7, hi + 1.7)
    np.testing.assert_allclose(eval(q, 0.5 + 1.7, 2), eval(SKEW, 0.5, 2), rtol=1e-13)


def test_unsupported_order_raises():
    with pytest.raises(ValueError, match="order"):
        eval(CANON, 0.0, pot.MAX_DERIVATIVE_ORDER + 1)
    with pytest.raises(ValueError):
        eval(CANON, 0.0, -1)


@pytest.mark.parametrize("kwargs", [
    dict(family="gauss"),
    dict(family="bump", halfwidth=0.0),
    dict(family="bump", halfwidth=-1.0),
    dict(family="bump", amplitude=math.inf),
    dict(family="poly_bump"),
    dict(family="bump", poly_coeffs=(1.0,)),
    dict(family="sum"),
    dict(family="bump", children=(bump(),)),
])
def test_constructor_validation(kwargs):
    with pytest.raises(ConfigError):
        Potential(**kwargs)


def test_config_roundtrip():
    tree = sum_of([CANON, SKEW], amplitude=0.9)
    again = from_dict(to_dict(tree))
    assert again == tree
    xs = np.linspace(-1.2, 1.2, 7)
    np.testing.assert_array_equal(eval(again, xs, 2), eval(tree, xs, 2))


@pytest.mark.parametrize("blob,msg", [
    ({"family": "bump", "widht": 1.0}, "widht"),
    ({"center": 0.0}, "family"),
    ({"family": "bump", "halfwidth": "wide"}, "halfwidth"),
    ({"family": "poly_bump", "poly_coeffs": 3}, "poly_coeffs"),
    ({"family": "sum", "children": "none"}, "children"),
    ([1, 2], "object"),
])
def test_from_dict_diagnostics(blob, msg):
    with pytest.raises(ConfigError, match=msg):
        from_dict(blob)


def test_smoothness_at_support_edge():
    # values and derivatives approach 0 continuously at |u| -> 1
    xs = 1.0 - np.logspace(-12, -2, 30)
    for k in range(6):
        vals = eval(CANON, xs, k)
        assert np.all(np.isfinite(vals))
        assert abs(eval(CANON, 1.0 - 1e-12, k)) < 1e-200


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-0.999, 0.999), k=st.integers(0, 8))
def test_derivative_parity(x, k):
    # even potential: rho^(k)(-x) = (-1)^k rho^(k)(x)
    left = eval(CANON, -x, k)
    right = (-1) ** k * eval(CANON, x, k)
    assert left == pytest.approx(right, rel=1e-10, abs=1e-300)
