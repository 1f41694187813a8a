from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardylab import geometry as geo
from hardylab import lemmas
from hardylab import quadrature as quad
from hardylab.errors import ParameterError


def fp(d, p, s, tau="2"):
    return quad.FracParams(d=d, p=Fraction(p), s=Fraction(s), tau=Fraction(tau))


# ---------------------------------------------------------------------------
# elementary two-term bound


def test_elementary_equality_at_unit_ratio():
    # tau=2, c=2: x0 = 1/(c-1) = 1, so a = b = 1 is the tight point
    rep = lemmas.elementary_inequality_slack(1.0, 1.0, 2.0, 2.0)
    assert abs(rep.slack) <= 1e-12
    assert rep.passed


def test_elementary_zero_a_coefficient():
    c, tau, b = 3.0, 2.5, 4.0
    rep = lemmas.elementary_inequality_slack(0.0, b, c, tau)
    coeff = (1.0 - c ** (-1.0 / (tau - 1.0))) ** (1.0 - tau)
    assert rep.slack == pytest.approx((coeff - 1.0) * b**tau, rel=1e-9)
    assert rep.slack >= 0


def test_elementary_parameter_errors():
    with pytest.raises(ParameterError):
        lemmas.elementary_inequality_slack(1.0, 1.0, 1.0, 2.0)
    with pytest.raises(ParameterError):
        lemmas.elementary_inequality_slack(1.0, 1.0, 2.0, 1.0)


def test_elementary_sweep_nonnegative():
    worst, info = lemmas.elementary_inequality_sweep(count=100_000, seed=20240809)
    assert worst >= -1e-12, info


def test_elementary_equality_certified_at_maximizer():
    rng = np.random.default_rng(42)
    for _ in range(100):
        c = rng.uniform(1.05, 10.0)
        tau = rng.uniform(1.2, 6.0)
        x0 = lemmas.maximizer_x0(c, tau)
        rep = lemmas.elementary_inequality_slack(x0, 1.0, c, tau)
        assert abs(rep.slack) <= 1e-9, (c, tau, rep.slack)


@settings(max_examples=300, deadline=None)
@given(
    a=st.floats(-10, 10),
    b=st.floats(-10, 10),
    c=st.floats(1.01, 10),
    tau=st.floats(1.05, 6),
)
def test_elementary_slack_property(a, b, c, tau):
    assert lemmas.elementary_inequality_slack(a, b, c, tau).slack >= -1e-12


# ---------------------------------------------------------------------------
# maximizer


def test_maximizer_values():
    assert lemmas.maximizer_x0(2.0, 2.0) == pytest.approx(1.0)
    assert lemmas.maximizer_x0(1e12, 2.0) == pytest.approx(1e-12, rel=1e-6)


def test_maximizer_is_stationary():
    # c bounded away from 1 keeps x0 (and hence the float quantization of
    # the stationary point) small enough for an absolute 1e-8 residual
    rng = np.random.default_rng(7)
    for _ in range(100):
        c = rng.uniform(1.25, 10.0)
        tau = rng.uniform(1.2, 6.0)
        assert abs(lemmas.stationarity_residual(c, tau)) <= 1e-8


def test_maximizer_is_stationary_relative_to_term_scale():
    # wider range: normalize by the size of the two cancelling terms of f'
    rng = np.random.default_rng(8)
    for _ in range(100):
        c = rng.uniform(1.01, 10.0)
        tau = rng.uniform(1.2, 6.0)
        x0 = lemmas.maximizer_x0(c, tau)
        scale = tau * (1 + x0) ** (tau - 1)
        assert abs(lemmas.stationarity_residual(c, tau)) <= 1e-10 * scale


def test_maximum_value_matches_function_at_x0():
    for c, tau in [(2.0, 2.0), (3.0, 1.7), (8.5, 5.0)]:
        x0 = lemmas.maximizer_x0(c, tau)
        f_at_x0 = (1 + x0) ** tau - c * x0**tau
        assert lemmas.maximum_value(c, tau) == pytest.approx(f_at_x0, rel=1e-12)


# ---------------------------------------------------------------------------
# average-difference bound


def test_average_difference_closed_form_case():
    # u(x) = x, E = (0, 1/2), F = (1/2, 1), tau = 2:
    # LHS = |1/4 - 3/4|^2 = 1/4; RHS = 4 * 2 * (1/12) * ... = 2/3; slack = 5/12
    u = quad.AxisPolynomial((0.0, 1.0), geo.Box((0.0,), (1.0,)))
    E = geo.Box((0.0,), (0.5,))
    F = geo.Box((0.5,), (1.0,))
    rep = lemmas.average_difference_slack(u, E, F, 2.0, cells_per_axis=256)
    assert rep.slack == pytest.approx(5.0 / 12.0, rel=1e-3)
    assert rep.passed


def test_average_difference_constant_has_zero_slack():
    u = quad.Constant(3.0, geo.Box((0.0,), (1.0,)))
    E = geo.Box((0.0,), (0.5,))
    F = geo.Box((0.5,), (1.0,))
    rep = lemmas.average_difference_slack(u, E, F, 2.0)
    assert rep.slack == pytest.approx(0.0, abs=1e-14)


def test_average_difference_rejects_overlap():
    u = quad.Constant(1.0, geo.Box((0.0,), (1.0,)))
    with pytest.raises(ParameterError):
        lemmas.average_difference_slack(
            u, geo.Box((0.0,), (0.6,)), geo.Box((0.5,), (1.0,)), 2.0
        )


def test_adjacent_pair_battery_small():
    worst, ran = lemmas.adjacent_pair_battery(count=60, seed=3)
    assert ran == 60
    assert worst >= -1e-9


# ---------------------------------------------------------------------------
# scaled mean-oscillation ratio


def test_scaled_ratio_is_dilation_invariant_on_cubes():
    u = quad.TensorBump((0.5,), (0.4,))
    params = fp(1, "2", "1/2")
    base = geo.Box((0.0,), (1.0,))
    r_half = lemmas.scaled_sobolev_ratio(u, 0.5, params, 2.0, resolution=128, region=base)
    r_quarter = lemmas.scaled_sobolev_ratio(u, 0.25, params, 2.0, resolution=128, region=base)
    assert r_half / r_quarter == pytest.approx(1.0, abs=0.02)


def test_scaled_ratio_constant_profile_is_zero():
    u = quad.Constant(2.0, geo.Box((0.0,), (1.0,)))
    params = fp(1, "2", "1/2")
    assert lemmas.scaled_sobolev_ratio(u, 0.5, params, 2.0, resolution=64) == 0.0


def test_scaled_ratio_annulus_variant():
    # dimension-critical coupling on rings: sp = d = 2
    params = fp(2, "4", "1/2", "4")
    ring = geo.Annulus(1.0, 2.0, 2)
    u = quad.TensorBump((1.5, 0.0), (0.35, 0.35))
    vals = [
        lemmas.scaled_sobolev_ratio(u, lam, params, 4.0, resolution=32, region=ring)
        for lam in (1.0, 0.5, 0.25)
    ]
    assert max(vals) / min(vals) <= 1.03


def test_scaled_ratio_tau_admissibility():
    u = quad.TensorBump((0.5,), (0.4,))
    with pytest.raises(ParameterError):
        lemmas.scaled_sobolev_ratio(u, 0.5, fp(1, "2", "1/2"), 1.5)  # tau < p


# ---------------------------------------------------------------------------
# power-sum bound


def test_power_sum_single_element():
    rep = lemmas.power_sum_slack([3.7], 2.5)
    assert rep.slack == 0.0


def test_power_sum_pair():
    rep = lemmas.power_sum_slack([1.0, 1.0], 2.0)
    assert rep.slack == pytest.approx(2.0)


def test_power_sum_empty_rejected():
    with pytest.raises(ParameterError):
        lemmas.power_sum_slack([], 2.0)


@settings(max_examples=300, deadline=None)
@given(
    values=st.lists(st.floats(-5, 5), min_size=1, max_size=12),
    beta=st.floats(1.0, 5.0),
)
def test_power_sum_property(values, beta):
    assert lemmas.power_sum_slack(values, beta).slack >= -1e-9


# ---------------------------------------------------------------------------
# telescoping coefficients


def test_telescoping_identity_exact():
    for k in range(-40, -1):
        base_from_c, base_direct = lemmas.telescoping_coefficient_parts(k)
        assert base_from_c == base_direct  # exact rationals
        for tau in (1.5, 2.0, 3.0):
            lhs, rhs = lemmas.telescoping_coefficient_identity(k, tau)
            assert lhs == pytest.approx(rhs, rel=1e-12)


def test_coefficient_decay_ratio_range_and_limit():
    for tau in (1.5, 2.0, 3.0, 6.0):
        ratios = [lemmas.coefficient_decay_ratio(k, tau) for k in range(-400, -3)]
        assert all(0.2 <= r <= 5.0 for r in ratios)
        deep = lemmas.coefficient_decay_ratio(-400, tau)
        # the ratio approaches its limit at O(1/j); at j = 400, tau = 6 the
        # residual is about tau/(4j) = 0.4%
        assert deep == pytest.approx(lemmas.coefficient_decay_limit(tau), rel=1e-2)
        # convergence: deeper layers sit closer to the limit
        shallow_gap = abs(lemmas.coefficient_decay_ratio(-4, tau) - lemmas.coefficient_decay_limit(tau))
        deep_gap = abs(deep - lemmas.coefficient_decay_limit(tau))
        assert deep_gap < shallow_gap
