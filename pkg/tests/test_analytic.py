import math

import pytest
from numpy.testing import assert_allclose

import analytic
from analytic import (
    SecrecyMetrics,
    clamp_probability,
    esc_asymptotic,
    esc_gap_limit,
    esc_scaling_approx,
    secrecy_metrics,
    sop_asymptotic_n,
    sop_asymptotic_nl,
    sop_equal_nl_limit,
    sop_exact,
    spsc_asymptotic_n,
    spsc_asymptotic_nl,
    spsc_exact,
)
from errors import DomainError, NumericError
from model import ChannelParams, SecrecyTarget, SelectionConfig
from oracle import (
    esc_asymptotic_quadrature,
    sop_asymptotic_nl_quadrature,
    sop_asymptotic_quadrature,
    sop_quadrature,
)
from specfun import tricomi_u

LN2 = math.log(2.0)

# c_m = 8, c_e = 2.5
OUTAGE = ChannelParams(power_ratio=2.0, beta_m=2.0, lambda_m=0.5, beta_e=5.0, lambda_e=4.0)
# c_m = 2, c_e = 4
ERGODIC = ChannelParams(power_ratio=4.0, beta_m=2.0, lambda_m=4.0, beta_e=3.0, lambda_e=3.0)
# c_m = 2, c_e = 1
ERGODIC_UNIT = ChannelParams(power_ratio=4.0, beta_m=2.0, lambda_m=4.0, beta_e=1.0, lambda_e=4.0)


def test_sop_symmetric_point():
    for c in [1.0, 3.0]:
        params = ChannelParams(c, 1.0, 1.0, 1.0, 1.0)
        assert_allclose(sop_exact(params, SelectionConfig(1, 1, 1), SecrecyTarget(0.0)), 0.5, rtol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 5, 10])
@pytest.mark.parametrize("l", [1, 2, 3])
def test_sop_spsc_complement(n, l):
    for k in range(1, min(n, 2) + 1):
        sel = SelectionConfig(n, k, l)
        total = sop_exact(OUTAGE, sel, SecrecyTarget(0.0)) + spsc_exact(OUTAGE, sel)
        assert_allclose(total, 1.0, atol=1e-12)


def test_sop_exact_example():
    sel = SelectionConfig(10, 2, 2)
    target = SecrecyTarget(1.0)
    exact = sop_exact(OUTAGE, sel, target)
    assert 0.0 < exact < 1.0
    assert_allclose(exact, sop_quadrature(OUTAGE, sel, target).value, rtol=1e-6)


@pytest.mark.parametrize("params", [OUTAGE, ERGODIC], ids=["c8_2.5", "c2_4"])
@pytest.mark.parametrize("n", [2, 10, 30])
@pytest.mark.parametrize("l", [1, 3])
@pytest.mark.parametrize("rate", [0.0, 1.0, 4.0])
def test_sop_exact_against_quadrature(params, n, l, rate):
    target = SecrecyTarget(rate)
    for k in [1, 2]:
        sel = SelectionConfig(n, k, l)
        assert_allclose(sop_exact(params, sel, target), sop_quadrature(params, sel, target).value, rtol=1e-6)


def test_sop_exact_depends_on_products_only():
    other = ChannelParams(power_ratio=1.0, beta_m=4.0, lambda_m=0.5, beta_e=5.0, lambda_e=2.0)
    sel = SelectionConfig(10, 2, 2)
    for rate in [0.0, 1.0, 3.0]:
        target = SecrecyTarget(rate)
        assert sop_exact(OUTAGE, sel, target) == sop_exact(other, sel, target)


def test_sop_exact_monotone():
    sel = SelectionConfig(10, 2, 2)
    by_rate = [sop_exact(OUTAGE, sel, SecrecyTarget(r)) for r in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]]
    assert all(b > a for a, b in zip(by_rate, by_rate[1:]))
    target = SecrecyTarget(1.0)
    by_n = [sop_exact(OUTAGE, SelectionConfig(n, 1, 2), target) for n in [2, 5, 10, 20, 50]]
    assert all(b < a for a, b in zip(by_n, by_n[1:]))
    by_l = [sop_exact(OUTAGE, SelectionConfig(10, 1, l), target) for l in [1, 2, 4, 8]]
    assert all(b > a for a, b in zip(by_l, by_l[1:]))
    by_k = [sop_exact(OUTAGE, SelectionConfig(10, k, 2), target) for k in [1, 2, 3]]
    assert all(b > a for a, b in zip(by_k, by_k[1:]))


def test_sop_exact_monotone_grid():
    ns, ks, ls, rates = [2, 5, 10, 20], [1, 2], [1, 2, 4], [0.0, 0.5, 1.0, 4.0]
    sop = {
        (n, k, l, r): sop_exact(OUTAGE, SelectionConfig(n, k, l), SecrecyTarget(r))
        for n in ns
        for k in ks
        for l in ls
        for r in rates
    }
    for (n, k, l, r), value in sop.items():
        assert 0.0 <= value <= 1.0
        for nxt in ns[ns.index(n) + 1 :]:
            assert sop[(nxt, k, l, r)] <= value + 1e-12
        if k == 1:
            assert sop[(n, 2, l, r)] >= value - 1e-12
        for nxt in ls[ls.index(l) + 1 :]:
            assert sop[(n, k, nxt, r)] >= value - 1e-12
        for nxt in rates[rates.index(r) + 1 :]:
            assert sop[(n, k, l, nxt)] >= value - 1e-12


def test_sop_exact_high_rate():
    assert sop_exact(OUTAGE, SelectionConfig(10, 1, 2), SecrecyTarget(30.0)) > 0.999


def test_asymptotic_n_matches_tricomi_form():
    sel = SelectionConfig(20, 2, 3)
    target = SecrecyTarget(1.0)
    x = OUTAGE.scale_n(20) / (target.threshold * OUTAGE.c_e)
    expected = 1.0 - x**2 * tricomi_u(2, 2 + 1 - 3, x)
    assert_allclose(sop_asymptotic_n(OUTAGE, sel, target), expected, rtol=1e-12)


@pytest.mark.parametrize("n", [5, 20, 200])
@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("l", [1, 2, 3])
@pytest.mark.parametrize("rate", [0.0, 1.0])
def test_asymptotic_n_against_quadrature(n, k, l, rate):
    sel = SelectionConfig(n, k, l)
    target = SecrecyTarget(rate)
    reference = sop_asymptotic_quadrature(OUTAGE, sel, target).value
    assert_allclose(sop_asymptotic_n(OUTAGE, sel, target), reference, rtol=1e-7)


def test_asymptotic_n_converges_to_exact():
    target = SecrecyTarget(1.0)
    errors = {}
    for n in [20, 200]:
        sel = SelectionConfig(n, 1, 2)
        exact = sop_exact(OUTAGE, sel, target)
        errors[n] = abs(sop_asymptotic_n(OUTAGE, sel, target) - exact) / exact
    assert errors[200] < 0.05
    assert errors[200] < errors[20]


def test_spsc_asymptotic_n():
    sel = SelectionConfig(500, 2, 2)
    assert_allclose(spsc_asymptotic_n(OUTAGE, sel), spsc_exact(OUTAGE, sel), rtol=0.02)
    assert_allclose(
        spsc_asymptotic_n(OUTAGE, sel), 1.0 - sop_asymptotic_n(OUTAGE, sel, SecrecyTarget(0.0)), atol=1e-15
    )


def test_asymptotic_requires_two_users():
    with pytest.raises(DomainError):
        sop_asymptotic_n(OUTAGE, SelectionConfig(1, 1, 1), SecrecyTarget(1.0))
    with pytest.raises(DomainError):
        sop_asymptotic_nl(OUTAGE, SelectionConfig(10, 1, 1), SecrecyTarget(1.0))


def test_asymptotic_nl_closed_form():
    sel = SelectionConfig(20, 2, 5)
    target = SecrecyTarget(1.0)
    ratio = 2.0 * OUTAGE.scale_l(5) / OUTAGE.scale_n(20)
    assert_allclose(sop_asymptotic_nl(OUTAGE, sel, target), 1.0 - (1.0 + ratio) ** -2, rtol=1e-14)
    assert_allclose(spsc_asymptotic_nl(OUTAGE, sel), (1.0 + OUTAGE.scale_l(5) / OUTAGE.scale_n(20)) ** -2, rtol=1e-14)


@pytest.mark.parametrize("n,k,l", [(20, 1, 2), (20, 2, 8), (100, 3, 40)])
def test_asymptotic_nl_against_quadrature(n, k, l):
    sel = SelectionConfig(n, k, l)
    target = SecrecyTarget(0.5)
    reference = sop_asymptotic_nl_quadrature(OUTAGE, sel, target).value
    assert_allclose(sop_asymptotic_nl(OUTAGE, sel, target), reference, rtol=1e-8)


def test_equal_nl_limit():
    target = SecrecyTarget(0.5)
    ratio = math.sqrt(2.0) * 0.3125
    limit = sop_equal_nl_limit(OUTAGE, 1, target)
    assert_allclose(limit, 1.0 - 1.0 / (1.0 + ratio), rtol=1e-14)
    assert abs(limit - 0.3065) < 1e-4
    assert_allclose(sop_equal_nl_limit(OUTAGE, 2, target), 1.0 - (1.0 + ratio) ** -2, rtol=1e-14)
    # with N = L the large-N, large-L form no longer depends on N
    for n in [2, 20, 256]:
        assert_allclose(sop_asymptotic_nl(OUTAGE, SelectionConfig(n, 1, n), target), limit, rtol=1e-14)


@pytest.mark.parametrize("params", [ERGODIC, ERGODIC_UNIT], ids=["c_e=4", "c_e=1"])
@pytest.mark.parametrize("n,k", [(50, 1), (100, 2), (500, 3)])
def test_esc_asymptotic_against_quadrature(params, n, k):
    reference = esc_asymptotic_quadrature(params, n, k).value
    assert_allclose(esc_asymptotic(params, n, k), reference, rtol=1e-6)


@pytest.mark.parametrize("n,k", [(50, 1), (500, 3)])
def test_esc_branch_continuity(n, k):
    at_one = esc_asymptotic(ERGODIC_UNIT, n, k)
    for beta_e in [1.0 - 1e-4, 1.0 + 1e-4]:
        near = ChannelParams(4.0, 2.0, 4.0, beta_e, 4.0)
        assert abs(esc_asymptotic(near, n, k) - at_one) < 1e-3


def test_esc_rank_gap():
    gap = esc_asymptotic(ERGODIC, 10_000, 1) - esc_asymptotic(ERGODIC, 10_000, 2)
    assert abs(gap - 1.0 / LN2) < 0.02


def test_esc_scaling_approx():
    assert_allclose(
        esc_scaling_approx(ERGODIC, 129, 1) - esc_scaling_approx(ERGODIC, 65, 1), 1.0, rtol=1e-12
    )
    assert_allclose(
        esc_scaling_approx(ERGODIC, 100, 1) - esc_scaling_approx(ERGODIC, 100, 3), 2.1640425613334453, rtol=1e-13
    )
    assert abs(esc_scaling_approx(ERGODIC, 10_000, 1) - esc_asymptotic(ERGODIC, 10_000, 1)) < 0.05
    c = ERGODIC.c_e
    expected = (-analytic.digamma_int(2) + math.log(ERGODIC.scale_n(40)) - c * math.log(c) / (c - 1.0)) / LN2
    assert_allclose(esc_scaling_approx(ERGODIC, 40, 2), expected, rtol=1e-14)
    expected_unit = (-analytic.digamma_int(2) + math.log(ERGODIC_UNIT.scale_n(40)) - 1.0) / LN2
    assert_allclose(esc_scaling_approx(ERGODIC_UNIT, 40, 2), expected_unit, rtol=1e-14)


def test_esc_gap_limit():
    assert esc_gap_limit(1) == 0.0
    assert_allclose(esc_gap_limit(2), 1.4426950408889634, rtol=1e-15)
    assert_allclose(esc_gap_limit(3), 2.1640425613334453, rtol=1e-15)
    with pytest.raises(DomainError):
        esc_gap_limit(0)


def test_esc_rejects_bad_points():
    with pytest.raises(DomainError):
        esc_asymptotic(ERGODIC, 1, 1)
    with pytest.raises(DomainError, match="rank exceeds n_users"):
        esc_asymptotic(ERGODIC, 3, 4)


def test_clamp_probability():
    assert clamp_probability(1.0 + 5e-10, "p") == 1.0
    assert clamp_probability(-5e-10, "p") == 0.0
    assert clamp_probability(0.25, "p") == 0.25
    with pytest.raises(NumericError, match="out of"):
        clamp_probability(1.1, "p")
    with pytest.raises(NumericError):
        clamp_probability(-1e-6, "p")


def test_secrecy_metrics():
    sel = SelectionConfig(10, 2, 2)
    target = SecrecyTarget(1.0)
    metrics = secrecy_metrics(OUTAGE, sel, target)
    assert metrics.method_tag == "exact"
    assert metrics.sop == sop_exact(OUTAGE, sel, target)
    assert metrics.spsc == spsc_exact(OUTAGE, sel)
    nl = secrecy_metrics(OUTAGE, sel, target, method="asymptotic_nl")
    assert nl.sop == sop_asymptotic_nl(OUTAGE, sel, target)
    with pytest.raises(DomainError):
        secrecy_metrics(OUTAGE, sel, target, method="monte_carlo")
    with pytest.raises(DomainError):
        SecrecyMetrics(sop=1.5, spsc=0.1, method_tag="exact")
    with pytest.raises(DomainError):
        SecrecyMetrics(sop=0.5, spsc=0.1, method_tag="guess")
