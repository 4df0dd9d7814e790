import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from analytic import esc_asymptotic, sop_exact, spsc_exact
from errors import DomainError
from model import ChannelParams, SecrecyTarget, SelectionConfig, eve_sc_cdf, kth_best_cdf
from oracle import (
    BLOCK_SIZE,
    EstimateWithCI,
    SimConfig,
    draw_selection_sirs,
    esc_asymptotic_quadrature,
    esc_quadrature,
    mc_estimate,
    mc_estimate_rates,
    secrecy_capacity,
    sop_quadrature,
    spsc_quadrature,
)

OUTAGE = ChannelParams(power_ratio=2.0, beta_m=2.0, lambda_m=0.5, beta_e=5.0, lambda_e=4.0)
ERGODIC = ChannelParams(power_ratio=4.0, beta_m=2.0, lambda_m=4.0, beta_e=3.0, lambda_e=3.0)
SYMMETRIC = ChannelParams(1.0, 1.0, 1.0, 1.0, 1.0)


def test_estimate_with_ci():
    est = EstimateWithCI(mean=0.5, std_error=0.01, n_samples=1000)
    assert_allclose(est.half_width_95, 0.0196)
    assert est.contains(0.53)
    assert not est.contains(0.54)


def test_sim_config():
    sim = SimConfig(n_samples=BLOCK_SIZE * 3 + 1, batch_size=BLOCK_SIZE * 2)
    assert sim.n_blocks == 4
    assert sim.blocks_per_batch == 2
    with pytest.raises(DomainError):
        SimConfig(n_samples=0)
    with pytest.raises(DomainError):
        SimConfig(n_samples=10, seed=-1)


def test_sop_quadrature_single_user():
    # one user against one antenna, identical channels
    result = sop_quadrature(SYMMETRIC, SelectionConfig(1, 1, 1), SecrecyTarget(0.0))
    assert_allclose(result.value, 0.5, rtol=1e-9)


def test_spsc_quadrature_complements_sop():
    sel = SelectionConfig(10, 2, 2)
    sop = sop_quadrature(OUTAGE, sel, SecrecyTarget(0.0)).value
    assert_allclose(spsc_quadrature(OUTAGE, sel).value, 1.0 - sop, rtol=1e-14)
    assert_allclose(spsc_quadrature(OUTAGE, sel).value, spsc_exact(OUTAGE, sel), rtol=1e-7)


def test_esc_quadrature_single_antenna_matches_large_n_form():
    # for moderate N the finite-N integral sits close to the large-N closed form
    exact_n = esc_quadrature(ERGODIC, SelectionConfig(200, 1, 1)).value
    assert abs(exact_n - esc_asymptotic(ERGODIC, 200, 1)) < 0.05


def test_esc_quadrature_strong_eavesdropper():
    strong = ChannelParams(power_ratio=1.0, beta_m=1.0, lambda_m=1.0, beta_e=1e6, lambda_e=1.0)
    assert strong.c_e == 1e6 * strong.c_m
    value = esc_quadrature(strong, SelectionConfig(1, 1, 1)).value
    assert 0.0 <= value < 1e-3


def test_esc_quadrature_grows_with_users():
    values = [esc_quadrature(ERGODIC, SelectionConfig(n, 1, 1)).value for n in [2, 8, 32, 128]]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert_allclose(
        esc_asymptotic_quadrature(ERGODIC, 128, 2).value, esc_asymptotic(ERGODIC, 128, 2), rtol=1e-6
    )


def test_secrecy_capacity():
    zk = np.array([3.0, 1.0, 1.0, 7.0])
    x = np.array([1.0, 3.0, 1.0, 0.0])
    cs = secrecy_capacity(zk, x)
    assert_allclose(cs, [1.0, 0.0, 0.0, 3.0], atol=1e-15)


def test_mc_symmetric_point():
    sim = SimConfig(n_samples=1_000_000, seed=42)
    est = mc_estimate(SYMMETRIC, SelectionConfig(1, 1, 1), SecrecyTarget(0.0), sim)
    assert est.sop.contains(0.5)
    assert est.sop.n_samples == 1_000_000
    assert_allclose(est.sop.mean + est.spsc.mean, 1.0, atol=1e-15)


def test_mc_brackets_exact():
    sel = SelectionConfig(10, 2, 2)
    target = SecrecyTarget(1.0)
    est = mc_estimate(OUTAGE, sel, target, SimConfig(n_samples=1_000_000, seed=7))
    assert est.sop.contains(sop_exact(OUTAGE, sel, target))
    assert est.spsc.contains(spsc_exact(OUTAGE, sel))


def test_mc_deterministic():
    sel = SelectionConfig(5, 2, 2)
    target = SecrecyTarget(0.5)
    sim = SimConfig(n_samples=50_000, seed=3)
    a = mc_estimate(OUTAGE, sel, target, sim)
    b = mc_estimate(OUTAGE, sel, target, sim)
    assert a == b
    other_point = mc_estimate(OUTAGE, sel, target, sim, point_index=1)
    assert other_point.sop.mean != a.sop.mean


def test_mc_independent_of_batching_and_workers():
    sel = SelectionConfig(6, 2, 3)
    target = SecrecyTarget(1.0)
    reference = mc_estimate(OUTAGE, sel, target, SimConfig(n_samples=30_000, seed=11, batch_size=65536))
    small_batches = mc_estimate(OUTAGE, sel, target, SimConfig(n_samples=30_000, seed=11, batch_size=BLOCK_SIZE))
    assert small_batches.sop.mean == reference.sop.mean
    assert small_batches.esc.mean == reference.esc.mean
    assert small_batches.esc.std_error == reference.esc.std_error
    pooled = mc_estimate(
        OUTAGE, sel, target, SimConfig(n_samples=30_000, seed=11, batch_size=BLOCK_SIZE), n_cpus=2
    )
    assert pooled == small_batches


def test_mc_rates_share_one_simulation():
    sel = SelectionConfig(8, 1, 2)
    sim = SimConfig(n_samples=20_000, seed=5)
    rates = [0.0, 1.0, 4.0]
    shared = mc_estimate_rates(OUTAGE, sel, rates, sim)
    for rate, est in zip(rates, shared):
        assert est == mc_estimate(OUTAGE, sel, SecrecyTarget(rate), sim)
    assert shared[0].sop.mean <= shared[1].sop.mean <= shared[2].sop.mean


def test_mc_outage_count_complements_positive_capacity():
    sel = SelectionConfig(4, 1, 1)
    est = mc_estimate(OUTAGE, sel, SecrecyTarget(0.0), SimConfig(n_samples=10_000, seed=1))
    n = est.sop.n_samples
    assert round(est.sop.mean * n) + round(est.spsc.mean * n) == n


def test_simulated_sirs_match_cdfs():
    # Dvoretzky-Kiefer-Wolfowitz band at 99.9% confidence, both samples
    n_samples = 1_000_000
    sel = SelectionConfig(10, 3, 4)
    zk, x = draw_selection_sirs(OUTAGE, sel, n_samples, seed=2024)
    assert len(zk) == len(x) == n_samples
    zk, x = np.sort(zk), np.sort(x)
    eps = math.sqrt(math.log(2.0 / 0.001) / (2.0 * n_samples))
    for z in np.geomspace(0.5, 500.0, 20):
        empirical = np.searchsorted(zk, z, side="right") / n_samples
        assert abs(empirical - kth_best_cdf(z, sel, OUTAGE.c_m)) <= eps
        empirical = np.searchsorted(x, z, side="right") / n_samples
        assert abs(empirical - eve_sc_cdf(z, sel.eve_antennas, OUTAGE.c_e)) <= eps


@pytest.mark.slow
def test_mc_brackets_exact_ten_million():
    sel = SelectionConfig(10, 2, 2)
    target = SecrecyTarget(1.0)
    est = mc_estimate(OUTAGE, sel, target, SimConfig(n_samples=10_000_000, seed=42), n_cpus=4)
    assert est.sop.contains(sop_exact(OUTAGE, sel, target))
    esc = esc_quadrature(OUTAGE, sel).value
    assert est.esc.contains(esc)
