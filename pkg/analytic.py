from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import NumericError, require
from model import ChannelParams, SecrecyTarget, SelectionConfig
from specfun import (
    digamma_int,
    exp_integral_e1_scaled,
    harmonic,
    ln_beta,
    ln_gauss_2f1,
    tricomi_u,
    upper_gamma_scaled,
    v_log_moment,
)

LN2 = math.log(2.0)
CLAMP_TOL = 1e-9
UNIT_CE_TOL = 1e-6
PROVENANCES = ("exact", "asymptotic_n", "asymptotic_nl", "quadrature", "monte_carlo")


@dataclass(frozen=True)
class SecrecyMetrics:
    sop: float
    spsc: float
    method_tag: str

    def __post_init__(self):
        require(self.method_tag in PROVENANCES, f"unknown method tag {self.method_tag}")
        for name in ["sop", "spsc"]:
            value = getattr(self, name)
            require(0.0 <= value <= 1.0, f"{name} must be a probability, got {value}")


def clamp_probability(p: float, what: str) -> float:
    if -CLAMP_TOL <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + CLAMP_TOL:
        return 1.0
    if not 0.0 <= p <= 1.0:
        raise NumericError(f"{what} out of [0, 1]", value=p)
    return p


def _ln_binom(n: int, v: int) -> float:
    return math.lgamma(n + 1.0) - math.lgamma(v + 1.0) - math.lgamma(n - v + 1.0)


def _outage_terms(params: ChannelParams, sel: SelectionConfig, tau: float) -> np.ndarray:
    """
    signed terms of the double sum giving Pr{Z_(N-k+1) <= tau - 1 + tau X_(L)}
    at tau == 1 only j == v contributes, 0^0 being 1
    """
    c_m, c_e = params.c_m, params.c_e
    n, k, l = sel.n_users, sel.rank, sel.eve_antennas
    tm1 = tau - 1.0
    shifted = tm1 + c_m
    arg = 1.0 - shifted / (tau * c_e)
    log_prefactor = math.log(l) - l * math.log(c_e) - l * math.log(tau)
    log_shifted = math.log(shifted)
    log_tm1 = math.log(tm1) if tm1 > 0.0 else 0.0
    log_c_m = math.log(c_m)

    terms = []
    for v in range(n - k + 1, n + 1):
        log_outer = log_prefactor + _ln_binom(n, v) + (n - v) * log_c_m
        for j in range(0 if tm1 > 0.0 else v, v + 1):
            ln_f, sign = ln_gauss_2f1(l + 1, l + j, n + l + 1, arg)
            log_term = (
                log_outer
                + _ln_binom(v, j)
                + (v - j) * log_tm1
                + ln_beta(l + j, n - j + 1)
                + (l + j - n) * log_shifted
                + ln_f
            )
            terms.append(sign * math.exp(log_term))
    terms = np.array(terms)
    return terms[np.argsort(-np.abs(terms), kind="stable")]


def _outage_sum(params: ChannelParams, sel: SelectionConfig, tau: float) -> float:
    # fsum is correctly rounded, so the descending order only matters for the diagnostics
    return math.fsum(_outage_terms(params, sel, tau))


def sop_exact(params: ChannelParams, sel: SelectionConfig, target: SecrecyTarget) -> float:
    return clamp_probability(_outage_sum(params, sel, target.threshold), "sop_exact")


def spsc_exact(params: ChannelParams, sel: SelectionConfig) -> float:
    return clamp_probability(1.0 - _outage_sum(params, sel, 1.0), "spsc_exact")


def _require_asymptotic_n(sel: SelectionConfig):
    require(sel.n_users >= 2, f"asymptotic in N requires n_users >= 2, got {sel.n_users}")


def _asymptotic_success(params: ChannelParams, sel: SelectionConfig, tau: float) -> float:
    # x^k U(k, k + 1 - L, x), x = b_N / (tau c_e)
    _require_asymptotic_n(sel)
    k, l = sel.rank, sel.eve_antennas
    x = params.scale_n(sel.n_users) / (tau * params.c_e)
    if k == 1 and l == 1:
        return x * exp_integral_e1_scaled(x)
    return math.exp(k * math.log(x) + math.log(tricomi_u(k, k + 1 - l, x)))


def sop_asymptotic_n(params: ChannelParams, sel: SelectionConfig, target: SecrecyTarget) -> float:
    return clamp_probability(
        1.0 - _asymptotic_success(params, sel, target.threshold), "sop_asymptotic_n"
    )


def spsc_asymptotic_n(params: ChannelParams, sel: SelectionConfig) -> float:
    return clamp_probability(_asymptotic_success(params, sel, 1.0), "spsc_asymptotic_n")


def _require_asymptotic_nl(sel: SelectionConfig):
    _require_asymptotic_n(sel)
    require(
        sel.eve_antennas >= 2,
        f"asymptotic in N and L requires eve_antennas >= 2, got {sel.eve_antennas}",
    )


def _ln_nl_success(params: ChannelParams, sel: SelectionConfig, tau: float) -> float:
    # ln (1 + tau b_L / b_N)^-k
    _require_asymptotic_nl(sel)
    ratio = tau * params.scale_l(sel.eve_antennas) / params.scale_n(sel.n_users)
    return -sel.rank * math.log1p(ratio)


def sop_asymptotic_nl(params: ChannelParams, sel: SelectionConfig, target: SecrecyTarget) -> float:
    return clamp_probability(
        -math.expm1(_ln_nl_success(params, sel, target.threshold)), "sop_asymptotic_nl"
    )


def spsc_asymptotic_nl(params: ChannelParams, sel: SelectionConfig) -> float:
    return clamp_probability(math.exp(_ln_nl_success(params, sel, 1.0)), "spsc_asymptotic_nl")


def sop_equal_nl_limit(params: ChannelParams, rank: int, target: SecrecyTarget) -> float:
    """N = L -> inf; depends on the channel only through beta_e lambda_m / (lambda_e beta_m)"""
    require(rank >= 1, f"rank must be >= 1, got {rank}")
    ratio = target.threshold * params.beta_e * params.lambda_m / (params.lambda_e * params.beta_m)
    return clamp_probability(-math.expm1(-rank * math.log1p(ratio)), "sop_equal_nl_limit")


def _require_esc(params: ChannelParams, n_users: int, rank: int):
    require(n_users >= 2, f"asymptotic ESC requires n_users >= 2, got {n_users}")
    require(1 <= rank <= n_users, f"rank exceeds n_users ({rank} > {n_users})")


def esc_asymptotic(params: ChannelParams, n_users: int, rank: int) -> float:
    """
    large-N ergodic secrecy capacity of the rank-th best user against a single-antenna
    eavesdropper, bits/s/Hz
    """
    _require_esc(params, n_users, rank)
    b = params.scale_n(n_users)
    c = params.c_e
    if abs(c - 1.0) <= UNIT_CE_TOL:
        value = -digamma_int(rank) + v_log_moment(rank, b) - upper_gamma_scaled(rank, b)
    else:
        value = -digamma_int(rank) + (c * v_log_moment(rank, b / c) - v_log_moment(rank, b)) / (c - 1.0)
    return value / LN2


def esc_scaling_approx(params: ChannelParams, n_users: int, rank: int) -> float:
    _require_esc(params, n_users, rank)
    c = params.c_e
    if abs(c - 1.0) <= UNIT_CE_TOL:
        penalty = 1.0
    else:
        penalty = c * math.log(c) / (c - 1.0)
    return (-digamma_int(rank) + math.log(params.scale_n(n_users)) - penalty) / LN2


def esc_gap_limit(rank: int) -> float:
    require(rank >= 1, f"rank must be >= 1, got {rank}")
    return harmonic(rank - 1) / LN2


def secrecy_metrics(
    params: ChannelParams, sel: SelectionConfig, target: SecrecyTarget, method: str = "exact"
) -> SecrecyMetrics:
    if method == "exact":
        sop, spsc = sop_exact(params, sel, target), spsc_exact(params, sel)
    elif method == "asymptotic_n":
        sop, spsc = sop_asymptotic_n(params, sel, target), spsc_asymptotic_n(params, sel)
    elif method == "asymptotic_nl":
        sop, spsc = sop_asymptotic_nl(params, sel, target), spsc_asymptotic_nl(params, sel)
    else:
        require(False, f"secrecy_metrics serves exact, asymptotic_n, asymptotic_nl; got {method}")
    logging.debug(f"{method} n={sel.n_users} k={sel.rank} l={sel.eve_antennas} sop={sop} spsc={spsc}")
    return SecrecyMetrics(sop=sop, spsc=spsc, method_tag=method)
