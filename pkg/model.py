from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from errors import require
from specfun import _lower_gamma_reg_int, _upper_gamma_reg_int, njit


@dataclass(frozen=True)
class ChannelParams:
    """
    exponential channel gains, all parameters are rates:
    |h|^2 ~ Exp(lambda_m), |g|^2 ~ Exp(beta_m) on the legitimate links,
    |t|^2 ~ Exp(lambda_e), |e|^2 ~ Exp(beta_e) on the eavesdropper branches.
    every distribution depends on them only through c_m and c_e
    """

    power_ratio: float
    beta_m: float
    lambda_m: float
    beta_e: float
    lambda_e: float

    def __post_init__(self):
        for name in ["power_ratio", "beta_m", "lambda_m", "beta_e", "lambda_e"]:
            value = getattr(self, name)
            require(
                isinstance(value, (int, float, np.floating, np.integer))
                and math.isfinite(value)
                and value > 0.0,
                f"{name} must be a positive finite number, got {value}",
            )

    @classmethod
    def from_powers(cls, power: float, interference_power: float, beta_m, lambda_m, beta_e, lambda_e):
        require(interference_power > 0.0, "interference_power must be positive")
        return cls(power / interference_power, beta_m, lambda_m, beta_e, lambda_e)

    @property
    def c_m(self) -> float:
        return self.power_ratio * self.beta_m / self.lambda_m

    @property
    def c_e(self) -> float:
        return self.power_ratio * self.beta_e / self.lambda_e

    def scale_n(self, n_users: int) -> float:
        return self.c_m * (n_users - 1)

    def scale_l(self, eve_antennas: int) -> float:
        return self.c_e * (eve_antennas - 1)


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


@dataclass(frozen=True)
class SelectionConfig:
    n_users: int
    rank: int
    eve_antennas: int

    def __post_init__(self):
        for name in ["n_users", "rank", "eve_antennas"]:
            value = getattr(self, name)
            require(_is_int(value), f"{name} must be an integer, got {value!r}")
            require(value >= 1, f"{name} must be >= 1, got {value}")
        require(
            self.rank <= self.n_users,
            f"rank exceeds n_users ({self.rank} > {self.n_users})",
        )


@dataclass(frozen=True)
class SecrecyTarget:
    rate: float

    def __post_init__(self):
        require(
            math.isfinite(self.rate) and self.rate >= 0.0,
            f"rate must be a nonnegative finite number, got {self.rate}",
        )

    @property
    def threshold(self) -> float:
        return 2.0 ** self.rate


@njit
def _sir_cdf(z, c):
    if z <= 0.0:
        return 0.0
    return z / (c + z)


@njit
def _binomial_sum(z, n_users, v_from, v_to, c):
    # sum_{v=v_from..v_to} C(N, v) F^v (1 - F)^(N - v), F = z / (c + z), terms built in log space
    log_f = -math.log1p(c / z)
    log_g = -math.log1p(z / c)
    lgn = math.lgamma(n_users + 1.0)
    terms = np.empty(v_to - v_from + 1)
    for i in range(v_to - v_from + 1):
        v = v_from + i
        lt = lgn - math.lgamma(v + 1.0) - math.lgamma(n_users - v + 1.0)
        if v > 0:
            lt += v * log_f
        if n_users > v:
            lt += (n_users - v) * log_g
        terms[i] = math.exp(lt)
    terms = np.sort(terms)[::-1]
    s = 0.0
    for t in terms:
        s += t
    return min(s, 1.0)


@njit
def _kth_best_cdf(z, n_users, rank, c):
    if z <= 0.0:
        return 0.0
    return _binomial_sum(z, n_users, n_users - rank + 1, n_users, c)


@njit
def _kth_best_sf(z, n_users, rank, c):
    if z <= 0.0:
        return 1.0
    return _binomial_sum(z, n_users, 0, n_users - rank, c)


@njit
def _eve_sc_cdf(z, l, c):
    if z <= 0.0:
        return 0.0
    return math.exp(-l * math.log1p(c / z))


@njit
def _eve_sc_pdf(z, l, c):
    if z <= 0.0:
        return 0.0
    return math.exp(math.log(l * c) + (l - 1) * math.log(z) - (l + 1) * math.log(c + z))


@njit
def _kth_best_cdf_asymptotic(z, rank, b_n):
    if z <= 0.0:
        return 0.0
    return _upper_gamma_reg_int(rank, b_n / z)


@njit
def _kth_best_sf_asymptotic(z, rank, b_n):
    if z <= 0.0:
        return 1.0
    return _lower_gamma_reg_int(rank, b_n / z)


@njit
def _eve_sc_cdf_asymptotic(z, b_l):
    if z <= 0.0:
        return 0.0
    return math.exp(-b_l / z)


def _check_c(c: float, name: str = "c"):
    require(math.isfinite(c) and c > 0.0, f"{name} must be positive, got {c}")


def _check_l(l: int, minimum: int = 1):
    require(_is_int(l) and l >= minimum, f"eve_antennas must be an integer >= {minimum}, got {l}")


def sir_cdf(z: float, c: float) -> float:
    _check_c(c)
    return _sir_cdf(float(z), float(c))


def kth_best_cdf(z: float, sel: SelectionConfig, c_m: float) -> float:
    _check_c(c_m, "c_m")
    return _kth_best_cdf(float(z), sel.n_users, sel.rank, float(c_m))


def kth_best_sf(z: float, sel: SelectionConfig, c_m: float) -> float:
    """1 - kth_best_cdf, summed over the complementary binomial terms"""
    _check_c(c_m, "c_m")
    return _kth_best_sf(float(z), sel.n_users, sel.rank, float(c_m))


def eve_sc_cdf(z: float, l: int, c_e: float) -> float:
    _check_l(l)
    _check_c(c_e, "c_e")
    return _eve_sc_cdf(float(z), int(l), float(c_e))


def eve_sc_pdf(z: float, l: int, c_e: float) -> float:
    _check_l(l)
    _check_c(c_e, "c_e")
    return _eve_sc_pdf(float(z), int(l), float(c_e))


def kth_best_cdf_asymptotic(z: float, sel: SelectionConfig, c_m: float) -> float:
    """inverse-gamma limit law, Gamma(k, b_N / z) / (k - 1)! with b_N = c_m (N - 1)"""
    _check_c(c_m, "c_m")
    require(sel.n_users >= 2, f"asymptotic CDF requires n_users >= 2, got {sel.n_users}")
    return _kth_best_cdf_asymptotic(float(z), sel.rank, c_m * (sel.n_users - 1))


def eve_sc_cdf_asymptotic(z: float, l: int, c_e: float) -> float:
    _check_l(l, minimum=2)
    _check_c(c_e, "c_e")
    return _eve_sc_cdf_asymptotic(float(z), c_e * (l - 1))
