from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Optional

import numpy as np
from tqdm import tqdm

from errors import require
from model import (
    ChannelParams,
    SecrecyTarget,
    SelectionConfig,
    _eve_sc_cdf,
    _eve_sc_cdf_asymptotic,
    _eve_sc_pdf,
    _kth_best_cdf,
    _kth_best_cdf_asymptotic,
    _kth_best_sf,
    _kth_best_sf_asymptotic,
)
from quadrature import QuadResult, integrate_half_line
from specfun import _kth_largest, kth_largest, njit

LN2 = math.log(2.0)
BLOCK_SIZE = 4096
Z_95 = 1.96
SOP_REL_TOL = 1e-9
ESC_REL_TOL = 1e-8


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    std_error: float
    n_samples: int

    @property
    def half_width_95(self) -> float:
        return Z_95 * self.std_error

    def contains(self, value: float, n_se: float = 3.29) -> bool:
        return abs(self.mean - value) <= n_se * self.std_error


@dataclass(frozen=True)
class SimConfig:
    n_samples: int
    seed: int = 42
    batch_size: int = 16 * BLOCK_SIZE

    def __post_init__(self):
        require(self.n_samples >= 1, f"n_samples must be >= 1, got {self.n_samples}")
        require(0 <= self.seed < 2**64, f"seed must be a 64-bit unsigned integer, got {self.seed}")
        require(self.batch_size >= 1, f"batch_size must be >= 1, got {self.batch_size}")

    @property
    def n_blocks(self) -> int:
        return -(-self.n_samples // BLOCK_SIZE)

    @property
    def blocks_per_batch(self) -> int:
        return -(-self.batch_size // BLOCK_SIZE)


@dataclass(frozen=True)
class McEstimate:
    sop: EstimateWithCI
    spsc: EstimateWithCI
    esc: EstimateWithCI


# ---------------------------------------------------------------------------- #
#                                  quadrature                                   #
# ---------------------------------------------------------------------------- #


def _default_scale(params: ChannelParams) -> float:
    return max(params.c_m, params.c_e)


def _scaled(result: QuadResult, factor: float) -> QuadResult:
    return QuadResult(
        result.value * factor, result.abs_error_estimate * factor, result.subdivisions, result.error_bound * factor
    )


def sop_quadrature(
    params: ChannelParams,
    sel: SelectionConfig,
    target: SecrecyTarget,
    rel_tol: float = SOP_REL_TOL,
    scale: Optional[float] = None,
) -> QuadResult:
    """Pr{Z_(N-k+1) <= tau - 1 + tau X_(L)} integrated against the eavesdropper density"""
    c_m, c_e = params.c_m, params.c_e
    n, k, l = sel.n_users, sel.rank, sel.eve_antennas
    tau = target.threshold

    def integrand(z):
        return _eve_sc_pdf(z, l, c_e) * _kth_best_cdf(tau - 1.0 + tau * z, n, k, c_m)

    return integrate_half_line(integrand, rel_tol, scale or _default_scale(params))


def spsc_quadrature(params: ChannelParams, sel: SelectionConfig, rel_tol: float = SOP_REL_TOL) -> QuadResult:
    result = sop_quadrature(params, sel, SecrecyTarget(0.0), rel_tol)
    return QuadResult(1.0 - result.value, result.abs_error_estimate, result.subdivisions, result.error_bound)


def sop_asymptotic_quadrature(
    params: ChannelParams,
    sel: SelectionConfig,
    target: SecrecyTarget,
    rel_tol: float = SOP_REL_TOL,
    scale: Optional[float] = None,
) -> QuadResult:
    """the large-N outage integral with the inverse-gamma legitimate CDF, no tricomi_u involved"""
    require(sel.n_users >= 2, f"asymptotic in N requires n_users >= 2, got {sel.n_users}")
    c_e = params.c_e
    k, l = sel.rank, sel.eve_antennas
    tau = target.threshold
    b_n = params.scale_n(sel.n_users)

    def integrand(z):
        return _eve_sc_pdf(z, l, c_e) * _kth_best_cdf_asymptotic(tau * z, k, b_n)

    return integrate_half_line(integrand, rel_tol, scale or _default_scale(params))


def sop_asymptotic_nl_quadrature(
    params: ChannelParams, sel: SelectionConfig, target: SecrecyTarget, rel_tol: float = SOP_REL_TOL
) -> QuadResult:
    require(sel.n_users >= 2, f"asymptotic in N and L requires n_users >= 2, got {sel.n_users}")
    require(sel.eve_antennas >= 2, f"asymptotic in N and L requires eve_antennas >= 2, got {sel.eve_antennas}")
    k = sel.rank
    tau = target.threshold
    b_n = params.scale_n(sel.n_users)
    b_l = params.scale_l(sel.eve_antennas)

    def integrand(z):
        if z <= 0.0:
            return 0.0
        # Frechet density b_L / z^2 e^(-b_L / z)
        density = _eve_sc_cdf_asymptotic(z, b_l) * b_l / (z * z)
        return density * _kth_best_cdf_asymptotic(tau * z, k, b_n)

    return integrate_half_line(integrand, rel_tol, b_l)


def esc_quadrature(
    params: ChannelParams,
    sel: SelectionConfig,
    rel_tol: float = ESC_REL_TOL,
    scale: Optional[float] = None,
) -> QuadResult:
    """ergodic secrecy capacity in bits/s/Hz for any number of eavesdropper antennas"""
    c_m, c_e = params.c_m, params.c_e
    n, k, l = sel.n_users, sel.rank, sel.eve_antennas

    def integrand(z):
        return _eve_sc_cdf(z, l, c_e) / (1.0 + z) * _kth_best_sf(z, n, k, c_m)

    return _scaled(integrate_half_line(integrand, rel_tol, scale or _default_scale(params)), 1.0 / LN2)


def esc_asymptotic_quadrature(
    params: ChannelParams,
    n_users: int,
    rank: int,
    rel_tol: float = ESC_REL_TOL,
    scale: Optional[float] = None,
) -> QuadResult:
    require(n_users >= 2, f"asymptotic ESC requires n_users >= 2, got {n_users}")
    require(1 <= rank <= n_users, f"rank exceeds n_users ({rank} > {n_users})")
    c_e = params.c_e
    b_n = params.scale_n(n_users)

    def integrand(z):
        return _eve_sc_cdf(z, 1, c_e) / (1.0 + z) * _kth_best_sf_asymptotic(z, rank, b_n)

    return _scaled(integrate_half_line(integrand, rel_tol, scale or _default_scale(params)), 1.0 / LN2)


# ---------------------------------------------------------------------------- #
#                                  monte carlo                                  #
# ---------------------------------------------------------------------------- #


@njit
def _exponential(u, rate):
    return -math.log1p(-u) / rate


@njit
def _selection_sirs(u, n_users, rank, eve_antennas, rho, lambda_m, beta_m, lambda_e, beta_e):
    """
    u: uniforms of shape (m, 2 N + 2 L), one row per sample
    returns the rank-th largest legitimate SIR and the selection-combined eavesdropper SIR
    """
    m = u.shape[0]
    zk = np.empty(m)
    x = np.empty(m)
    z = np.empty(n_users)
    taken = np.empty(n_users, dtype=np.bool_)
    for s in range(m):
        for i in range(n_users):
            h = _exponential(u[s, 2 * i], lambda_m)
            g = _exponential(u[s, 2 * i + 1], beta_m)
            z[i] = rho * h / g if g > 0.0 else np.inf
        selected, _ = _kth_largest(z, rank, taken)
        zk[s] = selected
        best = 0.0
        for i in range(eve_antennas):
            t = _exponential(u[s, 2 * n_users + 2 * i], lambda_e)
            e = _exponential(u[s, 2 * n_users + 2 * i + 1], beta_e)
            xi = rho * t / e if e > 0.0 else np.inf
            if xi > best:
                best = xi
        x[s] = best
    return zk, x


def _block_rng(seed: int, point_index: int, block_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, point_index, block_index])))


def _draw_block(params: ChannelParams, sel: SelectionConfig, seed: int, point_index: int, block_index: int, m: int):
    rng = _block_rng(seed, point_index, block_index)
    u = rng.random((m, 2 * sel.n_users + 2 * sel.eve_antennas))
    return _selection_sirs(
        u,
        sel.n_users,
        sel.rank,
        sel.eve_antennas,
        float(params.power_ratio),
        float(params.lambda_m),
        float(params.beta_m),
        float(params.lambda_e),
        float(params.beta_e),
    )


def secrecy_capacity(zk: np.ndarray, x: np.ndarray) -> np.ndarray:
    """log2((1 + Z) / (1 + X)) where Z > X, else 0"""
    with np.errstate(invalid="ignore"):
        return np.where(zk > x, (np.log1p(zk) - np.log1p(x)) / LN2, 0.0)


def _block_count(n_samples: int, block_index: int) -> int:
    return min(BLOCK_SIZE, n_samples - block_index * BLOCK_SIZE)


def _simulate_blocks(args) -> list:
    params, sel, rates, seed, point_index, first_block, last_block, n_samples = args
    stats = []
    for block_index in range(first_block, last_block):
        m = _block_count(n_samples, block_index)
        zk, x = _draw_block(params, sel, seed, point_index, block_index, m)
        cs = secrecy_capacity(zk, x)
        mean = cs.mean()
        stats.append(
            (
                m,
                tuple(int(np.count_nonzero(cs <= rate)) for rate in rates),
                int(np.count_nonzero(cs > 0.0)),
                float(mean),
                float(((cs - mean) ** 2).sum()),
            )
        )
    return stats


def _merge(stats: list, n_rates: int) -> (int, list, int, float, float):
    # pairwise mean/M2 update, applied in block order
    n, n_out, n_pos, mean, m2 = 0, [0] * n_rates, 0, 0.0, 0.0
    for nb, out_b, pos_b, mean_b, m2_b in stats:
        total = n + nb
        delta = mean_b - mean
        mean += delta * nb / total
        m2 += m2_b + delta * delta * n * nb / total
        n, n_pos = total, n_pos + pos_b
        n_out = [a + b for a, b in zip(n_out, out_b)]
    return n, n_out, n_pos, mean, m2


def _proportion(count: int, n: int) -> EstimateWithCI:
    p = count / n
    std_error = math.sqrt(p * (1.0 - p) / (n - 1)) if n > 1 else 0.0
    return EstimateWithCI(p, std_error, n)


def mc_estimate_rates(
    params: ChannelParams,
    sel: SelectionConfig,
    rates: [float],
    sim: SimConfig,
    point_index: int = 0,
    n_cpus: int = 1,
    progress: bool = False,
) -> [McEstimate]:
    """
    one simulation shared by several target rates; element i of the result equals
    mc_estimate at rates[i] bit for bit
    """
    rates = tuple(SecrecyTarget(float(r)).rate for r in rates)
    require(len(rates) > 0, "at least one target rate is required")
    n_blocks = sim.n_blocks
    step = sim.blocks_per_batch
    tasks = [
        (params, sel, rates, sim.seed, point_index, first, min(first + step, n_blocks), sim.n_samples)
        for first in range(0, n_blocks, step)
    ]
    logging.debug(
        f"monte carlo n={sel.n_users} k={sel.rank} l={sel.eve_antennas} rates={rates} "
        f"samples={sim.n_samples} tasks={len(tasks)} n_cpus={n_cpus}"
    )
    bar = tqdm(total=len(tasks), disable=not progress, desc="monte carlo", leave=False)
    results = []
    if n_cpus > 1 and len(tasks) > 1:
        with Pool(processes=n_cpus) as pool:
            for res in pool.imap(_simulate_blocks, tasks):
                results.append(res)
                bar.update()
    else:
        for task in tasks:
            results.append(_simulate_blocks(task))
            bar.update()
    bar.close()
    n, n_out, n_pos, mean, m2 = _merge([s for res in results for s in res], len(rates))
    esc = EstimateWithCI(mean, math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0, n)
    spsc = _proportion(n_pos, n)
    return [McEstimate(sop=_proportion(count, n), spsc=spsc, esc=esc) for count in n_out]


def mc_estimate(
    params: ChannelParams,
    sel: SelectionConfig,
    target: SecrecyTarget,
    sim: SimConfig,
    point_index: int = 0,
    n_cpus: int = 1,
    progress: bool = False,
) -> McEstimate:
    """
    simulates the physical model sample by sample; block b of point i always uses the stream
    keyed by (seed, i, b), so the estimate does not depend on batch_size or n_cpus
    """
    return mc_estimate_rates(params, sel, [target.rate], sim, point_index, n_cpus, progress)[0]



def draw_selection_sirs(
    params: ChannelParams, sel: SelectionConfig, n_samples: int, seed: int = 42, point_index: int = 0
) -> (np.ndarray, np.ndarray):
    """raw (Z_(N-k+1), X_(L)) pairs from the same streams mc_estimate uses"""
    sim = SimConfig(n_samples=n_samples, seed=seed)
    blocks = [
        _draw_block(params, sel, seed, point_index, b, _block_count(n_samples, b)) for b in range(sim.n_blocks)
    ]
    return np.concatenate([b[0] for b in blocks]), np.concatenate([b[1] for b in blocks])


__all__ = [
    "EstimateWithCI",
    "SimConfig",
    "McEstimate",
    "QuadResult",
    "integrate_half_line",
    "kth_largest",
    "sop_quadrature",
    "spsc_quadrature",
    "sop_asymptotic_quadrature",
    "sop_asymptotic_nl_quadrature",
    "esc_quadrature",
    "esc_asymptotic_quadrature",
    "mc_estimate",
    "mc_estimate_rates",
    "draw_selection_sirs",
    "secrecy_capacity",
]
