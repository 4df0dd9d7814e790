from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from itertools import product
from time import time

from colorama import Fore, init
from prettytable import PrettyTable
from tqdm import tqdm

import analytic
import oracle
from model import ChannelParams, SecrecyTarget, SelectionConfig
from presets import ESC_CHANNEL, OUTAGE_CHANNEL
from procedures import csv_string
from specfun import (
    digamma_int,
    exp_integral_e1,
    gauss_2f1,
    tricomi_u,
    upper_gamma_reg,
)
from sweeps import SweepSpec, run_sweep

N_SE = 3.29
FAULT_FACTOR = 1.01


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class Grid:
    n_users: tuple
    eve_antennas: tuple
    rates: tuple
    channels: tuple
    mc_samples: int
    point_samples: int
    limit_samples: int


def full_grid() -> Grid:
    return Grid(
        n_users=(2, 5, 10, 20, 50),
        eve_antennas=(1, 2, 4),
        rates=(0.0, 0.5, 1.0, 4.0),
        channels=(ChannelParams(**OUTAGE_CHANNEL), ChannelParams(**ESC_CHANNEL)),
        mc_samples=1_000_000,
        point_samples=10_000_000,
        limit_samples=1_000_000,
    )


def quick_grid() -> Grid:
    return Grid(
        n_users=(2, 10),
        eve_antennas=(1, 2),
        rates=(0.0, 1.0),
        channels=(ChannelParams(**OUTAGE_CHANNEL),),
        mc_samples=100_000,
        point_samples=1_000_000,
        limit_samples=100_000,
    )


def ranks_for(n_users: int) -> [int]:
    return sorted({1, 2, min(3, n_users)})


def relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference)


class Acceptance:
    """
    cross checks closed forms against quadrature and simulation; with inject_fault the closed
    forms see c_m perturbed by 1% while the oracles see the true channel
    """

    def __init__(self, quick: bool = False, inject_fault: bool = False, seed: int = 42, n_cpus: int = 1, progress: bool = True):
        self.grid = quick_grid() if quick else full_grid()
        self.quick = quick
        self.inject_fault = inject_fault
        self.seed = seed
        self.n_cpus = n_cpus
        self.progress = progress
        self.results = []
        self.point_index = 0

    def closed(self, params: ChannelParams) -> ChannelParams:
        if self.inject_fault:
            return replace(params, beta_m=params.beta_m * FAULT_FACTOR)
        return params

    def sim(self, n_samples: int) -> oracle.SimConfig:
        return oracle.SimConfig(n_samples=n_samples, seed=self.seed)

    def next_point(self) -> int:
        self.point_index += 1
        return self.point_index

    def add(self, name: str, measured: float, tolerance: str, passed: bool, detail: str = ""):
        self.results.append(CheckResult(name, float(measured), tolerance, bool(passed), detail))
        logging.debug(f"{name}: measured={measured} tolerance={tolerance} passed={passed} {detail}")

    def check_outage_grid(self):
        grid = self.grid
        worst_rel, worst_at = 0.0, ""
        worst_complement = 0.0
        hits, total = 0, 0
        points = [
            (params, n, k, l)
            for params in grid.channels
            for n in grid.n_users
            for k in ranks_for(n)
            for l in grid.eve_antennas
        ]
        for params, n, k, l in tqdm(points, disable=not self.progress, desc="outage grid"):
            sel = SelectionConfig(n, k, l)
            mc = oracle.mc_estimate_rates(
                params, sel, grid.rates, self.sim(grid.mc_samples), self.next_point(), self.n_cpus
            )
            for rate, est in zip(grid.rates, mc):
                target = SecrecyTarget(rate)
                exact = analytic.sop_exact(self.closed(params), sel, target)
                quad = oracle.sop_quadrature(params, sel, target).value
                rel = relative_error(exact, quad)
                if rel > worst_rel:
                    worst_rel, worst_at = rel, f"c_m={params.c_m:g} n={n} k={k} l={l} rs={rate:g}"
                hits += est.sop.contains(exact, N_SE)
                total += 1
            spsc = analytic.spsc_exact(self.closed(params), sel)
            sop0 = analytic.sop_exact(self.closed(params), sel, SecrecyTarget(0.0))
            worst_complement = max(worst_complement, abs(sop0 + spsc - 1.0))
        self.add("sop exact vs quadrature", worst_rel, "<= 1e-6 rel", worst_rel <= 1e-6, worst_at)
        self.add(
            "sop monte carlo brackets exact",
            hits / total,
            f">= 0.95 within {N_SE} SE",
            hits / total >= 0.95,
            f"{hits}/{total} points",
        )
        self.add("sop(0) + spsc = 1", worst_complement, "<= 1e-12", worst_complement <= 1e-12)

    def check_asymptotic_convergence(self):
        params = ChannelParams(**OUTAGE_CHANNEL)
        closed = self.closed(params)
        trend_ok = True
        detail = []
        headline = math.nan
        for k, rate in product([1, 2], [1.0, 4.0]):
            target = SecrecyTarget(rate)
            errors = {}
            for n in [20, 200]:
                sel = SelectionConfig(n, k, 2)
                errors[n] = relative_error(
                    analytic.sop_asymptotic_n(closed, sel, target), analytic.sop_exact(closed, sel, target)
                )
            trend_ok &= errors[200] < errors[20]
            detail.append(f"k={k} rs={rate:g}: {errors[20]:.3g} -> {errors[200]:.3g}")
            if k == 1 and rate == 1.0:
                headline = errors[200]
        self.add("asymptotic sop error shrinks with n", float(trend_ok), "n=200 < n=20", trend_ok, "; ".join(detail))
        self.add("asymptotic sop error at n=200", headline, "<= 0.10 rel", headline <= 0.10, "k=1 rs=1")

    def check_equal_nl_limit(self):
        params = ChannelParams(**OUTAGE_CHANNEL)
        target = SecrecyTarget(0.5)
        n = 256
        for k in [1, 2]:
            est = oracle.mc_estimate(
                params,
                SelectionConfig(n, k, n),
                target,
                self.sim(self.grid.limit_samples),
                self.next_point(),
                self.n_cpus,
            ).sop
            limit = analytic.sop_equal_nl_limit(self.closed(params), k, target)
            tol = max(N_SE * est.std_error, 0.02)
            self.add(
                f"n=l={n} limit, k={k}",
                abs(est.mean - limit),
                f"<= {tol:.3g}",
                abs(est.mean - limit) <= tol,
                f"mc={est.mean:.5f} limit={limit:.5f}",
            )

    def check_esc_scaling(self):
        params = ChannelParams(**ESC_CHANNEL)
        esc = {
            (n, k): oracle.esc_quadrature(params, SelectionConfig(n, k, 1)).value
            for n, k in [(64, 1), (128, 1), (512, 1), (512, 2), (512, 3)]
        }
        slope = esc[(128, 1)] - esc[(64, 1)]
        self.add("esc doubling n adds one bit", slope, "1 +- 0.1", abs(slope - 1.0) <= 0.1)
        for k, tol in [(2, 0.05), (3, 0.08)]:
            gap = esc[(512, 1)] - esc[(512, k)]
            limit = analytic.esc_gap_limit(k)
            self.add(
                f"esc rank gap k=1 vs k={k}",
                gap,
                f"{limit:.7f} +- {tol}",
                abs(gap - limit) <= tol,
            )

    def check_esc_closed_form(self):
        channels = {
            "c_e=4": ChannelParams(**ESC_CHANNEL),
            "c_e=1": ChannelParams(**{**ESC_CHANNEL, "beta_e": 1.0, "lambda_e": 4.0}),
        }
        worst, worst_at = 0.0, ""
        for label, params in channels.items():
            for n, k in [(50, 1), (100, 2), (500, 3)]:
                rel = relative_error(
                    analytic.esc_asymptotic(self.closed(params), n, k),
                    oracle.esc_asymptotic_quadrature(params, n, k).value,
                )
                if rel > worst:
                    worst, worst_at = rel, f"{label} n={n} k={k}"
        self.add("esc closed form vs quadrature", worst, "<= 1e-6 rel", worst <= 1e-6, worst_at)
        unit = analytic.esc_asymptotic(channels["c_e=1"], 50, 1)
        jump = max(
            abs(analytic.esc_asymptotic(replace(channels["c_e=1"], beta_e=1.0 + d), 50, 1) - unit)
            for d in [-1e-4, 1e-4]
        )
        self.add("esc continuity across c_e=1", jump, "< 1e-3", jump < 1e-3)

    def check_special_functions(self):
        identities = [
            (gauss_2f1(1.5, 2.5, 3.5, 0.0), 1.0),
            (gauss_2f1(1.0, 1.0, 2.0, 0.5), 2.0 * math.log(2.0)),
            (gauss_2f1(0.5, 1.0, 1.5, -1.0), math.pi / 4.0),
            (tricomi_u(2.0, 3.0, 0.5), 4.0),
            (tricomi_u(1.0, 1.0, 1.0), math.e * exp_integral_e1(1.0)),
        ]
        identities += [(tricomi_u(a, a + 1.0, z), z ** -a) for a in range(1, 7) for z in [0.1, 1.0, 10.0, 100.0]]
        identities += [(upper_gamma_reg(1, x), math.exp(-x)) for x in [0.1, 1.0, 5.0]]
        worst = max(relative_error(value, ref) for value, ref in identities)
        self.add("special function identities", worst, "<= 1e-9 rel", worst <= 1e-9, f"{len(identities)} identities")
        recurrence = max(abs(digamma_int(k + 1) - digamma_int(k) - 1.0 / k) for k in range(1, 51))
        self.add("digamma recurrence", recurrence, "<= 1e-14", recurrence <= 1e-14)

    def check_point_oracles(self):
        n_samples = self.grid.point_samples
        params = ChannelParams(**OUTAGE_CHANNEL)
        sel = SelectionConfig(10, 2, 2)
        target = SecrecyTarget(1.0)
        est = oracle.mc_estimate(params, sel, target, self.sim(n_samples), self.next_point(), self.n_cpus)
        exact = analytic.sop_exact(self.closed(params), sel, target)
        self.add(
            "sop n=10 k=2 l=2 vs monte carlo",
            abs(est.sop.mean - exact) / est.sop.std_error,
            f"<= {N_SE} SE",
            est.sop.contains(exact, N_SE),
            f"{n_samples} samples",
        )
        esc = oracle.esc_quadrature(params, sel).value
        self.add(
            "esc n=10 k=2 l=2 vs monte carlo",
            abs(est.esc.mean - esc) / est.esc.std_error,
            f"<= {N_SE} SE",
            est.esc.contains(esc, N_SE),
        )
        sel = SelectionConfig(20, 1, 2)
        est = oracle.mc_estimate(params, sel, target, self.sim(n_samples), self.next_point(), self.n_cpus)
        spsc = analytic.spsc_exact(self.closed(params), sel)
        self.add(
            "spsc n=20 k=1 l=2 vs monte carlo",
            abs(est.spsc.mean - spsc) / est.spsc.std_error,
            f"<= {N_SE} SE",
            est.spsc.contains(spsc, N_SE),
        )

    def check_determinism(self):
        config = {
            "metric": "sop",
            "method": "exact",
            **OUTAGE_CHANNEL,
            "n_users": 5,
            "rank": 1,
            "eve_antennas": 2,
            "rate": 1.0,
            "n_samples": 20_000,
            "seed": self.seed,
            "batch_size": 4096,
            "n_cpus": 1,
        }
        spec = SweepSpec("n_users", (2, 5, 10), ("exact", "monte_carlo"), "sop")
        first = csv_string(run_sweep(config, spec, n_cpus=1, progress=False))
        second = csv_string(run_sweep(config, spec, n_cpus=1, progress=False))
        parallel = csv_string(run_sweep({**config, "batch_size": 8192}, spec, n_cpus=2, progress=False))
        self.add("sweep csv deterministic", float(first == second), "identical", first == second)
        self.add("sweep csv independent of workers", float(first == parallel), "identical", first == parallel)

    def run(self) -> [CheckResult]:
        start = time()
        for check in [
            self.check_special_functions,
            self.check_outage_grid,
            self.check_asymptotic_convergence,
            self.check_equal_nl_limit,
            self.check_esc_scaling,
            self.check_esc_closed_form,
            self.check_point_oracles,
            self.check_determinism,
        ]:
            t = time()
            check()
            logging.info(f"{check.__name__[6:]} done in {time() - t:.1f}s")
        logging.info(f"acceptance finished in {time() - start:.1f}s")
        return self.results


def report(results: [CheckResult]) -> str:
    init(autoreset=True)
    table = PrettyTable(["Check", "Measured", "Tolerance", "Status", "Detail"])
    table.align["Check"] = "l"
    table.align["Detail"] = "l"
    table.title = "Acceptance"
    for r in results:
        status = f"{Fore.GREEN}PASS{Fore.RESET}" if r.passed else f"{Fore.RED}FAIL{Fore.RESET}"
        table.add_row([r.name, f"{r.measured:.6g}", r.tolerance, status, r.detail])
    n_failed = sum(not r.passed for r in results)
    summary = f"{len(results) - n_failed}/{len(results)} checks passed"
    return f"{table}\n{(Fore.GREEN if n_failed == 0 else Fore.RED)}{summary}{Fore.RESET}"
