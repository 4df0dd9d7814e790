from __future__ import annotations

import logging
from dataclasses import dataclass
from multiprocessing import Pool

import pandas as pd
from tqdm import tqdm

import analytic
import oracle
from errors import DomainError, NumericError, require
from pure_funcs import (
    CSV_COLUMNS,
    METHODS,
    METRICS,
    SWEEP_VARIABLES,
    make_row,
    params_from_config,
    selection_from_config,
    sim_from_config,
    target_from_config,
)

SUPPORTED = {
    "sop": ("exact", "asymptotic_n", "asymptotic_nl", "quadrature", "monte_carlo", "limit"),
    "spsc": ("exact", "asymptotic_n", "asymptotic_nl", "quadrature", "monte_carlo"),
    "esc": ("asymptotic_n", "quadrature", "monte_carlo", "scaling"),
}


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    methods: tuple
    metric: str
    lockstep: bool = False

    def __post_init__(self):
        require(self.variable in SWEEP_VARIABLES, f"unknown sweep variable {self.variable}")
        require(len(self.values) > 0, "sweep values must be nonempty")
        require(
            all(b > a for a, b in zip(self.values, self.values[1:])),
            "sweep values must be strictly increasing",
        )
        if self.variable != "rate":
            require(
                all(float(v) == int(v) for v in self.values),
                f"{self.variable} values must be integers",
            )
        require(len(self.methods) > 0, "at least one method is required")
        require(
            len(set(self.methods)) == len(self.methods),
            "methods must not repeat",
        )
        for method in self.methods:
            check_supported(self.metric, method)
        if self.lockstep:
            require(
                self.variable in ("n_users", "eve_antennas"),
                "lockstep ties eve_antennas to n_users; sweep one of them",
            )

    @classmethod
    def from_config(cls, config: dict) -> SweepSpec:
        sweep = config["sweep"]
        return cls(
            variable=sweep["variable"],
            values=tuple(sweep["values"]),
            methods=tuple(sweep["methods"]),
            metric=config["metric"],
            lockstep=bool(sweep.get("lockstep", False)),
        )

    def point_configs(self, config: dict) -> [dict]:
        points = []
        for value in self.values:
            point = {**config, self.variable: value}
            if self.lockstep:
                point["n_users"] = point["eve_antennas"] = value
            points.append(point)
        return points


def check_supported(metric: str, method: str):
    require(metric in METRICS, f"unknown metric {metric}, expected one of {', '.join(METRICS)}")
    require(method in METHODS, f"unknown method {method}, expected one of {', '.join(METHODS)}")
    if metric == "esc" and method == "exact":
        raise DomainError("exact ESC unsupported; use quadrature")
    require(method in SUPPORTED[metric], f"method {method} does not serve metric {metric}")


def check_point(config: dict):
    """validates one parameter point for its (metric, method) pair"""
    check_supported(config["metric"], config["method"])
    params = params_from_config(config)
    sel = selection_from_config(config)
    target = target_from_config(config)
    method, metric = config["method"], config["metric"]
    if method in ("asymptotic_n", "asymptotic_nl", "scaling"):
        require(sel.n_users >= 2, f"{method} requires n_users >= 2")
    if method == "asymptotic_nl":
        require(sel.eve_antennas >= 2, "asymptotic_nl requires eve_antennas >= 2")
    if metric == "esc" and method in ("asymptotic_n", "scaling"):
        require(sel.eve_antennas == 1, f"{method} ESC holds for a single eavesdropper antenna (l = 1)")
    if method == "monte_carlo":
        sim_from_config(config)
    return params, sel, target


def evaluate(config: dict, point_index: int = 0, n_cpus: int = 1, progress: bool = False) -> (float, float):
    """
    returns (estimate, std_error); std_error is None for analytic and quadrature methods
    """
    params, sel, target = check_point(config)
    metric, method = config["metric"], config["method"]
    if method == "monte_carlo":
        est = oracle.mc_estimate(
            params, sel, target, sim_from_config(config), point_index, n_cpus, progress
        )
        est = getattr(est, metric)
        return est.mean, est.std_error
    if metric == "sop":
        value = {
            "exact": lambda: analytic.sop_exact(params, sel, target),
            "asymptotic_n": lambda: analytic.sop_asymptotic_n(params, sel, target),
            "asymptotic_nl": lambda: analytic.sop_asymptotic_nl(params, sel, target),
            "quadrature": lambda: oracle.sop_quadrature(params, sel, target).value,
            "limit": lambda: analytic.sop_equal_nl_limit(params, sel.rank, target),
        }[method]()
    elif metric == "spsc":
        value = {
            "exact": lambda: analytic.spsc_exact(params, sel),
            "asymptotic_n": lambda: analytic.spsc_asymptotic_n(params, sel),
            "asymptotic_nl": lambda: analytic.spsc_asymptotic_nl(params, sel),
            "quadrature": lambda: oracle.spsc_quadrature(params, sel).value,
        }[method]()
    else:
        value = {
            "asymptotic_n": lambda: analytic.esc_asymptotic(params, sel.n_users, sel.rank),
            "quadrature": lambda: oracle.esc_quadrature(params, sel).value,
            "scaling": lambda: analytic.esc_scaling_approx(params, sel.n_users, sel.rank),
        }[method]()
    return value, None


def _evaluate_point(args) -> [dict]:
    point_index, point, spec = args
    rows = []
    for method in spec.methods:
        config = {**point, "method": method}
        try:
            estimate, std_error = evaluate(config, point_index=point_index)
            rows.append(make_row(config, spec.variable, point[spec.variable], estimate, std_error))
        except NumericError as e:
            logging.error(f"{spec.variable}={point[spec.variable]} {method}: {e}")
            rows.append(make_row(config, spec.variable, point[spec.variable], error=str(e)))
    return rows


def validate_sweep(config: dict, spec: SweepSpec):
    """every point must be valid for every method before anything runs"""
    for point in spec.point_configs(config):
        for method in spec.methods:
            check_point({**point, "method": method})


def run_sweep(config: dict, spec: SweepSpec, n_cpus: int = 1, progress: bool = True) -> pd.DataFrame:
    """
    rows in sweep order, then method order, whatever the completion order of the workers;
    point i keys its monte carlo streams with i
    """
    validate_sweep(config, spec)
    tasks = [(i, point, spec) for i, point in enumerate(spec.point_configs(config))]
    logging.info(
        f"sweep {spec.metric} over {spec.variable} ({len(spec.values)} points) "
        f"methods {', '.join(spec.methods)}{' lockstep' if spec.lockstep else ''}"
    )
    bar = tqdm(total=len(tasks), disable=not progress, desc=f"{spec.metric} vs {spec.variable}")
    rows = []
    if n_cpus > 1 and len(tasks) > 1:
        with Pool(processes=n_cpus) as pool:
            for res in pool.imap(_evaluate_point, tasks):
                rows.extend(res)
                bar.update()
    else:
        for task in tasks:
            rows.extend(_evaluate_point(task))
            bar.update()
    bar.close()
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def n_failed(df: pd.DataFrame) -> int:
    return int((df["error"] != "").sum())
