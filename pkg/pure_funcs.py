import pprint
from collections import OrderedDict

import numpy as np

from errors import require
from model import ChannelParams, SecrecyTarget, SelectionConfig
from oracle import SimConfig

METRICS = ("sop", "spsc", "esc")
METHODS = ("exact", "asymptotic_n", "asymptotic_nl", "quadrature", "monte_carlo", "scaling", "limit")
SWEEP_VARIABLES = ("n_users", "eve_antennas", "rate", "rank")
INT_KEYS = ("n_users", "rank", "eve_antennas", "n_samples", "seed", "batch_size", "n_cpus")
CHANNEL_KEYS = ("power_ratio", "beta_m", "lambda_m", "beta_e", "lambda_e")

CSV_COLUMNS = [
    "sweep_var",
    "sweep_value",
    "metric",
    "method",
    "n",
    "k",
    "l",
    "rs",
    "power_ratio",
    "beta_m",
    "lambda_m",
    "beta_e",
    "lambda_e",
    "estimate",
    "std_error",
    "n_samples",
    "seed",
    "error",
]


def get_template_config() -> dict:
    return {
        "metric": "sop",
        "method": "exact",
        "n_users": 10,
        "rank": 2,
        "eve_antennas": 2,
        "rate": 1.0,
        "power_ratio": 2.0,
        "beta_m": 2.0,
        "lambda_m": 0.5,
        "beta_e": 5.0,
        "lambda_e": 4.0,
        "n_samples": 1_000_000,
        "seed": 42,
        "batch_size": 65536,
        "n_cpus": 1,
        "sweep": {
            "variable": "n_users",
            "values": [2, 5, 10, 20, 50, 100],
            "lockstep": False,
            "methods": ["exact", "asymptotic_n", "monte_carlo"],
        },
    }


def denumpyize(x):
    if type(x) in [np.float64, np.float32, np.float16]:
        return float(x)
    elif type(x) in [np.int64, np.int32, np.int16, np.int8, np.uint64]:
        return int(x)
    elif type(x) == np.ndarray:
        return [denumpyize(e) for e in x]
    elif type(x) == np.bool_:
        return bool(x)
    elif type(x) in [dict, OrderedDict]:
        return {k: denumpyize(v) for k, v in x.items()}
    elif type(x) in [list, tuple]:
        return [denumpyize(z) for z in x]
    else:
        return x


def sort_dict_keys(d):
    if type(d) == list:
        return [sort_dict_keys(e) for e in d]
    if type(d) != dict:
        return d
    return {key: sort_dict_keys(d[key]) for key in sorted(d)}


def config_pretty_str(config: dict):
    pretty_str = pprint.pformat(config)
    for r in [("'", '"'), ("True", "true"), ("False", "false")]:
        pretty_str = pretty_str.replace(*r)
    return pretty_str


def intify(config: dict) -> dict:
    """integer-valued keys arrive as floats from hjson/argparse round trips"""
    out = dict(config)
    for key in INT_KEYS:
        if key in out and out[key] is not None:
            value = out[key]
            require(float(value) == int(value), f"{key} must be an integer, got {value}")
            out[key] = int(value)
    return out


def parse_values(values) -> list:
    """
    "2,5,10" -> [2, 5, 10]; "2:10:2" -> [2, 4, 6, 8, 10] (inclusive); lists pass through
    """
    if isinstance(values, str):
        values = values.strip()
        if ":" in values:
            parts = [float(p) for p in values.split(":")]
            require(len(parts) == 3, f"range must be from:to:step, got {values}")
            start, stop, step = parts
            require(step > 0.0, f"range step must be positive, got {values}")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            require(n >= 1, f"empty range {values}")
            values = [start + i * step for i in range(n)]
        else:
            values = [float(v) for v in values.split(",") if v.strip()]
    values = [int(v) if float(v) == int(v) else float(v) for v in values]
    return values


def params_from_config(config: dict) -> ChannelParams:
    return ChannelParams(*[float(config[key]) for key in CHANNEL_KEYS])


def selection_from_config(config: dict) -> SelectionConfig:
    return SelectionConfig(int(config["n_users"]), int(config["rank"]), int(config["eve_antennas"]))


def target_from_config(config: dict) -> SecrecyTarget:
    return SecrecyTarget(float(config["rate"]))


def sim_from_config(config: dict) -> SimConfig:
    return SimConfig(int(config["n_samples"]), int(config["seed"]), int(config["batch_size"]))


def make_row(config: dict, sweep_var, sweep_value, estimate=None, std_error=None, error="") -> dict:
    """one CSV row; monte carlo columns stay empty for analytic and quadrature methods"""
    mc = config["method"] == "monte_carlo"
    return {
        "sweep_var": sweep_var,
        "sweep_value": sweep_value,
        "metric": config["metric"],
        "method": config["method"],
        "n": int(config["n_users"]),
        "k": int(config["rank"]),
        "l": int(config["eve_antennas"]),
        "rs": float(config["rate"]),
        **{key: float(config[key]) for key in CHANNEL_KEYS},
        "estimate": estimate,
        "std_error": std_error if mc else None,
        "n_samples": int(config["n_samples"]) if mc else None,
        "seed": int(config["seed"]) if mc else None,
        "error": error,
    }
