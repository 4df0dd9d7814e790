import logging
import os
import sys

import hjson
import pandas as pd

from errors import DomainError
from pure_funcs import (
    CSV_COLUMNS,
    METHODS,
    METRICS,
    SWEEP_VARIABLES,
    denumpyize,
    get_template_config,
    intify,
    parse_values,
    sort_dict_keys,
)

DEFAULT_CONFIG_PATH = "configs/default.hjson"

# dest -> (flags, type, help)
POINT_ARGS = {
    "metric": (["--metric"], str, f"one of {', '.join(METRICS)}"),
    "method": (["--method"], str, f"one of {', '.join(METHODS)}"),
    "n_users": (["-n", "--n", "--n_users", "--n-users"], int, "number of users N"),
    "rank": (["-k", "--k", "--rank"], int, "selection rank k, 1 = best user"),
    "eve_antennas": (["-l", "--l", "--eve_antennas", "--eve-antennas"], int, "eavesdropper antennas L"),
    "rate": (["--rs", "--rate"], float, "target secrecy rate R_s in bits/s/Hz"),
    "power_ratio": (["--power_ratio", "--power-ratio"], float, "transmit to interference power ratio"),
    "beta_m": (["--beta_m", "--beta-m"], float, "rate of the interferer -> user gain"),
    "lambda_m": (["--lambda_m", "--lambda-m"], float, "rate of the source -> user gain"),
    "beta_e": (["--beta_e", "--beta-e"], float, "rate of the interferer -> eavesdropper gain"),
    "lambda_e": (["--lambda_e", "--lambda-e"], float, "rate of the source -> eavesdropper gain"),
}

SIM_ARGS = {
    "n_samples": (["--samples", "--n_samples", "--n-samples"], int, "monte carlo samples per point"),
    "seed": (["--seed"], int, "monte carlo seed"),
    "batch_size": (["--batch_size", "--batch-size"], int, "samples per worker task"),
    "n_cpus": (["-nc", "--n_cpus", "--n-cpus"], int, "worker processes"),
}


def init_logging(verbose: bool = False):
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)-7s %(message)s",
        force=True,
    )
    # numba's own debug output is not ours to show
    logging.getLogger("numba").setLevel(logging.WARNING)


def load_hjson_config(config_path: str) -> dict:
    try:
        return hjson.load(open(config_path, encoding="utf-8"))
    except Exception as e:
        raise DomainError(f"failed to load config file {config_path} {e}")


def dump_hjson_config(config: dict, path: str = None):
    pretty_str = hjson.dumps(sort_dict_keys(denumpyize(config)), indent=4)
    if path is None:
        sys.stdout.write(pretty_str + "\n")
    else:
        with open(make_get_filepath(path), "w", encoding="utf-8") as f:
            f.write(pretty_str + "\n")


def make_get_filepath(filepath: str) -> str:
    """
    if not is path, creates dir and subdirs for path, returns path
    """
    dirpath = os.path.dirname(filepath) if filepath[-1] != "/" else filepath
    if dirpath and not os.path.isdir(dirpath):
        os.makedirs(dirpath)
    return filepath


def _add(parser, table: dict):
    for dest, (flags, type_, help_) in table.items():
        parser.add_argument(
            *flags,
            type=type_,
            required=False,
            dest=dest,
            default=None,
            help=f"{help_}, overriding value from config",
        )


def add_argparse_args(parser):
    parser.add_argument(
        "-c",
        "--config",
        type=str,
        required=False,
        dest="config_path",
        default=DEFAULT_CONFIG_PATH,
        help="parameter config hjson file",
    )
    _add(parser, POINT_ARGS)
    _add(parser, SIM_ARGS)
    parser.add_argument("-v", "--verbose", help="debug logging", action="store_true")
    parser.add_argument("-q", "--quiet", help="no progress bars", action="store_true")
    return parser


def add_sweep_args(parser):
    parser.add_argument(
        "-sv",
        "--sweep_var",
        "--sweep-var",
        type=str,
        required=False,
        dest="sweep_variable",
        default=None,
        help=f"swept variable, one of {', '.join(SWEEP_VARIABLES)}",
    )
    parser.add_argument(
        "--values",
        type=str,
        required=False,
        dest="sweep_values",
        default=None,
        help="swept values, comma separated or from:to:step (inclusive)",
    )
    parser.add_argument(
        "--methods",
        type=str,
        required=False,
        dest="sweep_methods",
        default=None,
        help="comma separated methods evaluated at every point",
    )
    parser.add_argument(
        "--lockstep",
        action="store_true",
        dest="sweep_lockstep",
        default=None,
        help="tie eve_antennas to n_users",
    )
    return parser


def prepare_config(args) -> dict:
    """
    takes argparse args, returns the resolved config: template <- config file <- flags
    """
    config = get_template_config()
    path = getattr(args, "config_path", None)
    if path is not None and (path != DEFAULT_CONFIG_PATH or os.path.exists(path)):
        loaded = load_hjson_config(path)
        sweep = {**config["sweep"], **dict(loaded.get("sweep", {}))}
        config = {**config, **{k: v for k, v in loaded.items() if k != "sweep"}, "sweep": sweep}
    for key in list(POINT_ARGS) + list(SIM_ARGS):
        if getattr(args, key, None) is not None:
            config[key] = getattr(args, key)
    sweep = dict(config["sweep"])
    if getattr(args, "sweep_variable", None) is not None:
        sweep["variable"] = args.sweep_variable
    if getattr(args, "sweep_values", None) is not None:
        sweep["values"] = args.sweep_values
    if getattr(args, "sweep_methods", None) is not None:
        sweep["methods"] = [m.strip() for m in args.sweep_methods.split(",") if m.strip()]
    if getattr(args, "sweep_lockstep", None):
        sweep["lockstep"] = True
    sweep["values"] = parse_values(sweep["values"])
    sweep["lockstep"] = bool(sweep["lockstep"])
    config["sweep"] = sweep
    unknown = set(config) - set(get_template_config())
    if unknown:
        raise DomainError(f"unknown config keys {sorted(unknown)}")
    return intify(config)


CSV_KWARGS = dict(index=False, columns=CSV_COLUMNS, float_format="%.17g", na_rep="", lineterminator="\n")


def csv_string(df: pd.DataFrame) -> str:
    return df.to_csv(**CSV_KWARGS)


def write_csv(df: pd.DataFrame, path: str = None):
    """17 significant digits, empty cells for missing values, unix newlines"""
    if path is None:
        df.to_csv(sys.stdout, **CSV_KWARGS)
    else:
        with open(make_get_filepath(path), "w", encoding="utf-8", newline="") as f:
            df.to_csv(f, **CSV_KWARGS)
