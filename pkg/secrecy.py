import os

if "NOJIT" not in os.environ:
    os.environ["NOJIT"] = "false"

import argparse
import logging
import sys

import pandas as pd

from acceptance import Acceptance, report
from errors import DomainError, NumericError
from presets import figure_runs, run_config
from procedures import (
    add_argparse_args,
    add_sweep_args,
    dump_hjson_config,
    init_logging,
    prepare_config,
    write_csv,
)
from pure_funcs import config_pretty_str, make_row
from sweeps import SweepSpec, evaluate, n_failed, run_sweep

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3
EXIT_ACCEPTANCE = 4


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags already; route the message through logging"""

    def error(self, message):
        self.print_usage(sys.stderr)
        logging.error(f"{self.prog}: {message}")
        sys.exit(EXIT_INVALID)


def cmd_eval(config: dict, progress: bool) -> int:
    estimate, std_error = evaluate(config, n_cpus=config["n_cpus"], progress=progress)
    write_csv(pd.DataFrame([make_row(config, "", "", estimate, std_error)]))
    return EXIT_OK


def cmd_sweep(config: dict, output: str, progress: bool) -> int:
    spec = SweepSpec.from_config(config)
    df = run_sweep(config, spec, n_cpus=config["n_cpus"], progress=progress)
    write_csv(df, output)
    if output is not None:
        logging.info(f"wrote {len(df)} rows to {output}")
    failed = n_failed(df)
    if failed:
        logging.error(f"{failed} rows failed numerically")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_figure(config: dict, figure: str, output: str, output_dir: str, progress: bool) -> int:
    frames = []
    status = EXIT_OK
    for run in figure_runs(figure):
        run_cfg = run_config(config, run)
        logging.info(f"figure {figure}: {run['name']}")
        df = run_sweep(run_cfg, SweepSpec.from_config(run_cfg), n_cpus=config["n_cpus"], progress=progress)
        if n_failed(df):
            status = EXIT_NUMERIC
        if output is None:
            path = os.path.join(output_dir, f"figure_{figure}", f"{run['name']}.csv")
            write_csv(df, path)
            logging.info(f"wrote {path}")
        frames.append(df)
    if output is not None:
        write_csv(pd.concat(frames, ignore_index=True), None if output == "-" else output)
    return status


def cmd_validate(quick: bool, inject_fault: bool, seed: int, n_cpus: int, progress: bool) -> int:
    results = Acceptance(quick=quick, inject_fault=inject_fault, seed=seed, n_cpus=n_cpus, progress=progress).run()
    print(report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(
        prog="secrecy",
        description="secrecy outage, positive secrecy capacity and ergodic secrecy capacity "
        "of k-th best user selection under interference",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    add_argparse_args(subparsers.add_parser("eval", help="one metric at one point, CSV row to stdout"))

    sweep_parser = add_sweep_args(
        add_argparse_args(subparsers.add_parser("sweep", help="sweep one variable, CSV file"))
    )
    sweep_parser.add_argument("-o", "--output", type=str, default=None, help="CSV path, stdout if omitted")

    figure_parser = add_argparse_args(subparsers.add_parser("figure", help="regenerate a figure data set"))
    figure_parser.add_argument("figure", choices=["2", "3", "4"])
    figure_parser.add_argument(
        "-o", "--output", type=str, default=None, help="one combined CSV ('-' for stdout) instead of one per run"
    )
    figure_parser.add_argument(
        "-od", "--output_dir", "--output-dir", type=str, default="results", dest="output_dir", help="per-run CSV directory"
    )

    validate_parser = add_argparse_args(subparsers.add_parser("validate", help="acceptance checks with a PASS/FAIL report"))
    validate_parser.add_argument("--quick", action="store_true", help="reduced grid")
    validate_parser.add_argument(
        "--inject-fault", "--inject_fault", action="store_true", dest="inject_fault", help="perturb c_m by 1%% in the closed forms"
    )

    dump_parser = add_sweep_args(
        add_argparse_args(subparsers.add_parser("dump-config", help="print or write the resolved config as hjson"))
    )
    dump_parser.add_argument("-o", "--output", type=str, default=None, help="hjson path, stdout if omitted")
    return parser


def main(argv=None) -> int:
    init_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    init_logging(args.verbose)
    progress = not args.quiet
    try:
        config = prepare_config(args)
        logging.debug(f"resolved config\n{config_pretty_str(config)}")
        if args.command == "eval":
            return cmd_eval(config, progress)
        if args.command == "sweep":
            return cmd_sweep(config, args.output, progress)
        if args.command == "figure":
            return cmd_figure(config, args.figure, args.output, args.output_dir, progress)
        if args.command == "validate":
            return cmd_validate(args.quick, args.inject_fault, config["seed"], config["n_cpus"], progress)
        if args.command == "dump-config":
            dump_hjson_config(config, args.output)
            return EXIT_OK
    except DomainError as e:
        logging.error(str(e))
        return EXIT_INVALID
    except NumericError as e:
        logging.error(str(e))
        return EXIT_NUMERIC
    except OSError as e:
        logging.error(f"i/o error: {e}")
        return EXIT_IO
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
