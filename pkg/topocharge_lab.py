"""
topocharge-lab command line.

Runs one experiment (or all of them) and writes a JSON or CSV report.
Exit codes: 0 all checks passed, 1 a check failed, 2 invalid configuration.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from config import config
from errors import ConfigError, IoError
from experiment_config import ExperimentConfigParser, config_parser
from experiment_runner import experiment_runner
from report_writer import report_writer

logger = logging.getLogger('topocharge_lab')

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def setup_logging(level: str, log_file: Optional[str] = None):
    """Log to stderr so stdout stays free for the report."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _defaults_epilog() -> str:
    lines = ["Defaults (also listed in lab-defaults.cfg):"]
    for key, value in ExperimentConfigParser.DEFAULTS.items():
        if isinstance(value, tuple):
            value = ','.join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in value)
        lines.append(f"  {key} = {value}")
    lines.append("Environment: TOPOCHARGE_THREADS, TOPOCHARGE_LOG_LEVEL, TOPOCHARGE_LOG_FILE")
    return '\n'.join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='topocharge-lab',
        description="topocharge-lab - numerical checks of topological and monopole charge quantization",
        epilog=_defaults_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("experiment", choices=ExperimentConfigParser.VALID_EXPERIMENTS,
                        help="Experiment to run.")
    parser.add_argument("--config", help="Key-value, JSON or YAML (.yml/.yaml) configuration file.")
    parser.add_argument("--json-config",
                        help="JSON configuration text or file. Wins over --config when both are given.")
    parser.add_argument("--out", help="Report file. Defaults to stdout.")
    parser.add_argument("--format", choices=ExperimentConfigParser.VALID_FORMATS, help="Report format.")
    parser.add_argument("--require-quantized", action="store_true", default=None,
                        help="Fail the run when the monopole strength is off the Dirac lattice.")
    parser.add_argument("--seed", type=lambda v: int(v, 0), help="Seed for randomized sweeps.")
    parser.add_argument("--threads", type=int, help="Worker threads, 0 = one per core. Overrides TOPOCHARGE_THREADS.")
    parser.add_argument("--log-level", default=config.log_level,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], type=str.upper,
                        help="Logging level.")
    parser.add_argument("--no-timing", action="store_true",
                        help="Leave wall_time_ms out of JSON reports.")
    return parser


def load_experiment_config(args: argparse.Namespace):
    """Resolve the configuration source and apply command-line overrides."""
    overrides = {
        'experiment': args.experiment,
        'out': args.out,
        'format': args.format,
        'seed': args.seed,
        'require_quantized': args.require_quantized,
    }
    if args.json_config:
        if os.path.isfile(args.json_config):
            return config_parser.load_config_file(args.json_config, overrides)
        return config_parser.parse_config(args.json_config, overrides, '--json-config')
    if args.config:
        return config_parser.load_config_file(args.config, overrides)
    return config_parser.from_mapping({}, overrides, 'defaults')


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, config.log_file)
    if args.threads is not None:
        try:
            config.update_threads(args.threads)
        except ValueError as e:
            logger.error(f"Invalid --threads: {e}")
            return EXIT_CONFIG
    logger.debug(f"Using {config.worker_count()} worker threads")

    try:
        experiment_config = load_experiment_config(args)
    except ConfigError as e:
        logger.error(f"Configuration error ({e.key}): {e}")
        return EXIT_CONFIG

    report = experiment_runner.run(experiment_config)
    try:
        report_writer.write(report, experiment_config.format, experiment_config.out,
                            include_timing=not args.no_timing)
    except IoError as e:
        logger.error(str(e))
        return EXIT_FAIL
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
