"""fhnls command line.

Exit codes: 0 success, 1 experiment-level failure, 2 invalid configuration.
"""

import argparse
import asyncio
import sys
from typing import List, Optional

from loguru import logger
from pydantic import ValidationError

from .config.config import FhnlsConfig, format_validation_error, load_experiment_config
from .consts import FHNLS_VERSION
from .models.experiment_models import ExperimentConfig, ExperimentKind, RunManifest
from .services.experiment_service import ExperimentService
from .utils.logger import configure_logging

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fhnls", description="Fractional Hartree NLS simulator")
    parser.add_argument("--version", action="version", version=f"fhnls {FHNLS_VERSION}")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    parser.add_argument("--settings", default=None, help="Runtime settings YAML")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None)
    run.add_argument("--workers", type=int, default=None)

    ground = sub.add_parser("ground-state", help="Solve for the ground state Q")
    ground.add_argument("--alpha", type=float, required=True)
    ground.add_argument("--gamma", type=float, required=True)
    ground.add_argument("--n", type=int, required=True, dest="dim")
    ground.add_argument("--points", type=int, default=64)
    ground.add_argument("--half-length", type=float, default=20.0)
    ground.add_argument("--tol", type=float, default=1e-8)
    ground.add_argument("--max-iter", type=int, default=2000)
    ground.add_argument("--out", default=None)

    inequalities = sub.add_parser("check-inequalities", help="Run the inequality suite")
    inequalities.add_argument("--suite", default="all")
    inequalities.add_argument("--seed", type=int, default=0)
    inequalities.add_argument("--samples", type=int, default=100)
    inequalities.add_argument("--n", type=int, default=2, dest="dim")
    inequalities.add_argument("--points", type=int, default=64)
    inequalities.add_argument("--half-length", type=float, default=10.0)
    inequalities.add_argument("--no-refine", action="store_true")
    inequalities.add_argument("--baseline", default=None)
    inequalities.add_argument("--freeze", action="store_true")
    inequalities.add_argument("--out", default=None)

    resume = sub.add_parser("resume", help="Continue an evolution from a checkpoint")
    resume.add_argument("--checkpoint", required=True)
    resume.add_argument("--t-final", type=float, required=True)
    resume.add_argument("--config", default=None, help="Experiment config supplying psi and dispersion")
    resume.add_argument("--out", default=None)

    sub.add_parser("serve", help="Run the MCP server on stdio")
    return parser


def _report(manifest: RunManifest) -> int:
    logger.info(f"Run {manifest.run_id}: status={manifest.status.value}, passed={manifest.passed}")
    for path in manifest.outputs:
        logger.info(f"  wrote {path}")
    if manifest.error_message:
        logger.error(manifest.error_message)
    return manifest.exit_code


def _suite(value: str):
    return value if value == "all" else [item.strip() for item in value.split(",")]


def _command_config(args: argparse.Namespace) -> Optional[ExperimentConfig]:
    grid = {'dim': args.dim, 'points_per_axis': args.points, 'half_length': args.half_length}
    if args.command == "ground-state":
        document = {
            'experiment': ExperimentKind.GROUND_STATE.value,
            'grid': grid,
            'physics': {'alpha': args.alpha, 'gamma': args.gamma, 'lam': -1},
            'ground_state': {'tol': args.tol, 'max_iter': args.max_iter},
        }
    else:
        document = {
            'experiment': ExperimentKind.INEQUALITIES.value,
            'grid': grid,
            'seed': args.seed,
            'inequalities': {
                'suite': _suite(args.suite), 'samples': args.samples, 'refine': not args.no_refine,
                'baseline': args.baseline, 'freeze': args.freeze,
            },
        }
    return ExperimentConfig.model_validate(document)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = FhnlsConfig(args.settings)
    configure_logging(args.log_level or settings.get('logging.level'), settings.get('logging.file'))

    if args.command == "serve":
        from .server import main as serve

        asyncio.run(serve())
        return EXIT_OK

    try:
        if args.command == "run":
            config = load_experiment_config(args.config)
        elif args.command == "resume":
            config = load_experiment_config(args.config) if args.config else None
        else:
            config = _command_config(args)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {format_validation_error(e)}")
        return EXIT_INVALID_CONFIG
    except (OSError, ValueError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID_CONFIG

    service = ExperimentService(settings, workers=getattr(args, 'workers', None))
    if args.command == "resume":
        try:
            manifest = service.resume(args.checkpoint, args.t_final, config, args.out)
        except ValidationError as e:
            logger.error(f"Invalid configuration: {format_validation_error(e)}")
            return EXIT_INVALID_CONFIG
        except (OSError, ValueError) as e:
            logger.error(f"Cannot resume from {args.checkpoint}: {e}")
            return EXIT_INVALID_CONFIG
    else:
        manifest = service.run(config, args.out)
    return _report(manifest)


if __name__ == "__main__":
    sys.exit(main())
