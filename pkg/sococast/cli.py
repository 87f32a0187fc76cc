"""The `sococast` command: run experiments, verify properties, print the reference config.

Exit codes: 0 success, 1 invalid input, 2 numeric failure during a run,
3 failed verification.
"""
import argparse
import json
import os
import sys
from typing import List, Optional

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from sococast import __version__
from sococast.core.generator import BIT_GENERATOR
from sococast.schema.config import ExperimentConfig
from sococast.schema.pubsub import Event
from sococast.sim.harness import run_seeds
from sococast.sim.verification import SUITES, run_suite
from sococast.utils.exceptions import ConfigurationError, NumericError, SococastError
from sococast.utils.file_callback import setup_file_callback
from sococast.utils.print_callback import setup_print_callback
from sococast.utils.pubsub import publish_event, unsubscribe_event
from sococast.utils.writers import config_json, write_outputs

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_VERIFICATION = 3

WORKERS_ENV = "SOCOCAST_WORKERS"

# sizes for `sococast verify --quick`
QUICK_SIZES = {
    "pathwise-ons": {"n_traces": 10, "T": 300},
    "pathwise-boa": {"n_random": 10, "n_adversarial": 2, "T": 500},
    "gradients": {"n_points": 100},
    "projections": {"n_instances": 10},
    "h2": {"n_pairs": 5000, "T": 500},
    "bounds": {"n_seeds": 5, "T": 300},
    "adaptation": {"n_seeds": 5, "T": 1000},
    "mixture": {"n_seeds": 5, "T": 500},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def load_config(path: str) -> ExperimentConfig:
    """Parse a JSON experiment file.

    Raises
    ------
    - `OSError`: If the file cannot be read.
    - `ValidationError`: If the file is not valid JSON or a field is out of its domain.
    """
    with open(path) as f:
        return ExperimentConfig.model_validate_json(f.read())


def resolve_workers(workers: Optional[int]) -> int:
    """The explicit worker count, else `SOCOCAST_WORKERS` (also read from `.env`), else 1.

    Raises
    ------
    - `ConfigurationError`: If `SOCOCAST_WORKERS` is not an integer.
    """
    if workers is not None:
        return workers
    load_dotenv()
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(int(value), 1)
    except ValueError:
        raise ConfigurationError(f"{WORKERS_ENV} should be an integer, got: {value!r}") from None


def format_validation_error(error: ValidationError) -> str:
    return "\n".join(
        f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in error.errors()
    )


def _error(message: str) -> None:
    print(f"sococast: error: {message}", file=sys.stderr)


def run(config_path: str, workers: Optional[int] = None, output: Optional[str] = None) -> int:
    try:
        config = load_config(config_path)
    except ValidationError as e:
        _error(f"invalid config {config_path}\n{format_validation_error(e)}")
        return EXIT_VALIDATION
    except OSError as e:
        _error(f"cannot read config {config_path}: {e}")
        return EXIT_VALIDATION

    directory = output or config.output.directory
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        _error(f"cannot create output directory {directory}: {e}")
        return EXIT_VALIDATION
    callback = None
    if config.output.events_db:
        db_path = os.path.join(directory, "events.db")
        if os.path.exists(db_path):
            os.remove(db_path)
        callback = setup_file_callback(db_path)
    try:
        results = run_seeds(config, resolve_workers(workers))
    except NumericError as e:
        _error(f"numeric failure at round {e.round_index}: {e}")
        return EXIT_NUMERIC
    except (FloatingPointError, np.linalg.LinAlgError) as e:
        _error(f"numeric failure: {e}")
        return EXIT_NUMERIC
    except SococastError as e:
        _error(str(e))
        return EXIT_VALIDATION
    finally:
        if callback is not None:
            for event_type in Event:
                unsubscribe_event(event_type, callback)

    title = f"{config.learner.kind.value} / {config.forecaster.family} / {config.generator.kind}"
    write_outputs(results, directory, svg=config.output.svg, title=title)
    metadata = {
        "version": __version__,
        "bit_generator": BIT_GENERATOR,
        "seeds": config.seeds,
        "config": config.model_dump(mode="json"),
    }
    with open(os.path.join(directory, "metadata.json"), "w") as f:
        json.dump(metadata, f, indent=2, sort_keys=True)
    publish_event(
        Event.ExperimentEnd,
        id(config),
        {
            "exceedance": float(np.mean([r.exceeded for r in results])),
            "n_seeds": len(results),
            "output": directory,
        },
    )
    return EXIT_OK


def verify(suite: str, quick: bool = False) -> int:
    if quick:
        sizes = QUICK_SIZES if suite == "all" else QUICK_SIZES[suite]
    else:
        sizes = {}
    try:
        result = run_suite(suite, **sizes)
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as e:
        _error(f"numeric failure during {suite}: {e}")
        return EXIT_NUMERIC
    except SococastError as e:
        _error(f"{suite} could not run: {e}")
        return EXIT_VERIFICATION
    for sub in result.sub_results or [result]:
        status = "passed" if sub.passed else "FAILED"
        print(f"{sub.suite}: {status} (worst margin {sub.worst_margin:.6g})")
        print(sub.details)
    return EXIT_OK if result.passed else EXIT_VERIFICATION


def example_config(output: Optional[str] = None) -> int:
    text = config_json(ExperimentConfig())
    if output is None:
        print(text, end="")
    else:
        with open(output, "w") as f:
            f.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sococast", description="Stochastic online convex optimization experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--quiet", action="store_true", help="Do not print events")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run_parser = sub.add_parser("run", help="Run every seed of an experiment file")
    run_parser.add_argument("config", help="JSON experiment file")
    run_parser.add_argument(
        "--workers", type=int, default=None, help=f"Seeds run in parallel (default ${WORKERS_ENV} or 1)"
    )
    run_parser.add_argument("--output", default=None, help="Output directory (overrides the config)")

    verify_parser = sub.add_parser("verify", help="Run a property suite")
    verify_parser.add_argument("suite", choices=["all", *SUITES])
    verify_parser.add_argument("--quick", action="store_true", help="Reduced suite sizes")

    example_parser = sub.add_parser("example-config", help="Print the reference config")
    example_parser.add_argument("--output", default=None, help="Write to a file instead")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if not args.quiet and args.command != "example-config":
        setup_print_callback()
    if args.command == "run":
        return run(args.config, args.workers, args.output)
    if args.command == "verify":
        return verify(args.suite, args.quick)
    return example_config(args.output)


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
