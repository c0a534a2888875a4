"""Command-line front end: ``pinchsim <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from pinchsim import __version__
from pinchsim.cli.figures import SUBCOMMANDS, check_family, with_plan
from pinchsim.config import get_block_size
from pinchsim.errors import (
    EXIT_CONFIG,
    EXIT_OK,
    ConfigurationError,
    PinchSimError,
    ValidationFailure,
)
from pinchsim.logging_utils import configure_logging, get_log_manager, get_logger
from pinchsim.models import ScenarioConfig
from pinchsim.services.export import write_csv
from pinchsim.services.validation import ValidationSettings, require_all, run_checks

LOGGER = get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinchsim",
        description="Reproduce pinching-antenna rate figures and run the self-checks.",
    )
    parser.add_argument("--version", action="version", version=f"pinchsim {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    for name in list(SUBCOMMANDS) + ["validate"]:
        sub = commands.add_parser(name)
        sub.add_argument("--config", type=Path, help="JSON scenario file; the figure default when omitted.")
        sub.add_argument("--out", type=Path, help="Output CSV path.")
        sub.add_argument("--seed", type=int, help="Override plan.seed.")
        sub.add_argument("--trials", type=int, help="Override plan.num_trials.")
        sub.add_argument("--workers", type=int, help="Worker processes; 0 uses every CPU.")
        sub.add_argument("--log-level", default=None, help="Log level for the in-memory buffer.")
        sub.add_argument("--log-json", type=Path, help="Dump buffered log records as JSON lines.")
        sub.add_argument("--debug-eta-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    return parser


def _key_path(error: ValidationError) -> str:
    details = error.errors()
    if not details:
        return "<root>"
    return ".".join(str(part) for part in details[0]["loc"]) or "<root>"


def load_config(path: Optional[Path], command: str) -> ScenarioConfig:
    if path is None:
        return SUBCOMMANDS[command].default()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}", key_path="<file>") from exc
    return ScenarioConfig.model_validate(json.loads(text))


def apply_overrides(config: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.trials is not None:
        updates["num_trials"] = args.trials
    if updates:
        config = with_plan(config, **updates)
        if args.trials is not None and args.command in ("fig10", "table1"):
            config = config.model_copy(update={"realizations": args.trials})
    return config


def _run_validate(args: argparse.Namespace) -> int:
    results = run_checks(ValidationSettings(workers=args.workers, eta_scale=args.debug_eta_scale))
    for result in results:
        print(result.line())
    require_all(results)
    return EXIT_OK


def _run_figure(args: argparse.Namespace) -> int:
    subcommand = SUBCOMMANDS[args.command]
    config = apply_overrides(load_config(args.config, args.command), args)
    check_family(subcommand, config)
    LOGGER.info(
        "Running %s",
        args.command,
        extra={"event": "cli.command.start", "payload": {"command": args.command, "config": config}},
    )
    table = subcommand.run(config, args.workers)
    target = args.out or Path(config.output or f"{args.command}.csv")
    write_csv(target, table, config, block_size=get_block_size())
    print(target)
    if table.failures:
        raise ValidationFailure("; ".join(table.failures))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(level=args.log_level, stream_level="WARNING")
    try:
        if args.command == "validate":
            code = _run_validate(args)
        else:
            code = _run_figure(args)
    except ValidationError as exc:
        key = _key_path(exc)
        message = exc.errors()[0]["msg"] if exc.errors() else str(exc)
        print(f"config error at {key}: {message}", file=sys.stderr)
        LOGGER.error(
            "Configuration rejected at %s",
            key,
            extra={"event": "cli.command.failed", "payload": {"key_path": key, "message": message}},
        )
        code = EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"config error at <root>: {exc}", file=sys.stderr)
        LOGGER.error(
            "Configuration is not valid JSON",
            extra={"event": "cli.command.failed", "payload": {"message": str(exc)}},
        )
        code = EXIT_CONFIG
    except PinchSimError as exc:
        key = getattr(exc, "key_path", None)
        prefix = f"error at {key}: " if key else "error: "
        print(f"{prefix}{exc}", file=sys.stderr)
        LOGGER.error(
            "%s failed: %s",
            args.command,
            exc,
            extra={
                "event": "cli.command.failed",
                "payload": {"error": type(exc).__name__, "exit_code": exc.exit_code, "key_path": key},
            },
        )
        code = exc.exit_code
    if args.log_json is not None:
        get_log_manager().dump_jsonl(args.log_json)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
