"""CSV result tables with a provenance header."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence

from pinchsim import __version__
from pinchsim.logging_utils import get_logger
from pinchsim.models import ScenarioConfig
from pinchsim.services.harness import SweepResult

LOGGER = get_logger(__name__)

SWEEP_HEADER = ("scheme", "curve", "power_dbm", "metric", "mean", "stderr", "n_trials")


@dataclass
class ResultTable:
    header: Sequence[str]
    rows: List[Sequence[object]] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    def add(self, *values: object) -> None:
        if len(values) != len(self.header):
            raise ValueError(f"row has {len(values)} values for {len(self.header)} columns")
        self.rows.append(values)

    def extend(self, rows: Iterable[Sequence[object]]) -> None:
        for row in rows:
            self.add(*row)


def canonical_config_json(config: ScenarioConfig) -> str:
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def config_digest(config: ScenarioConfig) -> str:
    return hashlib.sha256(canonical_config_json(config).encode("utf-8")).hexdigest()


def format_value(value: object) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def sweep_rows(result: SweepResult, curve: str = "") -> List[Sequence[object]]:
    """Long-format rows, one per (power, metric)."""

    rows: List[Sequence[object]] = []
    for i, power in enumerate(result.powers_dbm):
        for j, metric in enumerate(result.columns):
            rows.append(
                (
                    result.scheme,
                    curve,
                    float(power),
                    metric,
                    float(result.mean[i, j]),
                    float(result.stderr[i, j]),
                    result.num_trials,
                )
            )
    return rows


def render_csv(
    table: ResultTable,
    config: ScenarioConfig,
    *,
    block_size: int,
) -> str:
    buffer = io.StringIO()
    provenance = {
        "pinchsim_version": __version__,
        "config_sha256": config_digest(config),
        "seed": config.plan.seed,
        "block_size": block_size,
        "config": canonical_config_json(config),
    }
    for key, value in provenance.items():
        buffer.write(f"# {key}={value}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.header)
    for row in table.rows:
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue()


def write_csv(
    path: Path | str,
    table: ResultTable,
    config: ScenarioConfig,
    *,
    block_size: int,
) -> Path:
    target = Path(path)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as handle:
        handle.write(render_csv(table, config, block_size=block_size))
    LOGGER.info(
        "Wrote %s rows to %s",
        len(table.rows),
        target,
        extra={"event": "export.csv.written", "payload": {"path": str(target), "rows": len(table.rows)}},
    )
    return target


def csv_body(text: str) -> str:
    """The CSV without its provenance lines."""

    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


__all__ = [
    "SWEEP_HEADER",
    "ResultTable",
    "canonical_config_json",
    "config_digest",
    "csv_body",
    "format_value",
    "render_csv",
    "sweep_rows",
    "write_csv",
]
