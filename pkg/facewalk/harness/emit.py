"""Write experiment results to disk."""
import csv
import logging
from pathlib import Path
from typing import List, Literal, Sequence

from pydantic import BaseModel, Field

from facewalk.exceptions import ConfigError
from facewalk.schemas.experiment import (
    AggregateRow,
    DiscardedCell,
    ExperimentConfig,
    RouteMetrics,
)

logger = logging.getLogger("facewalk.harness")

CSV_COLUMNS = list(RouteMetrics.model_fields)


class MetricsFile(BaseModel):
    """The JSON flavour of the per-run results file."""

    rows: List[RouteMetrics]


class AggregatesFile(BaseModel):
    """The sibling file holding per-cell summaries."""

    config: ExperimentConfig = Field(
        ..., description="The configuration that produced the results."
    )
    aggregates: List[AggregateRow]
    discarded: List[DiscardedCell]


def _csv_value(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def emit_results(
    rows: Sequence[RouteMetrics],
    out_dir: Path,
    fmt: Literal["csv", "json"] = "csv",
    aggregates: Sequence[AggregateRow] = (),
    discarded: Sequence[DiscardedCell] = (),
    config: ExperimentConfig = None,
) -> List[Path]:
    """Write the per-run rows and the aggregates.

    Files hold no timestamps, so a rerun with the same configuration
    writes the same bytes.

    Returns:
        The paths that were written.

    Raises:
        ConfigError: a file could not be written.
    """
    out_dir = Path(out_dir)
    results = out_dir / f"results.{fmt}"
    summary = out_dir / "aggregates.json"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            with results.open("w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(CSV_COLUMNS)
                for row in rows:
                    data = row.model_dump()
                    writer.writerow(
                        [_csv_value(data[c]) for c in CSV_COLUMNS]
                    )
        else:
            results.write_text(
                MetricsFile(rows=list(rows)).model_dump_json(indent=2)
                + "\n",
                encoding="utf-8",
            )
        summary.write_text(
            AggregatesFile(
                config=config or ExperimentConfig(),
                aggregates=list(aggregates),
                discarded=list(discarded),
            ).model_dump_json(indent=2)
            + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        path = exc.filename or str(out_dir)
        raise ConfigError.from_code(
            "io-error", params={"path": path, "reason": exc.strerror}
        ) from exc
    logger.info("Wrote %d rows to %s.", len(rows), results)
    return [results, summary]
