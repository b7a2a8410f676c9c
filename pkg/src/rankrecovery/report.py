"""Batch execution and metric export."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence, Union

from .config import ScenarioConfig, load_config
from .errors import RecoveryError, UnsupportedFormat
from .simulator import ScenarioReport, run_scenario

COLUMNS = (
    "scenario_id",
    "baseline_response",
    "recovered_response",
    "improvement_ratio",
    "passes",
    "transfers",
    "messages",
    "detection_latency",
    "status",
)


class ExportFormat(str, Enum):
    TABLE = "table"
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class ScenarioFailure:
    """Batch slot for a scenario that could not be loaded or run."""

    scenario_id: str
    error: str
    validation: bool = False

    def to_dict(self) -> dict:
        return {"scenario_id": self.scenario_id, "error": self.error, "validation": self.validation}


BatchItem = Union[ScenarioReport, ScenarioFailure]
Source = Union[ScenarioConfig, ScenarioFailure, str, Path]


def _run_one(source: Source) -> BatchItem:
    if isinstance(source, ScenarioFailure):
        return source
    if isinstance(source, ScenarioConfig):
        cfg, sid = source, source.scenario_id
    else:
        sid = Path(source).stem
        try:
            cfg = load_config(source)
        except RecoveryError as exc:
            return ScenarioFailure(sid, str(exc), validation=True)
    try:
        return run_scenario(cfg)
    except RecoveryError as exc:
        return ScenarioFailure(sid, str(exc))


def run_batch(sources: Sequence[Source], parallelism: int = 1) -> list[BatchItem]:
    """Run scenarios, returning one slot per input in input order.

    ``sources`` may mix configs, scenario file paths and already-failed
    slots. A file that fails to load, or a scenario that errors, yields a
    :class:`ScenarioFailure` in its slot instead of aborting the batch.
    """
    sources = list(sources)
    if parallelism <= 1 or len(sources) <= 1:
        return [_run_one(s) for s in sources]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(_run_one, sources))


def _num(x: int | float | None) -> str:
    if x is None:
        return "inf"
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.4f}"
    return str(x)


def _row(item: BatchItem) -> list[str]:
    if isinstance(item, ScenarioFailure):
        return [item.scenario_id] + [""] * 7 + [f"error: {item.error}"]
    red = item.redistribution
    return [
        item.scenario_id,
        _num(item.response_time_baseline),
        _num(item.response_time_recovered),
        _num(item.improvement_ratio),
        str(red.passes),
        str(len(red.transfers)),
        str(red.messages),
        str(item.detection_latency),
        "ok",
    ]


def export_report(items: Iterable[BatchItem], fmt: str | ExportFormat = ExportFormat.TABLE) -> str:
    """Render batch results as an aligned text table, CSV or JSON.

    Column order is fixed (see ``COLUMNS``). JSON holds the full reports and
    is readable back with :func:`load_reports`.
    """
    try:
        fmt = ExportFormat(fmt)
    except ValueError:
        raise UnsupportedFormat(f"unsupported format {fmt!r}") from None
    items = list(items)
    if fmt is ExportFormat.JSON:
        doc = [
            {"ok": False, **i.to_dict()} if isinstance(i, ScenarioFailure)
            else {"ok": True, "report": i.to_dict()}
            for i in items
        ]
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    rows = [_row(i) for i in items]
    if fmt is ExportFormat.CSV:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        writer.writerows(rows)
        return buf.getvalue()
    widths = [max(len(r[k]) for r in [list(COLUMNS), *rows]) for k in range(len(COLUMNS))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in [list(COLUMNS), *rows]]
    return "\n".join(lines) + "\n"


def load_reports(text: str) -> list[BatchItem]:
    """Inverse of ``export_report(..., "json")``."""
    out: list[BatchItem] = []
    for entry in json.loads(text):
        if entry["ok"]:
            out.append(ScenarioReport.from_dict(entry["report"]))
        else:
            out.append(ScenarioFailure(entry["scenario_id"], entry["error"], entry["validation"]))
    return out
