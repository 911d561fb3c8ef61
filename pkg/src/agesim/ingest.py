"""Reading and writing indicator series and workload reports.

The series format is a three-column CSV, ``timestamp,metric,value``,
holding any number of metrics in one file.  Timestamps are either all
numeric (seconds, integral or decimal) or all ISO-8601 wall-clock times;
the two styles cannot be mixed within a file.  ISO timestamps without a
zone designator are taken as UTC.  The unit of measure is not part of
the format, so the caller supplies one for the ingested series.

``serialize_series`` writes the same format back with full-precision
values, so a serialize/ingest round trip reproduces a series exactly.

Workload reports are JSON documents with a ``workloads`` list of
records carrying ``start``, ``end`` and ``status``; they yield a
duration series plus status and error tallies.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Mapping

from .errors import DuplicateTimestampError, EmptyFileError, ParseError
from .workload import WorkloadStatus

HEADER = ("timestamp", "metric", "value")


def _open_text(source: str | Path | IO[str]) -> tuple[IO[str], bool]:
    if isinstance(source, (str, Path)):
        return open(source, "r", newline="", encoding="utf-8"), True
    return source, False


def _parse_numeric(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def _parse_iso(text: str) -> float | None:
    try:
        moment = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        return None
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.timestamp()


def ingest(source: str | Path | IO[str], unit: str = "unknown") -> dict:
    """Parse a series CSV into indicator series keyed by metric name.

    Samples are sorted by timestamp per metric; a duplicate timestamp
    within one metric is an error.  The file must use one timestamp
    style throughout, numeric seconds or ISO-8601.
    """
    from .trendstats import IndicatorSeries

    handle, owned = _open_text(source)
    try:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFileError("series file is empty") from None
        if tuple(h.strip().lower() for h in header) != HEADER:
            raise ParseError(
                f"expected header {','.join(HEADER)!r}, got {','.join(header)!r}",
                line=1,
            )

        style: str | None = None
        by_metric: dict[str, list[tuple[float, float]]] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", line=line_no)
            raw_ts, metric, raw_value = (cell.strip() for cell in row)
            if not metric:
                raise ParseError("empty metric name", line=line_no)

            ts = _parse_numeric(raw_ts)
            row_style = "numeric"
            if ts is None:
                ts = _parse_iso(raw_ts)
                row_style = "iso-8601"
            if ts is None:
                raise ParseError(f"unreadable timestamp {raw_ts!r}", line=line_no)
            if style is None:
                style = row_style
            elif style != row_style:
                raise ParseError(
                    f"mixed timestamp styles: file uses {style}, row uses {row_style}",
                    line=line_no,
                )

            value = _parse_numeric(raw_value)
            if value is None:
                raise ParseError(f"unreadable value {raw_value!r}", line=line_no)
            by_metric.setdefault(metric, []).append((ts, value))

        if not by_metric:
            raise EmptyFileError("series file has no data rows")
    finally:
        if owned:
            handle.close()

    series: dict[str, IndicatorSeries] = {}
    for metric, samples in by_metric.items():
        samples.sort()
        for (t1, _), (t2, _) in zip(samples, samples[1:]):
            if t1 == t2:
                raise DuplicateTimestampError(
                    f"metric {metric!r} has two samples at timestamp {t1!r}"
                )
        series[metric] = IndicatorSeries(
            name=metric, unit=unit, samples=tuple(samples)
        )
    return series


def _format_timestamp(ts: float) -> str:
    if float(ts).is_integer():
        return str(int(ts))
    return repr(float(ts))


def serialize_series(series_by_name: Mapping[str, "IndicatorSeries"]) -> str:
    """Render series as the ingestable CSV format, full precision."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for name in sorted(series_by_name):
        for ts, value in series_by_name[name].samples:
            writer.writerow([_format_timestamp(ts), name, repr(float(value))])
    return out.getvalue()


def write_series_csv(
    series_by_name: Mapping[str, "IndicatorSeries"], path: str | Path
) -> None:
    Path(path).write_text(serialize_series(series_by_name), encoding="utf-8")


# ── Workload reports ─────────────────────────────────────────────────────


@dataclass(frozen=True)
class WorkloadReportData:
    """Summary of an ingested workload report."""

    durations: "IndicatorSeries | None"
    status_counts: Mapping[str, int]
    error_tally: Mapping[str, int]
    rejected_records: int


def ingest_workload_report(source: str | Path | IO[str]) -> WorkloadReportData:
    """Parse a workload-report JSON document.

    Records missing fields, with unknown statuses, or ending before
    they start are counted as rejected and skipped.  Durations of
    successful workloads become an indicator series timestamped at each
    workload's start.
    """
    from .trendstats import IndicatorSeries

    handle, owned = _open_text(source)
    try:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"not valid JSON: {exc}") from None
    finally:
        if owned:
            handle.close()
    if not isinstance(document, dict) or "workloads" not in document:
        raise ParseError("workload report needs a top-level 'workloads' list")
    records = document["workloads"]
    if not isinstance(records, list):
        raise ParseError("'workloads' must be a list")

    statuses = {status.value for status in WorkloadStatus}
    status_counts = {status.value: 0 for status in WorkloadStatus}
    error_tally: dict[str, int] = {}
    samples: list[tuple[float, float]] = []
    rejected = 0
    for record in records:
        try:
            start = float(record["start"])
            end = float(record["end"])
            status = record["status"]
        except (KeyError, TypeError, ValueError):
            rejected += 1
            continue
        if status not in statuses or end < start:
            rejected += 1
            continue
        status_counts[status] += 1
        error = record.get("error")
        if error:
            error_tally[error] = error_tally.get(error, 0) + 1
        if status == WorkloadStatus.SUCCESS.value:
            samples.append((start, end - start))

    durations = None
    if samples:
        samples.sort()
        previous = None
        ordered: list[tuple[float, float]] = []
        for ts, value in samples:
            if previous is not None and ts <= previous:
                ts = previous + 1e-9
            ordered.append((ts, value))
            previous = ts
        durations = IndicatorSeries(
            name="workload-duration", unit="seconds", samples=tuple(ordered)
        )
    return WorkloadReportData(
        durations=durations,
        status_counts=status_counts,
        error_tally=error_tally,
        rejected_records=rejected,
    )
