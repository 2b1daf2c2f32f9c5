"""
Rendering of output records as CSV or JSON.
"""
import csv
import io
import math
from pathlib import Path
from typing import Any, Literal

from matching.config.settings import settings
from matching.models.output import OutputRecord

OutputFormat = Literal["csv", "json"]


def format_value(value: Any) -> str:
    """Locale-independent text for one CSV cell."""
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "NaN"
        if math.isinf(value):
            return "Inf" if value > 0 else "-Inf"
        return f"{value:.{settings.csv_significant_digits}g}"
    return str(value)


def render_csv(record: OutputRecord) -> str:
    """Parameters and flags as '#' comment lines, then a header and one line per row."""
    buffer = io.StringIO()
    buffer.write(f"# command: {record.command}\n")
    for key, value in record.parameters.items():
        buffer.write(f"# {key}: {format_value(value)}\n")
    for key, flag in record.flags.items():
        buffer.write(f"# {key}: {flag}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(record.columns)
    for row in record.rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def render(record: OutputRecord, fmt: OutputFormat) -> str:
    if fmt == "json":
        return record.model_dump_json(indent=2) + "\n"
    return render_csv(record)


def write_record(record: OutputRecord, fmt: OutputFormat, directory: Path, name: str) -> Path:
    """Write one record to directory/name.<fmt> and return the path."""
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.{fmt}"
    path.write_text(render(record, fmt), encoding="utf-8")
    return path
