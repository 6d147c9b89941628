"""Readers for the andersonlab CSV/JSON output schemas.

Every CSV starts with a magic comment line

    # andersonlab-csv v<version> <kind> <table>

followed by a header row.  The version must be one we support; anything
else is an error, never a silent skip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

CSV_MAGIC = "andersonlab-csv"
SUPPORTED_VERSIONS = (1,)


class SchemaError(ValueError):
    """Input file does not carry a supported andersonlab schema."""


class EmptyDataError(ValueError):
    """Input parsed fine but holds no data rows."""


@dataclass(frozen=True)
class Table:
    kind: str
    table: str
    version: int
    columns: tuple[str, ...]
    rows: list[dict]
    path: str


def _convert(cell: str):
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_table(path) -> Table:
    """Parse one andersonlab CSV file into typed rows."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or not lines[0].startswith("#"):
        raise SchemaError(f"{path}: missing schema comment line")
    magic = lines[0].lstrip("#").split()
    if len(magic) != 4 or magic[0] != CSV_MAGIC or not magic[1].startswith("v"):
        raise SchemaError(f"{path}: unrecognized schema line {lines[0]!r}")
    try:
        version = int(magic[1][1:])
    except ValueError as exc:
        raise SchemaError(f"{path}: bad version field {magic[1]!r}") from exc
    if version not in SUPPORTED_VERSIONS:
        raise SchemaError(
            f"{path}: schema version {version} unsupported (supported: {SUPPORTED_VERSIONS})"
        )
    kind, table = magic[2], magic[3]
    if len(lines) < 2 or not lines[1]:
        raise SchemaError(f"{path}: missing header row")
    columns = tuple(lines[1].split(","))
    rows = []
    for line in lines[2:]:
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(columns):
            raise SchemaError(f"{path}: row width {len(cells)} != header {len(columns)}")
        rows.append({c: _convert(v) for c, v in zip(columns, cells)})
    if not rows:
        raise EmptyDataError(f"{path}: no data rows")
    return Table(kind=kind, table=table, version=version, columns=columns, rows=rows, path=str(path))


def expect_table(path, kind: str, table: str) -> Table:
    """Read and insist on a particular (kind, table) pair."""
    parsed = read_table(path)
    if parsed.kind != kind or parsed.table != table:
        raise SchemaError(
            f"{path}: expected {kind}/{table} data, found {parsed.kind}/{parsed.table}"
        )
    return parsed


def read_summary(path) -> dict:
    """Parse a run-summary JSON file, checking its schema version."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("schema_version")
    if version not in SUPPORTED_VERSIONS:
        raise SchemaError(f"{path}: JSON schema version {version} unsupported")
    return payload
