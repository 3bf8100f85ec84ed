"""
Structured-text run reports.

A report is a list of `key = value` lines followed by CSV blocks:

    [csv ensemble]
    t,mean_energy_v,...
    ...
    [end]

Everything time-dependent (timestamps, host, versions) goes to a separate
metadata.json so that rerunning a manifest reproduces the report bytes.
"""
import csv
import io
import json
import logging
import platform
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
import scipy

logger = logging.getLogger(__name__)


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    if value is None:
        return "none"
    return str(value)


class Report:
    """Accumulates key-value pairs and CSV tables, then renders them in insertion order."""

    def __init__(self, title: str):
        self.title = title
        self.entries: List[Tuple[str, str]] = []
        self.tables: List[Tuple[str, List[str], List[List[str]]]] = []

    def add(self, key: str, value) -> None:
        self.entries.append((key, format_value(value)))

    def update(self, values: Mapping, prefix: str = "") -> None:
        for key, value in values.items():
            self.add(f"{prefix}{key}", value)

    def add_table(self, name: str, columns: Mapping[str, Sequence]) -> None:
        """Add a CSV block from equal-length named columns."""
        header = list(columns)
        cols = [list(v) for v in columns.values()]
        rows = [[format_value(v) for v in row] for row in zip(*cols)]
        self.tables.append((name, header, rows))

    def add_rows(self, name: str, rows: Sequence[Mapping]) -> None:
        """Add a CSV block from a list of dicts sharing keys."""
        if not rows:
            self.tables.append((name, [], []))
            return
        header = list(rows[0])
        self.tables.append((name, header, [[format_value(r[k]) for k in header] for r in rows]))

    def render(self) -> str:
        out = io.StringIO()
        out.write(f"# {self.title}\n")
        for key, value in self.entries:
            out.write(f"{key} = {value}\n")
        for name, header, rows in self.tables:
            out.write(f"\n[csv {name}]\n")
            writer = csv.writer(out, lineterminator="\n")
            if header:
                writer.writerow(header)
            writer.writerows(rows)
            out.write("[end]\n")
        return out.getvalue()

    def write(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")
        logger.info(f"Report written to {path}")
        return path


def parse_report(text: str) -> Tuple[Dict[str, str], Dict[str, List[Dict[str, str]]]]:
    """Read a rendered report back into (key-values, {table name: rows})."""
    values: Dict[str, str] = {}
    tables: Dict[str, List[Dict[str, str]]] = {}
    lines = iter(text.splitlines())
    for line in lines:
        if not line or line.startswith("#"):
            continue
        if line.startswith("[csv ") and line.endswith("]"):
            name = line[5:-1]
            block = []
            for row in lines:
                if row == "[end]":
                    break
                block.append(row)
            tables[name] = list(csv.DictReader(block))
            continue
        key, _, value = line.partition(" = ")
        values[key] = value
    return values, tables


def write_metadata(path: Path, started: datetime, manifest, extra: Mapping = None) -> Path:
    """Timestamps, host and library versions of a run."""
    metadata = {
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "config_path": str(manifest.config_path),
        "config_hash": manifest.config_hash,
        "seed": manifest.seed,
        "kind": manifest.kind,
        "workers": manifest.workers,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
    }
    if extra:
        metadata.update(extra)
    path = Path(path)
    path.write_text(json.dumps(metadata, indent=2, default=str), encoding="utf-8")
    return path
