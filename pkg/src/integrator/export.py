"""
Per-path CSV export.
"""
import csv
import logging
from pathlib import Path

from src.integrator.stepper import PathRecord

logger = logging.getLogger(__name__)

PATH_COLUMNS = ["t", "energy_v", "a_l4", "grad_l2", "ito_residual_cum", "cutoff_min"]


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def path_rows(record: PathRecord) -> list:
    return [
        [_fmt(v) for v in row]
        for row in zip(
            record.times,
            record.energy_v,
            record.a_l4,
            record.grad_l2,
            record.ito_residual,
            record.cutoff_min,
        )
    ]


def write_path_csv(record: PathRecord, path: Path, config_hash: str) -> Path:
    """
    Write one path as CSV with a `# config_hash=` comment line ahead of the header.

    Args:
        record: Simulated path
        path: Destination file
        config_hash: Hash of the resolved configuration

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(f"# config_hash={config_hash}\n")
        f.write(f"# path_index={record.path_index} diverged={str(record.diverged).lower()}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(PATH_COLUMNS)
        writer.writerows(path_rows(record))
    logger.debug(f"Wrote {record.n_saved} rows to {path}")
    return path
