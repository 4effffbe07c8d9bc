"""
Results CSV and run manifest serialization
"""
import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from .exceptions import ModelFormatError
from .results import ResultSet

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.17g"


def _fmt(value: float) -> str:
    return FLOAT_FORMAT % value


def write_results_csv(path: PathLike, results: ResultSet) -> None:
    """Write time and per-wire pressure and flow columns in CGS"""
    header = ["time"]
    for label in results.wire_labels:
        header.extend([f"{label}:pressure", f"{label}:flow"])
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for i, t in enumerate(results.time):
            row = [_fmt(t)]
            for k in range(len(results.wire_ids)):
                row.extend([_fmt(results.pressure[i, k]), _fmt(results.flow[i, k])])
            writer.writerow(row)
    logger.info(f"Wrote {len(results.time)} time steps to {path}")


@dataclass
class ResultsTable:
    """Columns of a results CSV"""
    time: np.ndarray
    pressure: Dict[str, np.ndarray]
    flow: Dict[str, np.ndarray]

    @property
    def n_t(self) -> int:
        return self.time.size

    @property
    def labels(self) -> List[str]:
        return list(self.pressure)


def read_results_csv(path: PathLike) -> ResultsTable:
    """
    Parse a results CSV

    Raises:
        ModelFormatError: On unreadable files or malformed columns
    """
    try:
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise ModelFormatError(path, f"cannot read file ({e.strerror})")
    if not rows or not rows[0] or rows[0][0] != "time":
        raise ModelFormatError(path, "line 1: header must start with 'time'")
    header = rows[0]
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    except ValueError as e:
        raise ModelFormatError(path, f"non-numeric value: {e}")
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ModelFormatError(path, "rows and header differ in column count")

    pressure: Dict[str, np.ndarray] = {}
    flow: Dict[str, np.ndarray] = {}
    for col, name in enumerate(header[1:], start=1):
        label, _, quantity = name.rpartition(":")
        if quantity == "pressure":
            pressure[label] = data[:, col]
        elif quantity == "flow":
            flow[label] = data[:, col]
        else:
            raise ModelFormatError(path, f"line 1: column '{name}' is not '<wire>:pressure' or '<wire>:flow'")
    if set(pressure) != set(flow):
        raise ModelFormatError(path, "every wire needs a pressure and a flow column")
    return ResultsTable(time=data[:, 0], pressure=pressure, flow=flow)


def write_manifest(path: PathLike, manifest: Dict[str, Any]) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path: PathLike) -> Dict[str, Any]:
    return json.loads(Path(path).read_text())
