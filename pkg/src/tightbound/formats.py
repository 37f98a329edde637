"""File formats: confusion-matrix CSV, stable JSON, atomic writes."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .bounds import ConfusionMatrix, ConfusionMatrixError, Violation, validate_confusion

SIG_DIGITS = 12


def parse_confusion_csv(text: str, header: bool = False) -> ConfusionMatrix:
    """Parse ``n`` rows of ``n`` decimal probabilities (rows: signal, columns: decode)."""
    rows = [r for r in csv.reader(text.splitlines()) if any(cell.strip() for cell in r)]
    if header and rows:
        rows = rows[1:]
    values = []
    for i, row in enumerate(rows, start=1):
        try:
            values.append([float(cell) for cell in row])
        except ValueError:
            raise ConfusionMatrixError(
                [Violation("NotSquare", f"row {i}: non-numeric entry in {row!r}")]
            ) from None
    if not values or len({len(r) for r in values}) != 1:
        raise ConfusionMatrixError([Violation("NotSquare", "rows are empty or of unequal length")])
    return validate_confusion(values)


def read_confusion_csv(path, header: bool = False) -> ConfusionMatrix:
    return parse_confusion_csv(Path(path).read_text(encoding="utf-8"), header=header)


def confusion_to_csv(cm: ConfusionMatrix | np.ndarray) -> str:
    joint = cm.joint if isinstance(cm, ConfusionMatrix) else np.asarray(cm)
    return "".join(",".join(f"{v:.17g}" for v in row) + "\n" for row in joint)


def round_floats(obj, digits: int = SIG_DIGITS):
    """Recursively round floats to ``digits`` significant digits."""
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            return v
        return float(f"{v:.{digits}g}") + 0.0
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: insertion key order, floats at 12 significant digits."""
    return json.dumps(round_floats(obj), indent=2, allow_nan=True) + "\n"


def atomic_write(path, text: str) -> None:
    """Write to a temporary file beside ``path`` and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
