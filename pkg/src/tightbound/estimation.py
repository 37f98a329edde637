"""Mutual-information sandwich from raw ``(x, y)`` samples.

The pipeline counts samples, decodes every observed output with the
empirical MAP rule, and reports

    I(X; Xhat) <= I(X; Y) <= H(X) - sum_xhat p(xhat) phi*(eps_xhat)

using plug-in frequencies throughout.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .bounds import ConfusionMatrix, bound_report, validate_confusion

SMALL_BIN = 25
TIE_POLICY = "lowest signal index (first-seen order)"


class EstimationError(ValueError):
    pass


class ParseError(EstimationError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class EmptyInput(EstimationError):
    pass


@dataclass
class SampleBatch:
    """Pair counts with label maps in first-seen order."""

    signal_labels: list[str] = field(default_factory=list)
    output_labels: list[str] = field(default_factory=list)
    counts: Counter = field(default_factory=Counter)

    @property
    def n_samples(self) -> int:
        return sum(self.counts.values())

    def add(self, x, y, k: int = 1) -> None:
        xi = self._index(self.signal_labels, self._signal_index, str(x))
        yi = self._index(self.output_labels, self._output_index, str(y))
        self.counts[(xi, yi)] += k

    def __post_init__(self):
        self._signal_index = {s: i for i, s in enumerate(self.signal_labels)}
        self._output_index = {s: i for i, s in enumerate(self.output_labels)}

    @staticmethod
    def _index(labels, lookup, key):
        idx = lookup.get(key)
        if idx is None:
            idx = lookup[key] = len(labels)
            labels.append(key)
        return idx

    def merge(self, other: "SampleBatch") -> "SampleBatch":
        """Counts of both batches; labels new to ``self`` are appended in ``other``'s order."""
        out = SampleBatch(list(self.signal_labels), list(self.output_labels), Counter(self.counts))
        for (xi, yi), k in other.counts.items():
            out.add(other.signal_labels[xi], other.output_labels[yi], k)
        return out

    def count_matrix(self) -> np.ndarray:
        m = np.zeros((len(self.signal_labels), len(self.output_labels)), dtype=np.int64)
        for (xi, yi), k in self.counts.items():
            m[xi, yi] = k
        return m


@dataclass
class EstimationReport:
    n_samples: int
    n_signals: int
    n_outputs: int
    h_x: float
    i_lower: float
    mi_upper: float
    bound_confusion: float
    bound_kovalevsky: float
    tie_policy: str = TIE_POLICY
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_signals": self.n_signals,
            "n_outputs": self.n_outputs,
            "h_x": self.h_x,
            "i_lower": self.i_lower,
            "mi_upper": self.mi_upper,
            "bound_confusion": self.bound_confusion,
            "bound_kovalevsky": self.bound_kovalevsky,
            "tie_policy": self.tie_policy,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# ingestion


def _records_from_lines(lines: Iterable[str]):
    """Yield ``(line_number, x, y)`` from CSV (header ``x,y``) or JSONL text."""
    fmt = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if fmt is None:
            if line.startswith("{"):
                fmt = "jsonl"
            else:
                fmt = "csv"
                header = next(csv.reader([line]))
                if [h.strip() for h in header] != ["x", "y"]:
                    raise ParseError(lineno, f"expected CSV header 'x,y', got {line!r}")
                continue
        if fmt == "jsonl":
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(rec, dict) or "x" not in rec or "y" not in rec:
                raise ParseError(lineno, "JSON record needs fields 'x' and 'y'")
            yield lineno, rec["x"], rec["y"]
        else:
            row = next(csv.reader([line]))
            if len(row) != 2:
                raise ParseError(lineno, f"expected 2 fields, got {len(row)}")
            yield lineno, row[0].strip(), row[1].strip()


def ingest_samples(source: Iterable) -> SampleBatch:
    """Count samples in one pass.

    ``source`` is either an iterable of text lines (CSV with header ``x,y``
    or JSONL objects with keys ``x`` and ``y``) or an iterable of
    ``(x, y)`` pairs. Memory grows with distinct pairs only.
    """
    batch = SampleBatch()
    it = iter(source)
    first = next(it, None)
    if first is None:
        raise EmptyInput("no samples")

    def chained():
        yield first
        yield from it

    if isinstance(first, str):
        for _, x, y in _records_from_lines(chained()):
            batch.add(x, y)
    else:
        for lineno, rec in enumerate(chained(), start=1):
            try:
                x, y = rec
            except (TypeError, ValueError):
                raise ParseError(lineno, f"expected an (x, y) pair, got {rec!r}") from None
            batch.add(x, y)
    if not batch.counts:
        raise EmptyInput("no samples")
    return batch


def read_samples(path) -> SampleBatch:
    with open(path, encoding="utf-8", newline="") as fh:
        return ingest_samples(fh)


# ---------------------------------------------------------------------------
# decoding and bounds


def empirical_decoder(batch: SampleBatch) -> dict[int, int]:
    """Output index to signal index by the most frequent signal; ties go to the lower index."""
    if not batch.counts:
        raise EmptyInput("no samples")
    m = batch.count_matrix()
    return {y: int(np.argmax(m[:, y])) for y in range(m.shape[1])}


def empirical_confusion(batch: SampleBatch) -> ConfusionMatrix:
    m = batch.count_matrix()
    g = empirical_decoder(batch)
    n = m.shape[0]
    counts = np.zeros((n, n), dtype=np.int64)
    for y, xh in g.items():
        counts[:, xh] += m[:, y]
    return validate_confusion(counts / counts.sum())


def decode_bin_sizes(batch: SampleBatch) -> np.ndarray:
    m = batch.count_matrix()
    sizes = np.zeros(m.shape[0], dtype=np.int64)
    for y, xh in empirical_decoder(batch).items():
        sizes[xh] += m[:, y].sum()
    return sizes


def estimate(batch: SampleBatch) -> EstimationReport:
    cm = empirical_confusion(batch)
    rep = bound_report(cm)
    warnings = []
    for xh, size in enumerate(decode_bin_sizes(batch)):
        if 0 < size < SMALL_BIN:
            warnings.append(
                f"decode {batch.signal_labels[xh]!r} has {int(size)} samples (< {SMALL_BIN}); plug-in estimates unreliable"
            )
    return EstimationReport(
        n_samples=batch.n_samples,
        n_signals=len(batch.signal_labels),
        n_outputs=len(batch.output_labels),
        h_x=rep.h_x,
        i_lower=rep.i_x_xhat,
        mi_upper=rep.mi_upper,
        bound_confusion=rep.bound_confusion,
        bound_kovalevsky=rep.bound_kovalevsky,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# synthetic data


def strict_map_blend(ach, cm: ConfusionMatrix, weight: float = 0.5) -> tuple[np.ndarray, list[int]]:
    """Joint ``p(x, y)`` whose every output has its decode as the *unique* posterior maximum.

    Each flat column of the achieving channel ``ach`` is mixed with
    ``weight`` times its fiber's conditional ``p(x | xhat)``. Row sums, and
    hence the confusion matrix, stay those of ``cm``; the decode becomes a
    strict maximum wherever ``cm`` is strictly column-dominant. Needed for
    sampling: flat posteriors tie, so an empirical decoder would pick
    arbitrary members of the tie.
    """
    cols, decodes = [], []
    for f in ach.fibers:
        cond = cm.conditional(f.xhat)
        for c in f.columns:
            mixed = (1 - weight) * c.masses(ach.n) + weight * c.weight * cond
            cols.append(ach.p_hat[f.xhat] * mixed)
            decodes.append(f.xhat)
    return np.column_stack(cols), decodes


def sample_records(joint: np.ndarray, n_samples: int, seed: int, signal_labels=None, output_labels=None):
    """Draw ``n_samples`` labelled ``(x, y)`` pairs from ``joint`` with a seeded generator."""
    joint = np.asarray(joint, dtype=float)
    nx, ny = joint.shape
    signal_labels = signal_labels or [str(i + 1) for i in range(nx)]
    output_labels = output_labels or [f"y{j}" for j in range(ny)]
    rng = np.random.default_rng(seed)
    flat = rng.choice(nx * ny, size=n_samples, p=(joint / joint.sum()).ravel())
    xs, ys = np.divmod(flat, ny)
    return [(signal_labels[x], output_labels[y]) for x, y in zip(xs, ys)]
