"""Explicit channel distributions that attain the equivocation bound.

For every decode value the outputs ``y`` that decode to it form a *fiber*.
Within a fiber a column is the unnormalized joint ``p(x, y | xhat)``; the
minimizer only ever needs columns whose posterior ``p(x | y)`` is flat, so
those are stored compactly as a support set plus a weight ``p(y | xhat)``.

Two moves drive the minimization, both of which keep every row sum
``p(x | xhat)`` and the MAP property intact while lowering the fiber's
weighted entropy:

* ``flatten_column`` splits an arbitrary column into nested flat columns;
* ``balance_step`` moves one signal from the longest column to the
  shortest one until lengths differ by at most one.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bounds import (
    ConfusionMatrix,
    decode_profile,
    length_profile,
    validate_confusion,
)

FLAT_RTOL = 1e-12
# below this relative weight a column is treated as empty
WEIGHT_ATOL = 1e-15


class ChannelError(RuntimeError):
    pass


class ZeroProbabilityDecode(ChannelError):
    pass


class NotFlat(ChannelError):
    pass


class IterationCapExceeded(ChannelError):
    pass


@dataclass(frozen=True)
class FlatColumn:
    support: tuple[int, ...]
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(sorted(self.support)))

    @property
    def length(self) -> int:
        return len(self.support)

    def masses(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[list(self.support)] = self.weight / self.length
        return out


@dataclass(frozen=True)
class GeneralColumn:
    masses: np.ndarray

    @property
    def weight(self) -> float:
        return float(self.masses.sum())


@dataclass
class Fiber:
    xhat: int
    columns: list
    target_row_sums: np.ndarray

    @property
    def n(self) -> int:
        return len(self.target_row_sums)

    @property
    def is_flat(self) -> bool:
        return all(isinstance(c, FlatColumn) for c in self.columns)

    def row_sums(self) -> np.ndarray:
        total = np.zeros(self.n)
        for col in self.columns:
            total += col.masses if isinstance(col, GeneralColumn) else col.masses(self.n)
        return total

    def total_weight(self) -> float:
        return sum(c.weight for c in self.columns)

    def weight_by_length(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for col in self._flat_columns():
            out[col.length] = out.get(col.length, 0.0) + col.weight
        return dict(sorted(out.items()))

    def _flat_columns(self) -> list[FlatColumn]:
        if not self.is_flat:
            raise NotFlat(f"fiber {self.xhat} still holds non-flat columns")
        return self.columns


@dataclass
class AchievingChannel:
    p_hat: np.ndarray
    fibers: list[Fiber] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.p_hat)

    def equivocation(self) -> float:
        """``H(X|Y)`` of the channel in bits."""
        return float(sum(self.p_hat[f.xhat] * fiber_equivocation(f) for f in self.fibers))

    def output_columns(self) -> list[tuple[int, FlatColumn]]:
        """Every channel output as ``(decode, column)`` in a fixed order."""
        return [(f.xhat, col) for f in self.fibers for col in f.columns]

    def joint(self) -> np.ndarray:
        """``p(x, y)`` as an ``n x |Y|`` matrix, outputs ordered as :meth:`output_columns`."""
        cols = [self.p_hat[xh] * col.masses(self.n) for xh, col in self.output_columns()]
        if not cols:
            return np.zeros((self.n, 0))
        return np.column_stack(cols)

    def decodes(self) -> list[int]:
        return [xh for xh, _ in self.output_columns()]

    def to_dict(self) -> dict:
        return {
            "p_hat": [float(v) for v in self.p_hat],
            "fibers": [
                {
                    "xhat": f.xhat,
                    "columns": [{"support": list(c.support), "weight": c.weight} for c in f.columns],
                }
                for f in self.fibers
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AchievingChannel":
        p_hat = np.asarray(data["p_hat"], dtype=float)
        fibers = []
        for fd in data["fibers"]:
            xh = int(fd["xhat"])
            cols = [FlatColumn(tuple(int(i) for i in c["support"]), float(c["weight"])) for c in fd["columns"]]
            fib = Fiber(xh, cols, np.zeros(len(p_hat)))
            fib.target_row_sums = fib.row_sums()
            fibers.append(fib)
        return cls(p_hat=p_hat, fibers=fibers)


# ---------------------------------------------------------------------------
# entropy helpers


def _flat_gain(t: int) -> float:
    """``t log t - (t-1) log(t-1)``; increasing for ``t >= 1``."""
    if t <= 1:
        return 0.0
    return t * math.log2(t) - (t - 1) * math.log2(t - 1)


def column_entropy(masses: np.ndarray) -> float:
    """Weighted entropy ``p(y|xhat) H(X | Y = y)`` of an unnormalized column."""
    w = masses.sum()
    if w <= 0:
        return 0.0
    p = masses[masses > 0] / w
    return float(-w * (p * np.log2(p)).sum())


def fiber_equivocation(fiber: Fiber) -> float:
    """Sum over columns of ``weight * log2(length)``."""
    return float(sum(c.weight * math.log2(c.length) for c in fiber._flat_columns()))


# ---------------------------------------------------------------------------
# rule A: flattening


def _is_flat(masses: np.ndarray) -> bool:
    nz = masses[masses > 0]
    if nz.size == 0:
        return True
    return nz.max() - nz.min() < FLAT_RTOL * nz.max()


def flatten_column(col: GeneralColumn, xhat: int) -> list[FlatColumn]:
    """Split ``col`` into nested flat columns with the same row masses.

    Signals are ranked by decreasing mass (``xhat`` first, remaining ties by
    index); output ``i`` covers the top ``i`` signals and carries weight
    ``i * (m_i - m_{i+1})``.
    """
    masses = np.asarray(col.masses, dtype=float)
    total = masses.sum()
    if total <= 0:
        return []
    if _is_flat(masses):
        return [FlatColumn(tuple(int(i) for i in np.flatnonzero(masses > 0)), float(total))]

    others = sorted((i for i in range(len(masses)) if i != xhat), key=lambda i: (-masses[i], i))
    order = [xhat] + others
    m = masses[order]
    out = []
    for i in range(len(order)):
        nxt = m[i + 1] if i + 1 < len(order) else 0.0
        w = (i + 1) * (m[i] - nxt)
        if w > WEIGHT_ATOL * total:
            out.append(FlatColumn(tuple(order[: i + 1]), float(w)))
    return out


# ---------------------------------------------------------------------------
# rule B: balancing lengths


class BalanceResult(NamedTuple):
    fiber: Fiber
    changed: bool
    delta: float  # predicted change in fiber equivocation


def merge_columns(columns: Iterable[FlatColumn], total: float = 1.0) -> list[FlatColumn]:
    """Sum weights of columns sharing a support; drop empty ones."""
    acc: dict[tuple[int, ...], float] = {}
    for c in columns:
        acc[c.support] = acc.get(c.support, 0.0) + c.weight
    return [FlatColumn(s, w) for s, w in acc.items() if w > WEIGHT_ATOL * total]


def balance_step(fiber: Fiber) -> BalanceResult:
    """Apply one balancing move.

    Returns the new fiber, whether anything changed, and the predicted
    change in fiber equivocation ``(w/a) * (f(b+1) - f(a))`` where ``w`` is
    the weight of the long column taking part in the move.
    """
    cols = fiber._flat_columns()
    if not cols:
        return BalanceResult(fiber, False, 0.0)
    lengths = [c.length for c in cols]
    i_long = lengths.index(max(lengths))
    i_short = lengths.index(min(lengths))
    long_col, short_col = cols[i_long], cols[i_short]
    a, b = long_col.length, short_col.length
    if a - b <= 1:
        return BalanceResult(fiber, False, 0.0)

    # per-signal mass in each column; the move needs them equal
    u_long = long_col.weight / a
    u_short = short_col.weight / b
    leftovers = []
    if math.isclose(u_long, u_short, rel_tol=1e-13):
        w_long, w_short = long_col.weight, short_col.weight
    elif u_long > u_short:
        w_short = short_col.weight
        w_long = a * u_short
        leftovers.append(FlatColumn(long_col.support, long_col.weight - w_long))
    else:
        w_long = long_col.weight
        w_short = b * u_long
        leftovers.append(FlatColumn(short_col.support, short_col.weight - w_short))

    moved = max(set(long_col.support) - set(short_col.support))
    new_long = FlatColumn(tuple(s for s in long_col.support if s != moved), w_long * (a - 1) / a)
    new_short = FlatColumn(short_col.support + (moved,), w_short * (b + 1) / b)

    rest = [c for k, c in enumerate(cols) if k not in (i_long, i_short)]
    merged = merge_columns(rest + leftovers + [new_long, new_short], total=fiber.total_weight())
    delta = (w_long / a) * (_flat_gain(b + 1) - _flat_gain(a))
    return BalanceResult(Fiber(fiber.xhat, merged, fiber.target_row_sums), True, delta)


# ---------------------------------------------------------------------------
# fiber and channel construction


def init_fiber(cm: ConfusionMatrix, xhat: int) -> Fiber:
    """Single column equal to ``p(x | xhat)``; always feasible under MAP."""
    p = cm.joint[:, xhat].sum()
    if p <= 0:
        raise ZeroProbabilityDecode(f"decode {xhat} has zero probability")
    cond = np.array(cm.joint[:, xhat] / p)
    col = GeneralColumn(cond.copy())
    if _is_flat(cond) and cond[xhat] > 0:
        col = FlatColumn(tuple(int(i) for i in np.flatnonzero(cond > 0)), 1.0)
    return Fiber(xhat, [col], cond)


def iteration_cap(n: int) -> int:
    return 10 * n * n


def minimize_fiber(cm: ConfusionMatrix, xhat: int, max_steps: int | None = None) -> Fiber:
    fiber = init_fiber(cm, xhat)
    eps = decode_profile(cm).eps[xhat]
    if eps == 0.0:
        return Fiber(xhat, [FlatColumn((xhat,), 1.0)], fiber.target_row_sums)

    flat: list[FlatColumn] = []
    for col in fiber.columns:
        flat.extend(flatten_column(col, xhat) if isinstance(col, GeneralColumn) else [col])
    fiber = Fiber(xhat, merge_columns(flat), fiber.target_row_sums)

    cap = iteration_cap(cm.n) if max_steps is None else max_steps
    for _ in range(cap):
        fiber, changed, _ = balance_step(fiber)
        if not changed:
            return fiber
    lengths = {c.length for c in fiber.columns}
    if max(lengths) - min(lengths) <= 1:
        return fiber
    raise IterationCapExceeded(f"fiber {xhat} not balanced after {cap} steps (lengths {sorted(lengths)})")


def build_achieving_channel(cm: ConfusionMatrix) -> AchievingChannel:
    prof = decode_profile(cm)
    fibers = [minimize_fiber(cm, xh) for xh in prof.active()]
    return AchievingChannel(p_hat=prof.p_hat.copy(), fibers=fibers)


def induced_confusion(ch: AchievingChannel) -> ConfusionMatrix:
    joint = np.zeros((ch.n, ch.n))
    for f in ch.fibers:
        joint[:, f.xhat] = ch.p_hat[f.xhat] * f.row_sums()
    return validate_confusion(joint)


def expected_length_profile(cm: ConfusionMatrix, xhat: int) -> dict[int, float]:
    return length_profile(decode_profile(cm).eps[xhat])


def length_profile_error(fiber: Fiber, expected: dict[int, float]) -> float:
    """Largest absolute gap between achieved and expected weight per length."""
    got = fiber.weight_by_length()
    keys = set(got) | set(expected)
    return max(abs(got.get(k, 0.0) - expected.get(k, 0.0)) for k in keys)


def map_margin(fiber: Fiber) -> float:
    """Smallest ``m[xhat] - max(m)`` over the fiber's columns; ``>= 0`` when MAP holds."""
    worst = math.inf
    for col in fiber.columns:
        m = col.masses if isinstance(col, GeneralColumn) else col.masses(fiber.n)
        worst = min(worst, m[fiber.xhat] - m.max())
    return worst
