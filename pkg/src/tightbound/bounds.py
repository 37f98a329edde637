"""Confusion-matrix data model and closed-form equivocation bounds.

All entropies are in bits. A confusion matrix is the joint distribution
``joint[x, xhat] = p(X = x, Xhat = xhat)`` of true signals (rows) and
maximum a posteriori decodes (columns).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SUM_TOL = 1e-9
MAP_TOL = 1e-9
# Pushes floating-point images of exact knots (e.g. 1/(1 - 2/3)) onto the integer.
KNOT_GUARD = 1e-12


class DomainError(ValueError):
    """An error probability outside ``[0, 1)``."""


@dataclass(frozen=True)
class Violation:
    kind: str  # NotSquare | NotFinite | NegativeEntry | NotNormalized | NotMapConsistent
    message: str
    column: int | None = None


class ConfusionMatrixError(ValueError):
    """Raised by :func:`validate_confusion`; carries every violated invariant."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))

    @property
    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Validated joint distribution of signals and MAP decodes.

    Build instances through :func:`validate_confusion`; the array is made
    read-only so values can be shared freely.
    """

    joint: np.ndarray

    @property
    def n(self) -> int:
        return self.joint.shape[0]

    def conditional(self, xhat: int) -> np.ndarray:
        """Column ``xhat`` normalized to ``p(x | xhat)``."""
        col = self.joint[:, xhat]
        return col / col.sum()

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return np.array_equal(self.joint, other.joint)

    def __hash__(self):
        return hash(self.joint.tobytes())


@dataclass(frozen=True)
class DecodeProfile:
    p_hat: np.ndarray
    eps: np.ndarray  # NaN where the decode never occurs
    empty: np.ndarray  # True where p(xhat) == 0

    def active(self) -> list[int]:
        return [i for i in range(len(self.p_hat)) if not self.empty[i]]


@dataclass(frozen=True)
class BoundReport:
    h_x: float
    h_x_given_xhat: float
    i_x_xhat: float
    bound_confusion: float
    bound_kovalevsky: float
    overall_eps: float
    mi_upper: float

    def as_dict(self) -> dict[str, float]:
        return {
            "h_x": self.h_x,
            "h_x_given_xhat": self.h_x_given_xhat,
            "i_x_xhat": self.i_x_xhat,
            "bound_confusion": self.bound_confusion,
            "bound_kovalevsky": self.bound_kovalevsky,
            "overall_eps": self.overall_eps,
            "mi_upper": self.mi_upper,
        }


# ---------------------------------------------------------------------------
# scalar functions of the error probability


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not (0.0 <= eps < 1.0):
        raise DomainError(f"error probability must lie in [0, 1), got {eps!r}")
    return eps


def admissible_lengths(eps: float) -> tuple[int, int]:
    """Floor and ceiling of ``1/(1 - eps)``, with knots snapped to integers."""
    eps = _check_eps(eps)
    r = 1.0 / (1.0 - eps)
    low = math.floor(r + KNOT_GUARD)
    high = low if r - low < KNOT_GUARD else low + 1
    return low, high


def alpha_coeff(eps: float) -> float:
    """Probability weight carried by the shorter admissible length.

    Zero whenever ``1/(1 - eps)`` is an integer: both lengths then coincide
    and all weight sits on that single length (see :func:`length_profile`).
    """
    low, high = admissible_lengths(eps)
    a = low * ((1.0 - eps) * high - 1.0)
    return min(max(a, 0.0), 1.0)


def phi_star(eps: float) -> float:
    """Minimum entropy (bits) of any distribution whose largest mass is ``1 - eps``.

    Piecewise linear interpolation of ``-log2(1 - eps)`` between the knots
    ``eps = (k - 1)/k``.
    """
    low, high = admissible_lengths(eps)
    a = alpha_coeff(eps)
    return a * math.log2(low) + (1.0 - a) * math.log2(high)


def length_profile(eps: float) -> dict[int, float]:
    """Total weight per flat-posterior length at the equivocation minimum."""
    low, high = admissible_lengths(eps)
    if low == high:
        return {low: 1.0}
    a = alpha_coeff(eps)
    return {low: a, high: 1.0 - a}


# ---------------------------------------------------------------------------
# confusion matrices


def validate_confusion(raw, sum_tol: float = SUM_TOL, map_tol: float = MAP_TOL) -> ConfusionMatrix:
    """Check ``raw`` against every confusion-matrix invariant.

    Raises :class:`ConfusionMatrixError` listing all violations at once.
    """
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfusionMatrixError([Violation("NotSquare", f"not a numeric matrix: {exc}")]) from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ConfusionMatrixError(
            [Violation("NotSquare", f"expected a nonempty square matrix, got shape {arr.shape}")]
        )
    if not np.all(np.isfinite(arr)):
        raise ConfusionMatrixError([Violation("NotFinite", "matrix contains NaN or infinite entries")])

    violations = []
    neg = np.argwhere(arr < 0)
    for x, xh in neg:
        violations.append(
            Violation("NegativeEntry", f"negative entry {arr[x, xh]:g} at row {x}, column {xh}", int(xh))
        )
    total = arr.sum()
    if abs(total - 1.0) > sum_tol:
        violations.append(Violation("NotNormalized", f"entries sum to {total:.12g}, expected 1"))
    for xh in range(arr.shape[1]):
        col = arr[:, xh]
        worst = int(np.argmax(col))
        if col[worst] > col[xh] + map_tol:
            violations.append(
                Violation(
                    "NotMapConsistent",
                    f"column {xh}: entry {col[worst]:.12g} at row {worst} exceeds diagonal {col[xh]:.12g}",
                    xh,
                )
            )
    if violations:
        raise ConfusionMatrixError(violations)

    arr.setflags(write=False)
    cm = ConfusionMatrix(arr)
    # Column dominance implies this; kept as a cheap guard against tolerance games.
    n = cm.n
    prof = decode_profile(cm)
    for xh in prof.active():
        if prof.eps[xh] > (n - 1) / n + 2 * map_tol / prof.p_hat[xh]:
            raise ConfusionMatrixError(
                [Violation("NotMapConsistent", f"column {xh}: error rate {prof.eps[xh]:.12g} exceeds (n-1)/n", xh)]
            )
    return cm


def decode_profile(cm: ConfusionMatrix) -> DecodeProfile:
    p_hat = cm.joint.sum(axis=0)
    empty = p_hat <= 0.0
    eps = np.full(cm.n, np.nan)
    for xh in range(cm.n):
        if not empty[xh]:
            eps[xh] = 1.0 - cm.joint[xh, xh] / p_hat[xh]
    # rounding can leave -1e-17 on error-free columns
    eps = np.where(empty, np.nan, np.clip(eps, 0.0, None))
    return DecodeProfile(p_hat=p_hat, eps=eps, empty=empty)


def equivocation_bound(cm: ConfusionMatrix) -> float:
    """Tight lower bound on ``H(X|Y)`` given the MAP confusion matrix."""
    prof = decode_profile(cm)
    return float(sum(prof.p_hat[xh] * phi_star(prof.eps[xh]) for xh in prof.active()))


def overall_error(cm: ConfusionMatrix) -> float:
    return float(max(0.0, 1.0 - np.trace(cm.joint)))


def kovalevsky_bound(cm: ConfusionMatrix) -> float:
    """Lower bound on ``H(X|Y)`` from the overall error probability alone."""
    return phi_star(overall_error(cm))


def entropy(p) -> float:
    """Shannon entropy in bits with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def entropies(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """``(H(X), H(X|Xhat), I(X;Xhat))`` in bits."""
    h_x = entropy(cm.joint.sum(axis=1))
    h_joint = entropy(cm.joint)
    h_xhat = entropy(cm.joint.sum(axis=0))
    h_cond = max(h_joint - h_xhat, 0.0)
    return h_x, h_cond, max(h_x - h_cond, 0.0)


def bound_report(cm: ConfusionMatrix) -> BoundReport:
    h_x, h_cond, mi = entropies(cm)
    ours = equivocation_bound(cm)
    return BoundReport(
        h_x=h_x,
        h_x_given_xhat=h_cond,
        i_x_xhat=mi,
        bound_confusion=ours,
        bound_kovalevsky=kovalevsky_bound(cm),
        overall_eps=overall_error(cm),
        mi_upper=h_x - ours,
    )
