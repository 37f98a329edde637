"""Tight confusion-matrix bounds on equivocation and mutual information."""

from .bounds import (
    BoundReport,
    ConfusionMatrix,
    ConfusionMatrixError,
    DecodeProfile,
    DomainError,
    admissible_lengths,
    alpha_coeff,
    bound_report,
    decode_profile,
    entropies,
    equivocation_bound,
    kovalevsky_bound,
    length_profile,
    phi_star,
    validate_confusion,
)
from .channel import (
    AchievingChannel,
    Fiber,
    FlatColumn,
    GeneralColumn,
    balance_step,
    build_achieving_channel,
    fiber_equivocation,
    flatten_column,
    induced_confusion,
    init_fiber,
    minimize_fiber,
)

__version__ = "0.1.0"
