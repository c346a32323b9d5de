from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PredictionInterval:
    """An interval with explicit endpoint openness.

    ``branch`` records which construction produced the bound when more than one
    is possible (``"positive"`` or ``"fallback"`` for the nonnegative-response
    interval); it is ``None`` otherwise.
    """

    lower: float
    upper: float
    lower_open: bool
    upper_open: bool
    alpha: float
    branch: str | None = None

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    @property
    def degenerate(self) -> bool:
        """True when the interval has zero length."""
        return self.upper == self.lower

    @property
    def empty(self) -> bool:
        return self.degenerate and (self.lower_open or self.upper_open)

    def contains(self, y: float) -> bool:
        above = y > self.lower if self.lower_open else y >= self.lower
        below = y < self.upper if self.upper_open else y <= self.upper
        return above and below

    def __str__(self):
        left = "(" if self.lower_open else "["
        right = ")" if self.upper_open else "]"
        return f"{left}{_fmt(self.lower)}, {_fmt(self.upper)}{right}"


def _fmt(value):
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return f"{value:.6g}"
