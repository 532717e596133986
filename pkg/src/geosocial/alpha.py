"""Comment-count multiplier (alpha) and the adjusted score ``alpha * rating``.

SPs with more reviews than the average are boosted, those with fewer are
damped.  The deviation from the average is normalized separately below and
above it, raised to ``gamma`` with its sign kept, and scaled by ``1/beta``::

    x = (count - avg) / (avg - min)   if count <  avg
    x = (count - avg) / (max - avg)   if count >= avg
    alpha = 1 + sign(x) * |x| ** gamma / beta

A zero denominator (or a single SP) gives alpha = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyInput, InvalidStats, RatingOutOfRange

DEFAULT_BETA = 5.0
DEFAULT_GAMMA = 2.0


@dataclass(frozen=True)
class AlphaParams:
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self) -> None:
        if not (self.beta > 0 and self.gamma > 0):
            raise ValueError(f"beta and gamma must be > 0, got {self.beta!r}, {self.gamma!r}")


@dataclass(frozen=True)
class CountStats:
    min: int
    max: int
    average: float
    n: int

    def validate(self) -> None:
        if self.n < 1 or self.min < 0 or not self.min <= self.average <= self.max:
            raise InvalidStats(f"inconsistent count statistics: {self}")


def count_stats(counts: Sequence[int]) -> CountStats:
    if len(counts) == 0:
        raise EmptyInput("count_stats needs at least one count")
    if any(c < 0 for c in counts):
        raise InvalidStats("counts must be non-negative")
    return CountStats(min(counts), max(counts), math.fsum(counts) / len(counts), len(counts))


def sgnpow(x: float, gamma: float) -> float:
    return math.copysign(abs(x) ** gamma, x) if x != 0 else 0.0


def alpha(count: int, stats: CountStats, params: AlphaParams = AlphaParams()) -> float:
    stats.validate()
    if not stats.min <= count <= stats.max:
        raise InvalidStats(f"count {count} outside [{stats.min}, {stats.max}]")
    if stats.n == 1:
        return 1.0
    if count < stats.average:
        denom = stats.average - stats.min
    else:
        denom = stats.max - stats.average
    if denom == 0:
        return 1.0
    x = (count - stats.average) / denom
    return 1.0 + sgnpow(x, params.gamma) / params.beta


def score_c(alpha_value: float, rating: float) -> float:
    if not 1.0 <= rating <= 5.0:
        raise RatingOutOfRange(f"rating {rating!r} not in [1, 5]")
    return alpha_value * rating
