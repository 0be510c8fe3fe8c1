"""Entropy quantities over discrete distributions.

Everything here is a pure function of its inputs.  Distributions are
validated once, on construction, and are read-only afterwards.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BOLTZMANN",
    "DiscreteDistribution",
    "Histogram",
    "LogBase",
    "distribution_from_histogram",
    "info_content",
    "normalized_entropy",
    "renyi_entropy",
    "renyi_entropy_pnorm",
    "shannon_entropy",
    "thermodynamic_entropy",
]

#: Boltzmann constant in J/K (exact SI value).
BOLTZMANN = 1.380649e-23

SUM_TOL = 1e-9
# probabilities below this are treated as exact zeros inside entropy sums
ZERO_CUTOFF = 1e-15


class LogBase(enum.Enum):
    """Logarithm base, which fixes the unit of an entropy value."""

    TWO = 2.0
    E = math.e
    TEN = 10.0

    @property
    def unit(self) -> str:
        return {LogBase.TWO: "bits", LogBase.E: "nats", LogBase.TEN: "hartleys"}[self]

    def log(self, x):
        if self is LogBase.TWO:
            return np.log2(x)
        if self is LogBase.TEN:
            return np.log10(x)
        return np.log(x)

    @classmethod
    def parse(cls, text: str | float | "LogBase") -> "LogBase":
        """Accept ``2``, ``"e"``, ``10`` (or an existing member)."""
        if isinstance(text, LogBase):
            return text
        key = str(text).strip().lower()
        table = {"2": cls.TWO, "2.0": cls.TWO, "e": cls.E, "10": cls.TEN, "10.0": cls.TEN}
        if key not in table:
            raise ValueError(f"log base must be one of 2, e, 10; got {text!r}")
        return table[key]


@dataclass(frozen=True)
class DiscreteDistribution:
    """A normalized probability vector.

    Raises ``ValueError`` on negative entries, an empty vector, or a sum
    further than 1e-9 from one.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size < 1:
            raise ValueError("distribution must have at least one outcome")
        if not np.all(np.isfinite(p)):
            raise ValueError("distribution contains non-finite entries")
        if np.any(p < 0):
            raise ValueError("distribution has negative entries")
        total = p.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {float(total)!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, n: int) -> "DiscreteDistribution":
        return cls(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class Histogram:
    """Bin edges plus integer counts, ``len(counts) == len(edges) - 1``."""

    edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.array(self.edges, dtype=float).ravel()
        counts = np.array(self.counts).ravel()
        if edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("histogram edges must be strictly increasing")
        if counts.size != edges.size - 1:
            raise ValueError(
                f"{edges.size} edges need {edges.size - 1} counts, got {counts.size}"
            )
        if counts.size and (np.any(counts < 0) or np.any(counts != np.round(counts))):
            raise ValueError("histogram counts must be non-negative integers")
        counts = counts.astype(np.int64)
        edges.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def equal_width(cls, low: float, high: float, bins: int) -> "Histogram":
        return cls(np.linspace(low, high, bins + 1), np.zeros(bins, dtype=np.int64))


def _as_dist(d) -> DiscreteDistribution:
    return d if isinstance(d, DiscreteDistribution) else DiscreteDistribution(d)


def _support(d: DiscreteDistribution) -> np.ndarray:
    p = d.probs
    return p[p >= ZERO_CUTOFF]


def _check_renyi_order(alpha: float, allow_zero: bool = True) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ValueError(f"Renyi order must be finite, got {alpha}")
    if alpha == 1.0:
        raise ValueError("Renyi order alpha=1 is undefined; use shannon_entropy")
    if alpha < 0 or (alpha == 0 and not allow_zero):
        raise ValueError(f"Renyi order out of domain: {alpha}")
    return alpha


def _nonneg(x: float) -> float:
    # clears -0.0 and sub-ulp negatives from log(1) style cancellations
    return max(0.0, float(x))


def info_content(p: float, base: LogBase = LogBase.TWO) -> float:
    """Surprise ``-log(p)`` of an outcome with probability ``p``."""
    if not (0.0 < p <= 1.0):
        raise ValueError(f"probability must lie in (0, 1], got {p}")
    if p == 1.0:
        return 0.0
    return float(-LogBase.parse(base).log(p))


def shannon_entropy(d, base: LogBase = LogBase.TWO) -> float:
    """Shannon entropy ``-sum p log p`` with ``0 log 0 = 0``."""
    p = _support(_as_dist(d))
    return _nonneg(-np.sum(p * LogBase.parse(base).log(p)))


def renyi_entropy(d, alpha: float, base: LogBase = LogBase.TWO) -> float:
    """Renyi entropy of order ``alpha`` (``alpha >= 0``, ``alpha != 1``).

    ``alpha = 0`` gives the Hartley entropy, the log of the support size.
    """
    alpha = _check_renyi_order(alpha)
    p = _support(_as_dist(d))
    power_sum = np.sum(p**alpha)
    return _nonneg(LogBase.parse(base).log(power_sum) / (1.0 - alpha))


def renyi_entropy_pnorm(d, alpha: float, base: LogBase = LogBase.TWO) -> float:
    """Renyi entropy written through the alpha-norm of the probability vector.

    ``alpha / (1 - alpha) * log(||p||_alpha)``; numerically equal to
    :func:`renyi_entropy` on every valid input.
    """
    alpha = _check_renyi_order(alpha, allow_zero=False)
    p = _support(_as_dist(d))
    norm = np.sum(p**alpha) ** (1.0 / alpha)
    return _nonneg(alpha / (1.0 - alpha) * LogBase.parse(base).log(norm))


def thermodynamic_entropy(d) -> float:
    """Gibbs entropy ``-k_b sum p ln p`` in J/K."""
    return BOLTZMANN * shannon_entropy(d, LogBase.E)


def normalized_entropy(ds: Iterable, base: LogBase = LogBase.TWO) -> float:
    """Mean Shannon entropy over a non-empty collection of distributions."""
    values = [shannon_entropy(d, base) for d in ds]
    if not values:
        raise ValueError("normalized entropy of an empty collection is undefined")
    return math.fsum(values) / len(values)


def distribution_from_histogram(h: Histogram | Sequence[int]) -> DiscreteDistribution:
    """Normalize histogram counts into a probability vector.

    Accepts a :class:`Histogram` or a bare count sequence.
    """
    counts = h.counts if isinstance(h, Histogram) else np.asarray(h)
    total = counts.sum()
    if total <= 0:
        raise ValueError("histogram has no observations")
    return DiscreteDistribution(counts / total)
