"""Margin loss family, p-norm hinge loss, and the generalization-bound evaluator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError


@dataclass(frozen=True)
class MarginLossParams:
    p: float
    rho: float

    def __post_init__(self):
        if self.p < 1.0:
            raise InvalidInputError(f"p must be >= 1, got {self.p}")
        if self.rho <= 0.0:
            raise InvalidInputError(f"rho must be positive, got {self.rho}")


def phi(params: MarginLossParams, x):
    """Clipped margin loss: 1 for x <= 0, (1 - x/rho)^p on [0, rho], 0 beyond.

    The middle branch is evaluated as exp(p * log(1 - x/rho)) with the
    base -> 0+ limit mapped to exact 0, so phi(rho) == 0.0.
    """
    p, rho = params.p, params.rho
    x = np.asarray(x, dtype=np.float64)
    base = 1.0 - x / rho
    mid = np.zeros_like(base)
    pos = base > 0.0
    with np.errstate(divide="ignore"):
        mid[pos] = np.exp(p * np.log(base[pos]))
    out = np.where(x <= 0.0, 1.0, np.where(x >= rho, 0.0, mid))
    if out.ndim == 0:
        return float(out)
    return out


def empirical_margin_loss(params: MarginLossParams, scores) -> float:
    """Mean of phi over the margin scores y_i * h(x_i)."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise InvalidInputError("empirical margin loss needs at least one score")
    return float(np.mean(phi(params, scores)))


def pnorm_hinge_sum(p: float, margins) -> float:
    """Sum_i max(0, 1 - margin_i)^p."""
    margins = np.asarray(margins, dtype=np.float64)
    slack = np.maximum(0.0, 1.0 - margins)
    return float(np.sum(slack**p))


def generalization_bound(params: MarginLossParams, empirical: float, r: float,
                         m: int, delta: float) -> float:
    """High-probability upper bound on the generalization margin loss.

    Returns empirical + 4p*sqrt((r^2/rho^2)/m) + sqrt(log(log2(2r/rho))/m)
    + sqrt(log(2/delta)/(2m)). Requires 0 < rho <= r so the iterated log is
    defined (rho == r gives an exactly-zero third term).
    """
    p, rho = params.p, params.rho
    if r <= 0.0:
        raise InvalidInputError(f"r must be positive, got {r}")
    if rho > r:
        raise InvalidInputError(f"rho must satisfy rho <= r, got rho={rho}, r={r}")
    if not (0.0 < delta < 1.0):
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta}")
    if m < 1:
        raise InvalidInputError(f"m must be a positive integer, got {m}")
    if empirical < 0.0:
        raise InvalidInputError(f"empirical loss must be >= 0, got {empirical}")
    complexity = 4.0 * p * math.sqrt((r * r) / (rho * rho) / m)
    iterated = math.sqrt(math.log(math.log2(2.0 * r / rho)) / m)
    confidence = math.sqrt(math.log(2.0 / delta) / (2.0 * m))
    return empirical + complexity + iterated + confidence
