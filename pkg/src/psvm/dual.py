"""Derived dual constants, the dual objective, feasibility, and the primal diagnostic.

The dual problem maximizes

    sum_i a_i - theta * sum_i a_i^gamma - 1/2 * sum_ij a_i a_j y_i y_j K_ij

over a >= 0 with sum_i a_i y_i = 0, where gamma = p/(p-1) and
theta = C^(1-gamma) * p^(-gamma) * (p-1). p = 1 is a separate solver mode
(gamma diverges): the theta term vanishes and alpha has no upper bound,
i.e. the classic dual with C = +infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError
from .losses import pnorm_hinge_sum

DEFAULT_EPS = 1e-5
DEFAULT_MAX_ITER = 1000
DEFAULT_SEED = 42
SV_THRESHOLD = 1e-8
KKT_TOL = 1e-3


def derive_gamma_theta(p: float, C: float) -> tuple[float, float]:
    """Dual constants gamma = p/(p-1) > 1 and theta = C^(1-gamma) p^(-gamma) (p-1) >= 0."""
    if p <= 1.0:
        raise InvalidInputError(f"gamma/theta are defined for p > 1 only, got p={p}")
    if C <= 0.0:
        raise InvalidInputError(f"C must be positive, got {C}")
    gamma = p / (p - 1.0)
    try:
        theta = C ** (1.0 - gamma) * p ** (-gamma) * (p - 1.0)
    except OverflowError:
        theta = math.inf
    if not (math.isfinite(gamma) and math.isfinite(theta)):
        raise InvalidInputError(
            f"derived constants overflow for p={p}, C={C} (p too close to 1 with C < 1)")
    return gamma, theta


@dataclass(frozen=True)
class Hyperparams:
    """One training run's knobs plus the derived dual constants.

    gamma and theta are filled in from (p, C) unless given explicitly (the
    explicit form exists for the theta-forced-to-zero reduction checks).
    For p = 1 both stay None and the solver runs in hard-margin mode.
    """

    p: float
    C: float
    eps: float = DEFAULT_EPS
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = DEFAULT_SEED
    gamma: float | None = None
    theta: float | None = None

    def __post_init__(self):
        if self.p < 1.0:
            raise InvalidInputError(f"p must be >= 1, got {self.p}")
        if self.C <= 0.0:
            raise InvalidInputError(f"C must be positive, got {self.C}")
        if self.eps <= 0.0:
            raise InvalidInputError(f"eps must be positive, got {self.eps}")
        if self.max_iter < 1:
            raise InvalidInputError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.p == 1.0:
            if self.gamma is not None or self.theta is not None:
                raise InvalidInputError("p = 1 mode has no gamma/theta")
            return
        if self.gamma is None and self.theta is None:
            g, t = derive_gamma_theta(self.p, self.C)
            object.__setattr__(self, "gamma", g)
            object.__setattr__(self, "theta", t)
        elif self.gamma is None or self.theta is None:
            raise InvalidInputError("override gamma and theta together or not at all")
        elif self.theta < 0.0 or self.gamma <= 1.0:
            raise InvalidInputError("need gamma > 1 and theta >= 0")

    @property
    def hard_margin(self) -> bool:
        return self.p == 1.0


def _power_sum(alpha: np.ndarray, gamma: float) -> float:
    """sum_i alpha_i^gamma via exp(gamma * log alpha), with 0 mapped to 0 exactly."""
    pos = alpha > 0.0
    if not np.any(pos):
        return 0.0
    return float(np.sum(np.exp(gamma * np.log(alpha[pos]))))


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray, hp: Hyperparams) -> float:
    """Value of the concave dual objective at alpha."""
    alpha = np.asarray(alpha, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if alpha.shape != y.shape or K.shape != (alpha.size, alpha.size):
        raise InvalidInputError("alpha, y, K have inconsistent shapes")
    if np.any(alpha < 0.0):
        raise InvalidInputError("alpha must be non-negative")
    theta_term = 0.0
    if not hp.hard_margin and hp.theta != 0.0:
        theta_term = hp.theta * _power_sum(alpha, hp.gamma)
    v = alpha * y
    quad = float(v @ (K @ v))
    return float(np.sum(alpha)) - theta_term - 0.5 * quad


def is_feasible(alpha: np.ndarray, y: np.ndarray, tol: float | None = None) -> bool:
    """True iff min alpha_i >= -tol and |sum alpha_i y_i| <= tol.

    Default tol is 1e-8, scaled by sum(alpha) when that exceeds 1.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if alpha.shape != y.shape:
        raise InvalidInputError("alpha and y lengths differ")
    if tol is None:
        tol = 1e-8 * max(1.0, float(np.sum(alpha)))
    return bool(np.min(alpha) >= -tol and abs(float(alpha @ y)) <= tol)


def primal_objective(w_norm_sq: float, margins, hp: Hyperparams) -> float:
    """Diagnostic primal value: 1/2 ||w||^2 + C * sum_i max(0, 1 - margin_i)^p."""
    return 0.5 * w_norm_sq + hp.C * pnorm_hinge_sum(hp.p, margins)


def w_norm_sq_from_dual(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """||w||^2 reconstructed in feature space: sum_ij a_i a_j y_i y_j K_ij."""
    v = np.asarray(alpha, dtype=np.float64) * np.asarray(y, dtype=np.float64)
    return float(v @ (K @ v))
