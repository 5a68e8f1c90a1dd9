"""Small-scale reference solver: projected gradient ascent on the dual.

Test-and-verification oracle only. Ascends the concave dual objective and
projects each iterate exactly onto {alpha >= 0, sum alpha_i y_i = 0}.
Deliberately simple and independent of the coordinate-pair solver it
cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dual import Hyperparams, _power_sum
from .exceptions import InvalidInputError, OracleFailureError

ORACLE_MAX_M = 200
BACKTRACK_LIMIT = 60


@dataclass(frozen=True)
class OracleConfig:
    step: float = 1.0  # multiplier on the curvature-derived base step
    tol: float = 1e-11  # stop when an accepted step improves less than this
    max_steps: int = 200_000

    def __post_init__(self):
        if self.step <= 0 or self.tol <= 0 or self.max_steps <= 0:
            raise InvalidInputError("OracleConfig fields must all be positive")


def _top_eigenvalue_estimate(Q: np.ndarray, iters: int = 30) -> float:
    """Deterministic power iteration on the PSD quadratic-term matrix."""
    v = np.ones(Q.shape[0]) / np.sqrt(Q.shape[0])
    lam = float(v @ Q @ v)
    for _ in range(iters):
        w = Q @ v
        norm = float(np.linalg.norm(w))
        if norm <= 0.0:
            return max(lam, 1e-12)
        v = w / norm
        lam = float(v @ Q @ v)
    # small safety margin so 1/L stays a valid step for the quadratic part
    return max(lam * 1.05, 1e-12)


def _clip(v: np.ndarray, cap: float | None) -> np.ndarray:
    return np.clip(v, 0.0, cap) if cap is not None else np.maximum(v, 0.0)


def _project(alpha: np.ndarray, y: np.ndarray, cap: float | None) -> np.ndarray:
    """Exact Euclidean projection onto {a: 0 <= a (<= cap), sum a_i y_i = 0}.

    The projection is clip(v - lam*y) with lam chosen so the constraint
    holds; h(lam) = y . clip(v - lam*y) is piecewise linear and
    non-increasing, so the zero is found by a breakpoint search.
    """
    v = alpha

    def h(lam: float) -> float:
        return float(_clip(v - lam * y, cap) @ y)

    bps = [v * y]  # activation of the lower bound per coordinate
    if cap is not None:
        bps.append((v - cap * y) * y)
    bps = np.unique(np.concatenate(bps))
    lo, hi = float(bps[0]), float(bps[-1])
    h_lo, h_hi = h(lo), h(hi)
    width = max(1.0, hi - lo)
    while h_lo < 0.0:  # crossing lies below all breakpoints; h linear there
        lo -= width
        width *= 2.0
        h_lo = h(lo)
    while h_hi > 0.0:
        hi += width
        width *= 2.0
        h_hi = h(hi)
    # binary search over breakpoints inside [lo, hi]
    inside = bps[(bps > lo) & (bps < hi)]
    a, b = lo, hi
    ha, hb = h_lo, h_hi
    left, right = 0, inside.size - 1
    while left <= right:
        mid = (left + right) // 2
        lam = float(inside[mid])
        val = h(lam)
        if val >= 0.0:
            a, ha = lam, val
            left = mid + 1
        else:
            b, hb = lam, val
            right = mid - 1
    if ha == hb:
        lam_star = a
    else:
        lam_star = a + (b - a) * ha / (ha - hb)  # h is linear on [a, b]
    return _clip(v - lam_star * y, cap)


def reference_dual_solve(K: np.ndarray, y: np.ndarray, hp: Hyperparams,
                         cfg: OracleConfig = OracleConfig(),
                         box_cap: float | None = None) -> tuple[np.ndarray, float]:
    """Maximize the dual on a small instance; returns (alpha, objective).

    p = 1 needs an explicit box_cap (its dual has no upper bound otherwise).
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m = y.size
    if m > ORACLE_MAX_M:
        raise InvalidInputError(f"oracle is restricted to m <= {ORACLE_MAX_M}, got {m}")
    if K.shape != (m, m):
        raise InvalidInputError("kernel matrix and labels have inconsistent sizes")
    if hp.hard_margin:
        if box_cap is None or box_cap <= 0:
            raise InvalidInputError("p = 1 mode needs a positive box_cap for tractability")
        gamma, theta = 2.0, 0.0
    else:
        gamma, theta = hp.gamma, hp.theta
        box_cap = None

    Q = (y[:, None] * y[None, :]) * K
    q_norm = _top_eigenvalue_estimate(Q)

    def objective(a: np.ndarray, Qa: np.ndarray) -> float:
        val = float(np.sum(a)) - 0.5 * float(a @ Qa)
        if theta > 0.0:
            val -= theta * _power_sum(a, gamma)
        return val

    alpha = np.zeros(m)
    Qa = np.zeros(m)
    obj = 0.0
    for _ in range(cfg.max_steps):
        grad = 1.0 - Qa
        if theta > 0.0:
            grad = grad - theta * gamma * np.where(alpha > 0.0, alpha, 0.0) ** (gamma - 1.0)
        curv = q_norm
        if theta > 0.0:
            amax = max(float(np.max(alpha)), 1e-6)
            curv += theta * gamma * (gamma - 1.0) * amax ** (gamma - 2.0)
        step = cfg.step / max(curv, 1e-12)

        cand = _project(alpha + step * grad, y, box_cap)
        Qc = Q @ cand
        cand_obj = objective(cand, Qc)
        halvings = 0
        while cand_obj < obj and halvings < BACKTRACK_LIMIT:
            step *= 0.5
            cand = _project(alpha + step * grad, y, box_cap)
            Qc = Q @ cand
            cand_obj = objective(cand, Qc)
            halvings += 1
        if cand_obj < obj:
            return alpha, obj  # no ascent direction survives projection: fixed point
        improvement = cand_obj - obj
        alpha, Qa, obj = cand, Qc, cand_obj
        if improvement < cfg.tol:
            return alpha, obj
    raise OracleFailureError(
        f"projected gradient did not converge in {cfg.max_steps} steps (tol={cfg.tol})")
