"""Coordinate-pair training loop for the p-norm hinge-loss dual.

Each step picks the index with the largest stationarity violation, pairs it
with a uniformly random second index, and maximizes the two-variable
subproblem exactly under alpha_i y_i + alpha_j y_j = c and alpha >= 0. The
subproblem reduces to the root of a monotone decreasing function g; gamma = 2
gives a linear equation, gamma = 3 a quadratic, anything else is bisected.
p = 1 is the hard-margin mode: the penalty-derived terms vanish and alpha has
no upper box, so the update degenerates to the classic unclipped SMO step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import seeding
from .dual import SV_THRESHOLD, Hyperparams
from .exceptions import InvalidInputError, NumericFailureError
from .kernels import Kernel, KernelCache, _eta_from_values
from .models import BinaryModel

logger = logging.getLogger(__name__)

BISECT_REL_TOL = 1e-12
BRACKET_DOUBLINGS = 64


@dataclass
class DualState:
    """Mutable solver state; single-writer."""

    alpha: np.ndarray
    b: float
    E: np.ndarray
    K: KernelCache
    y: np.ndarray
    hp: Hyperparams
    audit: Callable[["PairAuditRecord"], None] | None = None

    @property
    def m(self) -> int:
        return self.alpha.size


@dataclass(frozen=True)
class PairUpdateResult:
    i: int
    j: int
    delta_alpha: float
    objective_increase: float


@dataclass(frozen=True)
class PairAuditRecord:
    """Per-update trace for invariant checks; cheap fields only."""

    i: int
    j: int
    yi: float
    yj: float
    ai_old: float
    aj_old: float
    ai_new: float
    aj_new: float
    eta: float
    delta_alpha: float
    objective_increase: float
    g_lo: float | None
    g_hi: float | None


@dataclass(frozen=True)
class GCoefficients:
    """Frozen inputs of the pair subproblem's stationarity function g."""

    eta: float
    alpha_j_old: float
    de: float  # y_j * (E_i - E_j)
    c: float  # alpha_i y_i + alpha_j y_j
    yi: float
    yj: float
    gamma: float
    theta: float


def g_value(co: GCoefficients, x: float) -> float:
    """g(x); strictly decreasing on the feasible bracket."""
    val = co.eta * (co.alpha_j_old - x) + co.de
    gt = co.gamma * co.theta
    if gt > 0.0:
        s = co.yi * co.yj
        base = co.c * co.yi - s * x
        if base < 0.0:  # rounding guard; >= 0 on the feasible set
            base = 0.0
        val += gt * (s * base ** (co.gamma - 1.0) - x ** (co.gamma - 1.0))
    return val


def mode_for_gamma(gamma: float) -> str:
    if gamma == 2.0:
        return "analytic2"
    if gamma == 3.0:
        return "analytic15"
    return "numeric"


def solve_g_root(mode: str, co: GCoefficients, lo: float, hi: float) -> float:
    """Unique zero of g on [lo, hi] (hi may be +inf on the unbounded branch).

    analytic2 solves the linear form (gamma = 2), analytic15 the quadratic
    form (gamma = 3), numeric bisects; the open bracket is closed by doubling
    hi = max(1, 2*lo) until g turns negative.
    """
    theta = co.theta
    if mode == "analytic2":
        num = co.eta * co.alpha_j_old + co.de + 2.0 * theta * co.c * co.yj
        den = co.eta + 4.0 * theta
        if den <= 0.0:
            raise NumericFailureError("degenerate linear pair equation", eta=co.eta, theta=theta)
        return num / den
    if mode == "analytic15":
        if co.yi == co.yj:
            # the quadratic terms cancel; cy_i = |c| here
            num = co.eta * co.alpha_j_old + co.de + 3.0 * theta * co.c * co.c
            den = co.eta + 6.0 * theta * abs(co.c)
            if den <= 0.0:
                raise NumericFailureError("degenerate pair equation", eta=co.eta, theta=theta,
                                          c=co.c)
            return num / den
        # -6 theta x^2 + (6 theta c y_j - eta) x + (eta a_old + de - 3 theta c^2) = 0;
        # g decreases on the bracket, so its zero is the larger root.
        b_coef = 6.0 * theta * co.c * co.yj - co.eta
        c_coef = co.eta * co.alpha_j_old + co.de - 3.0 * theta * co.c * co.c
        disc = b_coef * b_coef + 24.0 * theta * c_coef
        if disc < 0.0 or theta <= 0.0:
            raise NumericFailureError("quadratic pair equation has no real root",
                                      disc=disc, theta=theta)
        sq = math.sqrt(disc)
        roots = ((b_coef + sq) / (12.0 * theta), (b_coef - sq) / (12.0 * theta))
        pad = 1e-9 * max(1.0, abs(lo), abs(roots[0]))
        for root in roots:
            if lo - pad <= root and (math.isinf(hi) or root <= hi + pad):
                return min(max(root, lo), hi)
        raise NumericFailureError("both quadratic roots outside bracket",
                                  roots=roots, lo=lo, hi=hi)
    # numeric bisection
    if math.isinf(hi):
        hi = max(1.0, 2.0 * lo)
        for _ in range(BRACKET_DOUBLINGS):
            if g_value(co, hi) < 0.0:
                break
            hi *= 2.0
        else:
            raise NumericFailureError("no sign change while expanding bracket", lo=lo, hi=hi)
    a, b = lo, hi
    while b - a > BISECT_REL_TOL * max(1.0, b):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if g_value(co, mid) >= 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _restore_pair_sum(c: float, ai_new: float, aj_new: float, yi: float,
                      yj: float) -> tuple[float, float]:
    """Nudge one alpha by a few ulp so alpha_i y_i + alpha_j y_j reproduces c
    exactly. The larger-magnitude variable is adjusted (its ulp matches the
    rounding error's scale); the perturbation is negligible for optimality."""
    if ai_new * yi + aj_new * yj == c:
        return ai_new, aj_new
    order = (0, 1) if abs(ai_new) >= abs(aj_new) else (1, 0)
    for which in order:
        a, b = ai_new, aj_new
        for _ in range(4):
            err = c - (a * yi + b * yj)
            if err == 0.0:
                return a, b
            if which == 0:
                cand = math.nextafter(a, math.inf if err * yi > 0.0 else -math.inf)
                if cand < 0.0:
                    break
                a = cand
            else:
                cand = math.nextafter(b, math.inf if err * yj > 0.0 else -math.inf)
                if cand < 0.0:
                    break
                b = cand
        if a * yi + b * yj == c:
            return a, b
    return ai_new, aj_new  # give up; the scaled feasibility tolerance still holds


def compute_error(state: DualState, i: int) -> float:
    """E_i = sum_j alpha_j y_j K_ij + b - y_i, recomputed from scratch."""
    row = state.K.row(i)
    return float(row @ (state.alpha * state.y)) + state.b - float(state.y[i])


def refresh_errors(state: DualState) -> None:
    """Recompute the whole E cache from (alpha, b)."""
    nz = np.flatnonzero(state.alpha > 0.0)
    if nz.size:
        contrib = state.K.matvec_rows(nz, (state.alpha * state.y)[nz])
    else:
        contrib = np.zeros(state.m)
    state.E = contrib + state.b - state.y


def update_pair(state: DualState, i: int, j: int) -> PairUpdateResult:
    """Exactly maximize the (i, j) subproblem; preserves the linear constraint."""
    if i == j:
        raise InvalidInputError("update_pair needs distinct indices")
    hp = state.hp
    alpha, y = state.alpha, state.y
    yi, yj = float(y[i]), float(y[j])
    ai, aj = float(alpha[i]), float(alpha[j])
    Ei, Ej = float(state.E[i]), float(state.E[j])
    row_i = state.K.row(i)
    row_j = state.K.row(j)
    kii = float(state.K.diag[i])
    kjj = float(state.K.diag[j])
    kij = float(row_i[j])
    eta_ij = _eta_from_values(kii, kjj, kij)

    if hp.hard_margin:
        gamma, theta = 2.0, 0.0  # exponents unused when theta == 0
    else:
        gamma, theta = hp.gamma, hp.theta
    gt = gamma * theta

    def _noop() -> PairUpdateResult:
        res = PairUpdateResult(i, j, 0.0, 0.0)
        if state.audit is not None:
            state.audit(PairAuditRecord(i, j, yi, yj, ai, aj, ai, aj, eta_ij, 0.0, 0.0,
                                        None, None))
        return res

    if eta_ij == 0.0 and gt == 0.0:
        return _noop()  # g is constant: duplicate points under theta = 0

    c = ai * yi + aj * yj
    de = yj * (Ei - Ej)
    abs_c = abs(c)
    cpow = abs_c ** (gamma - 1.0) if gt > 0.0 else 0.0
    Q = eta_ij * aj + de - cpow * gt
    co = GCoefficients(eta_ij, aj, de, c, yi, yj, gamma, theta)

    g_lo = g_hi = None
    try:
        if yi == yj:
            lo, hi = 0.0, abs_c
            if Q <= -2.0 * cpow * gt:
                aj_new = 0.0
            elif Q >= eta_ij * abs_c:
                aj_new = abs_c
            else:
                aj_new = solve_g_root(mode_for_gamma(gamma), co, lo, hi)
                if state.audit is not None:
                    g_lo, g_hi = g_value(co, lo), g_value(co, hi)
        else:
            u = max(0.0, -c * yi)
            lo, hi = u, math.inf
            if Q <= eta_ij * u:
                aj_new = u
            else:
                aj_new = solve_g_root(mode_for_gamma(gamma), co, lo, hi)
                if state.audit is not None:
                    g_lo, g_hi = g_value(co, lo), g_value(co, max(aj_new, 1.0) * 2.0)
    except NumericFailureError as err:
        raise NumericFailureError(str(err), i=i, j=j, c=c, Q_ij=Q,
                                  **err.diagnostics) from err

    aj_new = max(aj_new, lo)
    if not math.isinf(hi):
        aj_new = min(aj_new, hi)

    s = yi * yj
    ai_new = ai + s * (aj - aj_new)
    if ai_new < 0.0:
        # rounding pushed past the alpha_i = 0 endpoint; land on it exactly
        aj_new = c * yj
        ai_new = 0.0
        if aj_new < 0.0:
            aj_new = 0.0
    ai_new, aj_new = _restore_pair_sum(c, ai_new, aj_new, yi, yj)

    d_i = ai_new - ai
    d_j = aj_new - aj
    if d_i == 0.0 and d_j == 0.0:
        return _noop()
    delta = max(abs(d_i), abs(d_j))

    # objective change from the two-variable expansion with the frozen rest
    v_i = (Ei + yi) - ai * yi * kii - aj * yj * kij - state.b
    v_j = (Ej + yj) - ai * yi * kij - aj * yj * kjj - state.b

    def _pair_obj(a1: float, a2: float) -> float:
        val = (a1 + a2 - 0.5 * kii * a1 * a1 - 0.5 * kjj * a2 * a2
               - a1 * a2 * s * kij - a1 * yi * v_i - a2 * yj * v_j)
        if gt > 0.0:
            val -= theta * (a1**gamma + a2**gamma)
        return val

    obj_inc = _pair_obj(ai_new, aj_new) - _pair_obj(ai, aj)

    alpha[i] = ai_new
    alpha[j] = aj_new
    state.E += (d_i * yi) * row_i + (d_j * yj) * row_j

    res = PairUpdateResult(i, j, delta, obj_inc)
    if state.audit is not None:
        state.audit(PairAuditRecord(i, j, yi, yj, ai, aj, ai_new, aj_new, eta_ij,
                                    delta, obj_inc, g_lo, g_hi))
    return res


def stationarity_bias(state: DualState) -> float:
    """Bias consistent with dual stationarity, estimated over the support set.

    The model bias follows the average-bias rule, but that average is offset
    from the constraint multiplier by the mean signed slack of the support
    vectors (their margins need not be 1 when p > 1). Stationarity of each
    positive alpha gives y_i (1 - theta gamma alpha_i^(gamma-1)) - w.x_i;
    residuals are measured against the mean of those samples.
    """
    sv = np.flatnonzero(state.alpha > SV_THRESHOLD)
    if sv.size == 0:
        return state.b
    hp = state.hp
    y_sv = state.y[sv]
    wx = state.E[sv] + y_sv - state.b  # w.x_i for the support set
    if hp.hard_margin:
        samples = y_sv - wx
    else:
        samples = y_sv * (1.0 - hp.theta * hp.gamma * state.alpha[sv] ** (hp.gamma - 1.0)) - wx
    return float(np.mean(samples))


def kkt_residuals(state: DualState) -> np.ndarray:
    """Stationarity violations r_i driving working-set selection.

    For p > 1, r_i = |alpha_i - C p xi_i^(p-1)| with xi_i = max(0, 1 - y_i
    phi(x_i)) evaluated at the stationarity-consistent bias. For p = 1 the
    classic violation: positive alpha must sit on the margin, zero alpha must
    clear it.
    """
    hp = state.hp
    shift = stationarity_bias(state) - state.b
    y_e = state.y * (state.E + shift)
    if hp.hard_margin:
        return np.where(state.alpha > 0.0, np.abs(y_e), np.maximum(0.0, -y_e))
    xi = np.maximum(0.0, -y_e)
    return np.abs(state.alpha - hp.C * hp.p * xi ** (hp.p - 1.0))


def select_working_pair(state: DualState, rng: np.random.Generator) -> tuple[int, int] | None:
    """Most-violating index i plus a uniformly random j != i; None when all r_i = 0."""
    if state.m < 2:
        raise InvalidInputError("need at least two samples")
    r = kkt_residuals(state)
    if float(np.max(r)) == 0.0:
        return None
    i = int(np.argmax(r))  # ties: lowest index
    j = int(rng.integers(state.m - 1))
    if j >= i:
        j += 1
    return i, j


def update_bias(state: DualState) -> float:
    """Average bias over the support set; 0 when the set is empty. Mutates state."""
    sv = np.flatnonzero(state.alpha > SV_THRESHOLD)
    if sv.size == 0:
        b_new = 0.0
    else:
        w = (state.alpha * state.y)[sv]
        contrib = state.K.matvec_rows(sv, w)
        b_new = float(np.mean(state.y[sv] - contrib[sv]))
    shift = b_new - state.b
    state.b = b_new
    if shift != 0.0:
        state.E += shift
    return b_new


def make_state(X: np.ndarray | None, y: np.ndarray, hp: Hyperparams, kernel: Kernel,
               cache_cap: int | None = None,
               audit: Callable[[PairAuditRecord], None] | None = None) -> DualState:
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InvalidInputError("labels must be -1 or +1")
    kwargs = {} if cache_cap is None else {"cap": cache_cap}
    K = KernelCache(kernel, X, **kwargs)
    if K.m != y.size:
        raise InvalidInputError("kernel size and label count differ")
    return DualState(alpha=np.zeros(y.size), b=0.0, E=-y.copy(), K=K, y=y, hp=hp, audit=audit)


#: Verification passes scan at most this many of the most-violating rows.
VERIFY_ROW_CAP = 256


def _verification_pass(state: DualState) -> bool:
    """Try pairs in descending-violation row order until one moves by >= eps.

    Selecting only the single most-violating index can stall at a point that
    is pair-optimal for that index but not stationary; before the solver
    stops it must certify that no pair admits an eps-sized improvement.
    Returns True when progress was made (training continues).
    """
    r = kkt_residuals(state)
    order = np.argsort(-r)[: min(state.m, VERIFY_ROW_CAP)]
    for i in order:
        for j in range(state.m):
            if j == int(i):
                continue
            if update_pair(state, int(i), j).delta_alpha >= state.hp.eps:
                return True
    return False


def train_dual(X: np.ndarray, y: np.ndarray, hp: Hyperparams, kernel: Kernel, *,
               rng: np.random.Generator | None = None,
               audit: Callable[[PairAuditRecord], None] | None = None,
               cache_cap: int | None = None) -> DualState:
    """Run the outer loop and return the final state. One sweep = m pair
    updates; stops when the largest |delta alpha| over a sweep drops below
    eps (and a pairwise verification pass finds no further progress), the
    violations all reach zero, or max_iter sweeps pass."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    m = y.size
    if m < 2:
        raise InvalidInputError("need at least two samples")
    if X.shape[0] != m:
        raise InvalidInputError("X and y lengths differ")
    if not (np.any(y == 1.0) and np.any(y == -1.0)):
        raise InvalidInputError("both classes must be present")
    state = make_state(X, y, hp, kernel, cache_cap=cache_cap, audit=audit)
    if rng is None:
        rng = seeding.rng_for(hp.seed, seeding.SOLVER_PAIR_J)

    converged = False
    for sweep in range(hp.max_iter):
        max_delta = 0.0
        satisfied = False
        for _ in range(m):
            pair = select_working_pair(state, rng)
            if pair is None:
                satisfied = True
                break
            try:
                res = update_pair(state, *pair)
            except NumericFailureError as err:
                raise NumericFailureError(f"sweep {sweep}: {err}", sweep=sweep,
                                          **err.diagnostics) from err
            if res.delta_alpha > max_delta:
                max_delta = res.delta_alpha
        update_bias(state)
        refresh_errors(state)
        if satisfied or max_delta < hp.eps:
            progressed = _verification_pass(state)
            update_bias(state)
            refresh_errors(state)
            if not progressed:
                converged = True
                break
    if not converged:
        logger.warning("solver hit max_iter=%d sweeps without converging (eps=%g)",
                       hp.max_iter, hp.eps)
    if logger.isEnabledFor(logging.DEBUG):
        _log_diagnostics(state)
    return state


def _log_diagnostics(state: DualState) -> None:
    """Weak-duality diagnostics at the final iterate (reported, not asserted)."""
    from .dual import _power_sum, primal_objective

    hp = state.hp
    v = state.alpha * state.y
    nz = np.flatnonzero(state.alpha > 0.0)
    w_sq = float(v @ state.K.matvec_rows(nz, v[nz])) if nz.size else 0.0
    dual_val = float(np.sum(state.alpha)) - 0.5 * w_sq
    if not hp.hard_margin and hp.theta != 0.0:
        dual_val -= hp.theta * _power_sum(state.alpha, hp.gamma)
    margins = state.y * state.E + 1.0  # y_i * phi(x_i)
    if hp.hard_margin:
        logger.debug("final dual objective %.10g (hard margin: no finite primal)", dual_val)
    else:
        primal_val = primal_objective(w_sq, margins, hp)
        logger.debug("final dual objective %.10g, primal diagnostic %.10g, gap %.3g",
                     dual_val, primal_val, primal_val - dual_val)


def fit_binary(X: np.ndarray, y: np.ndarray, hp: Hyperparams, kernel: Kernel, *,
               rng: np.random.Generator | None = None,
               audit: Callable[[PairAuditRecord], None] | None = None,
               cache_cap: int | None = None) -> BinaryModel:
    """Train a binary classifier and package the support set as a model."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    state = train_dual(X, y, hp, kernel, rng=rng, audit=audit, cache_cap=cache_cap)
    sv = np.flatnonzero(state.alpha > SV_THRESHOLD)
    return BinaryModel(support_x=X[sv].copy(), coef=(state.alpha * state.y)[sv].copy(),
                       b=state.b, kernel=kernel, hp_used=state.hp, n_train=state.m)
