"""Kernel functions, kernel matrices with row caching, and the bandwidth rule."""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateDataError, InvalidInputError, NonPSDKernelError

SYMMETRY_TOL = 1e-9
ETA_TOL = 1e-9

#: Above this many rows the full matrix is no longer precomputed; rows are
#: computed on demand and LRU-cached instead (SMO touches two rows per update).
FULL_MATRIX_CAP = 10_000


@dataclass(frozen=True)
class Kernel:
    """A similarity function: linear, gaussian(sigma), or a precomputed matrix."""

    kind: str
    sigma: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "linear":
            pass
        elif self.kind == "gaussian":
            if self.sigma is None or not np.isfinite(self.sigma) or self.sigma <= 0:
                raise InvalidInputError(f"gaussian kernel needs sigma > 0, got {self.sigma}")
        elif self.kind == "precomputed":
            K = self.matrix
            if K is None or K.ndim != 2 or K.shape[0] != K.shape[1]:
                raise InvalidInputError("precomputed kernel needs a square matrix")
            if np.max(np.abs(K - K.T)) > SYMMETRY_TOL:
                raise NonPSDKernelError("precomputed kernel matrix is not symmetric")
            d = np.diag(K)
            if np.min(d[:, None] + d[None, :] - 2.0 * K) < -ETA_TOL:
                raise NonPSDKernelError("precomputed kernel matrix has eta below tolerance")
        else:
            raise InvalidInputError(f"unknown kernel kind {self.kind!r}")


def linear() -> Kernel:
    return Kernel("linear")


def gaussian(sigma: float) -> Kernel:
    return Kernel("gaussian", sigma=float(sigma))


def precomputed(matrix: np.ndarray) -> Kernel:
    return Kernel("precomputed", matrix=np.asarray(matrix, dtype=np.float64))


def kernel_eval(kernel: Kernel, a: np.ndarray, b: np.ndarray) -> float:
    """Evaluate K(a, b) for an analytic kernel. Symmetric in its arguments."""
    if kernel.kind == "precomputed":
        raise InvalidInputError("precomputed kernels are index-addressed, not point-evaluable")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if kernel.kind == "linear":
        return float(a @ b)
    d = a - b
    return float(np.exp(-(d @ d) / (2.0 * kernel.sigma**2)))


def kernel_cross(kernel: Kernel, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """|A| x |B| matrix of kernel values between the rows of A and B."""
    if kernel.kind == "precomputed":
        raise InvalidInputError("precomputed kernels are index-addressed, not point-evaluable")
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise InvalidInputError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    G = A @ B.T
    if kernel.kind == "linear":
        return G
    d2 = np.einsum("ij,ij->i", A, A)[:, None] + np.einsum("ij,ij->i", B, B)[None, :] - 2.0 * G
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-d2 / (2.0 * kernel.sigma**2))


def kernel_matrix(kernel: Kernel, X: np.ndarray) -> np.ndarray:
    """Full m x m kernel matrix over the rows of X; symmetrized exactly."""
    if kernel.kind == "precomputed":
        return kernel.matrix
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] < 1:
        raise InvalidInputError("kernel_matrix needs at least one row")
    G = X @ X.T
    G = (G + G.T) / 2.0
    if kernel.kind == "linear":
        return G
    d = np.diag(G)
    d2 = d[:, None] + d[None, :] - 2.0 * G
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-d2 / (2.0 * kernel.sigma**2))


def default_gaussian_sigma(X: np.ndarray) -> float:
    """Bandwidth rule 2*sigma^2 = M * Var[X], Var over all m*M entries."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    M = X.shape[1]
    var = float(np.var(X))
    if var <= 0.0:
        raise DegenerateDataError("feature matrix has zero variance; cannot set bandwidth")
    return float(np.sqrt(M * var / 2.0))


def _eta_from_values(kii: float, kjj: float, kij: float) -> float:
    val = kii + kjj - 2.0 * kij
    if val < -ETA_TOL:
        raise NonPSDKernelError(f"eta = {val} below -{ETA_TOL}; kernel is not PSD")
    return max(val, 0.0)


def eta(K: np.ndarray, i: int, j: int) -> float:
    """Curvature K_ii + K_jj - 2 K_ij of the (i, j) pair subproblem; >= 0 for PSD kernels."""
    return _eta_from_values(float(K[i, i]), float(K[j, j]), float(K[i, j]))


class KernelCache:
    """Row-oriented access to a kernel matrix.

    Precomputes the full matrix when m <= cap; above that, rows are computed
    on demand and LRU-cached. Reads of the full matrix are lock-free; the LRU
    path is guarded by a lock so concurrent readers are safe.
    """

    def __init__(self, kernel: Kernel, X: np.ndarray | None, cap: int = FULL_MATRIX_CAP,
                 lru_rows: int = 512):
        self.kernel = kernel
        if kernel.kind == "precomputed":
            self._full = kernel.matrix
            self.X = X
            self.m = kernel.matrix.shape[0]
        else:
            if X is None:
                raise InvalidInputError("analytic kernels need the sample matrix")
            self.X = np.atleast_2d(np.asarray(X, dtype=np.float64))
            self.m = self.X.shape[0]
            self._full = kernel_matrix(kernel, self.X) if self.m <= cap else None
        if self._full is not None:
            self.diag = np.ascontiguousarray(np.diag(self._full))
        elif kernel.kind == "gaussian":
            self.diag = np.ones(self.m)
        else:
            self.diag = np.einsum("ij,ij->i", self.X, self.X)
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self._lru_rows = lru_rows
        self._lock = threading.Lock()

    @property
    def full(self) -> np.ndarray | None:
        return self._full

    def row(self, i: int) -> np.ndarray:
        if self._full is not None:
            return self._full[i]
        with self._lock:
            r = self._rows.get(i)
            if r is not None:
                self._rows.move_to_end(i)
                return r
        r = kernel_cross(self.kernel, self.X[i : i + 1], self.X)[0]
        with self._lock:
            self._rows[i] = r
            if len(self._rows) > self._lru_rows:
                self._rows.popitem(last=False)
        return r

    def entry(self, i: int, j: int) -> float:
        if self._full is not None:
            return float(self._full[i, j])
        return float(self.row(i)[j])

    def eta(self, i: int, j: int) -> float:
        return _eta_from_values(float(self.diag[i]), float(self.diag[j]), self.entry(i, j))

    def matvec_rows(self, indices: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """Sum_{k in indices} weights[k] * K[k, :] without forming the full matrix."""
        if self._full is not None:
            return weights @ self._full[indices]
        out = np.zeros(self.m)
        for pos, k in enumerate(indices):
            out += weights[pos] * self.row(int(k))
        return out
