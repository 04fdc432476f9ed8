"""Gaussian-process surrogate with a unit-variance Matern-5/2 kernel.

Observations are standardized on every fit (zero mean, unit variance), so the
prior mean is zero and the kernel carries no amplitude hyperparameter. The
observations are treated as noise-free; ``jitter`` is a numerical nugget only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import IllConditionedError, PreconditionError
from .space import DesignPoint

SQRT5 = math.sqrt(5.0)
LOG_2PI = math.log(2.0 * math.pi)

DEFAULT_THETA = 0.5
DEFAULT_JITTER = 1e-8
MAX_JITTER = 1e-4
THETA_GRID = (0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0)
_CONSTANT_STD = 1e-12
_CHUNK = 8192


def matern52(a: Sequence[float], b: Sequence[float], theta: float) -> float:
    """Matern-5/2 covariance between two points (unit variance)."""
    if not theta > 0:
        raise PreconditionError(f"theta must be positive, got {theta}")
    r = math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b, strict=True)))
    s = SQRT5 * r / theta
    return (1.0 + s + s * s / 3.0) * math.exp(-s)


def matern52_from_sqdist(d2: np.ndarray, theta: float) -> np.ndarray:
    s = SQRT5 * np.sqrt(d2) / theta
    return (1.0 + s + s * s / 3.0) * np.exp(-s)


def sq_dist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, accumulated one axis at a time.

    The per-axis differences are squared before summing, so ``sq_dist(A, B)``
    is exactly the transpose of ``sq_dist(B, A)``.
    """
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    out = np.zeros((A.shape[0], B.shape[0]))
    for k in range(A.shape[1]):
        diff = A[:, k, None] - B[None, :, k]
        out += diff * diff
    return out


def gram(A: np.ndarray, B: np.ndarray, theta: float) -> np.ndarray:
    return matern52_from_sqdist(sq_dist(A, B), theta)


@dataclass(frozen=True)
class KernelParams:
    theta: float = DEFAULT_THETA
    jitter: float = DEFAULT_JITTER

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise PreconditionError(f"theta must be positive, got {self.theta}")
        if not 0.0 <= self.jitter <= 1e-3:
            raise PreconditionError(f"jitter must lie in [0, 1e-3], got {self.jitter}")


class Dataset:
    """Ordered observations ``(point, value)`` with unique index tuples."""

    def __init__(self, points: Sequence[DesignPoint] = (), values: Sequence[float] = ()):
        self.points: list[DesignPoint] = []
        self.values: list[float] = []
        self._keys: set[tuple[int, ...]] = set()
        for p, v in zip(points, values, strict=True):
            self.add(p, v)

    def add(self, point: DesignPoint, value: float) -> None:
        if point.indices in self._keys:
            raise PreconditionError(f"duplicate observation at {point}")
        self._keys.add(point.indices)
        self.points.append(point)
        self.values.append(float(value))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points, self.values))

    def __contains__(self, item) -> bool:
        key = item.indices if isinstance(item, DesignPoint) else tuple(item)
        return key in self._keys

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return [p.indices for p in self.points] == [p.indices for p in other.points] and (
            self.values == other.values
        )

    @property
    def keys(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self._keys)

    def copy(self) -> "Dataset":
        return Dataset(self.points, self.values)

    def X(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 0))
        space = self.points[0].space
        return space.normalize_indices(np.array([p.indices for p in self.points]))

    def y(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def best(self) -> tuple[DesignPoint, float]:
        """Lowest value; ties go to the lowest row-major index."""
        if not self.points:
            raise PreconditionError("empty dataset has no best point")
        i = min(range(len(self)), key=lambda k: (self.values[k], self.points[k].indices))
        return self.points[i], self.values[i]

    def canonical(self) -> "Dataset":
        order = sorted(range(len(self)), key=lambda k: self.points[k].indices)
        return Dataset([self.points[k] for k in order], [self.values[k] for k in order])

    def to_csv(self) -> str:
        """Serialize with exact (``repr``) values; used for determinism checks."""
        if not self.points:
            return ""
        names = self.points[0].space.names
        lines = [",".join([f"i_{n}" for n in names] + ["value"])]
        for p, v in self:
            lines.append(",".join([str(i) for i in p.indices] + [repr(v)]))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Posterior:
    mean: float
    variance: float

    @property
    def stddev(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True, eq=False)
class GpModel:
    """A fitted GP. Everything is in standardized units except ``y``."""

    X: np.ndarray
    y: np.ndarray
    theta: float
    jitter: float
    y_mean: float
    y_std: float
    chol: np.ndarray
    # alpha = (K + jitter I)^-1 ys and beta = L^-1 ys for standardized ys
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def params(self) -> KernelParams:
        return KernelParams(self.theta, self.jitter)

    def predict(self, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior means and variances at the rows of ``Xq``."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        means = np.empty(Xq.shape[0])
        variances = np.empty(Xq.shape[0])
        for start in range(0, Xq.shape[0], _CHUNK):
            sl = slice(start, start + _CHUNK)
            kq = gram(Xq[sl], self.X, self.theta)
            v = solve_triangular(self.chol, kq.T, lower=True, check_finite=False)
            means[sl] = kq @ self.alpha
            variances[sl] = 1.0 - np.einsum("ij,ij->j", v, v)
        np.maximum(variances, 0.0, out=variances)
        return self.y_mean + self.y_std * means, variances * self.y_std**2

    def posterior(self, point: DesignPoint) -> Posterior:
        x = point.space.normalize(point)
        mean, var = self.predict(x[None, :])
        return Posterior(float(mean[0]), float(var[0]))

    def log_marginal_likelihood(self) -> float:
        ys = (self.y - self.y_mean) / self.y_std
        return float(
            -0.5 * ys @ self.alpha - np.log(np.diag(self.chol)).sum() - 0.5 * self.n * LOG_2PI
        )

    def extend(self, x: np.ndarray, value: float) -> "GpModel":
        """Add one observation by bordering the Cholesky factor.

        Falls back to a full :func:`fit_xy` (with jitter escalation) when the
        bordered pivot is not positive.
        """
        x = np.asarray(x, dtype=float)
        X = np.vstack([self.X, x[None, :]])
        y = np.append(self.y, float(value))
        k = gram(x[None, :], self.X, self.theta)[0]
        l = solve_triangular(self.chol, k, lower=True, check_finite=False)
        pivot = 1.0 + self.jitter - l @ l
        if not pivot > 0:
            return fit_xy(X, y, KernelParams(self.theta, self.jitter))
        n = self.n
        L = np.zeros((n + 1, n + 1))
        L[:n, :n] = self.chol
        L[n, :n] = l
        L[n, n] = math.sqrt(pivot)
        return _finish(X, y, self.theta, self.jitter, L)


def _standardize(y: np.ndarray) -> tuple[float, float]:
    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    if y_std < _CONSTANT_STD:
        y_std = 1.0
    return y_mean, y_std


def _finish(X, y, theta, jitter, L) -> GpModel:
    y_mean, y_std = _standardize(y)
    ys = (y - y_mean) / y_std
    beta = solve_triangular(L, ys, lower=True, check_finite=False)
    alpha = solve_triangular(L.T, beta, lower=False, check_finite=False)
    return GpModel(X, y, theta, jitter, y_mean, y_std, L, alpha, beta)


def _cholesky(K: np.ndarray, jitter: float) -> tuple[np.ndarray, float]:
    """Factor ``K + jitter I``; escalate jitter x10 per failure up to MAX_JITTER."""
    n = K.shape[0]
    j = jitter
    while True:
        try:
            return np.linalg.cholesky(K + j * np.eye(n)), j
        except np.linalg.LinAlgError:
            j = max(j * 10.0, DEFAULT_JITTER)
            if j > MAX_JITTER * (1 + 1e-12):
                raise IllConditionedError(
                    f"Cholesky failed for n={n} up to jitter {j / 10.0:g}", jitter=j / 10.0
                ) from None


def fit_xy(
    X: np.ndarray,
    y: np.ndarray,
    params: KernelParams = KernelParams(),
) -> GpModel:
    """Fit on raw normalized inputs ``X`` (n, d) and values ``y`` (n,)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 1:
        raise PreconditionError("fit needs at least one observation")
    if X.shape[0] != y.shape[0]:
        raise PreconditionError(f"{X.shape[0]} inputs but {y.shape[0]} values")
    K = gram(X, X, params.theta)
    L, jitter = _cholesky(K, params.jitter)
    return _finish(X, y, params.theta, jitter, L)


def fit(dataset: Dataset, params: KernelParams = KernelParams()) -> GpModel:
    if len(dataset) < 1:
        raise PreconditionError("fit needs at least one observation")
    return fit_xy(dataset.X(), dataset.y(), params)


def posterior(model: GpModel, x: DesignPoint) -> Posterior:
    return model.posterior(x)


def log_marginal_likelihood(dataset: Dataset, params: KernelParams = KernelParams()) -> float:
    return fit(dataset, params).log_marginal_likelihood()


def select_theta(
    dataset: Dataset | tuple[np.ndarray, np.ndarray],
    theta_grid: Sequence[float] = THETA_GRID,
    jitter: float = DEFAULT_JITTER,
) -> float:
    """Grid theta with the highest log marginal likelihood.

    ``dataset`` may also be an ``(X, y)`` pair of raw arrays. Ties go to the
    smaller theta; candidates whose factorization fails are skipped.
    """
    if not len(theta_grid):
        raise PreconditionError("theta grid is empty")
    X, y = (dataset.X(), dataset.y()) if isinstance(dataset, Dataset) else dataset
    best_theta, best_lml = None, -math.inf
    last_error = None
    for theta in sorted(set(float(t) for t in theta_grid)):
        try:
            lml = fit_xy(X, y, KernelParams(theta, jitter)).log_marginal_likelihood()
        except IllConditionedError as exc:
            last_error = exc
            continue
        if best_theta is None or lml > best_lml:
            best_theta, best_lml = theta, lml
    if best_theta is None:
        raise IllConditionedError(
            "every theta candidate was ill-conditioned", jitter=last_error.jitter
        )
    return best_theta


class GridPredictor:
    """Posterior over a fixed candidate set, reused across BO iterations.

    Keeps ``V = L^-1 K(X, C)^T`` for the candidate rows ``C``. When the next
    model shares theta, jitter and a bordered-Cholesky prefix with the cached
    one, only the new rows of ``V`` are solved; otherwise ``V`` is rebuilt.
    Results match :meth:`GpModel.predict` up to rounding.
    """

    def __init__(self, candidates: np.ndarray):
        self.C = np.asarray(candidates, dtype=float)
        self._V = np.empty((0, self.C.shape[0]))
        self._sumsq = np.zeros(self.C.shape[0])
        self._L: np.ndarray | None = None
        self._X: np.ndarray | None = None
        self._theta: float | None = None
        self._jitter: float | None = None
        self.rebuilds = 0

    def _compatible(self, model: GpModel) -> bool:
        if self._L is None or model.theta != self._theta or model.jitter != self._jitter:
            return False
        n = self._L.shape[0]
        return (
            model.n >= n
            and np.array_equal(model.chol[:n, :n], self._L)
            and np.array_equal(model.X[:n], self._X)
        )

    def _reserve(self, rows: int) -> None:
        if rows > self._V.shape[0]:
            cap = max(rows, 2 * self._V.shape[0], 16)
            V = np.empty((cap, self.C.shape[0]))
            n = 0 if self._L is None else self._L.shape[0]
            V[:n] = self._V[:n]
            self._V = V

    def _rebuild(self, model: GpModel) -> None:
        self.rebuilds += 1
        self._reserve(model.n)
        self._sumsq[:] = 0.0
        for start in range(0, self.C.shape[0], _CHUNK):
            sl = slice(start, start + _CHUNK)
            kq = gram(self.C[sl], model.X, model.theta)
            v = solve_triangular(model.chol, kq.T, lower=True, check_finite=False)
            self._V[: model.n, sl] = v
            self._sumsq[sl] = np.einsum("ij,ij->j", v, v)

    def _append(self, model: GpModel, n: int) -> None:
        N = model.n
        self._reserve(N)
        kx = gram(model.X[n:N], self.C, model.theta)
        rhs = kx - model.chol[n:N, :n] @ self._V[:n]
        v = solve_triangular(model.chol[n:N, n:N], rhs, lower=True, check_finite=False)
        self._V[n:N] = v
        self._sumsq += np.einsum("ij,ij->j", v, v)

    def predict(self, model: GpModel) -> tuple[np.ndarray, np.ndarray]:
        if self._compatible(model):
            n = self._L.shape[0]
            if model.n > n:
                self._append(model, n)
        else:
            self._rebuild(model)
        self._L = model.chol.copy()
        self._X = model.X.copy()
        self._theta, self._jitter = model.theta, model.jitter
        mean = self._V[: model.n].T @ model.beta
        var = np.maximum(1.0 - self._sumsq, 0.0)
        return model.y_mean + model.y_std * mean, var * model.y_std**2
