"""Exact zero-mean Gaussian process regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .domain import AcquisitionDomain, as_points, write_grid_csv
from .errors import NumericalError
from .kernels import KernelSpec, cross_covariance

JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class PosteriorField:
    mean: np.ndarray
    std: np.ndarray

    @property
    def variance(self) -> np.ndarray:
        return self.std**2


@dataclass(frozen=True, eq=False)
class GpModel:
    kernel: KernelSpec
    train_points: np.ndarray
    train_values: np.ndarray
    sigma_n2: float
    chol: np.ndarray | None
    weights: np.ndarray | None
    jitter: float = 0.0

    @property
    def n(self) -> int:
        return len(self.train_values)


def fit(kernel: KernelSpec, points, values, sigma_n2: float) -> GpModel:
    """Condition the prior on ``(points, values)``.

    The noisy covariance ``K + sigma_n2 I`` is Cholesky-factorised; if that
    fails, growing diagonal jitter is tried before giving up.
    """
    if sigma_n2 < 0:
        raise ValueError("sigma_n2 must be non-negative")
    values = np.asarray(values, dtype=float).ravel()
    if len(values) == 0:
        return GpModel(kernel, np.empty((0, 2)), values, float(sigma_n2), None, None)
    points = as_points(points)
    if len(points) != len(values):
        raise ValueError(f"{len(points)} points but {len(values)} values")
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(points))):
        raise NumericalError(
            f"non-finite training data for kernel {kernel.family.value} with n={len(values)}"
        )
    K = cross_covariance(kernel, points, points)
    K = (K + K.T) / 2 + sigma_n2 * np.eye(len(values))
    for jitter in JITTER_LADDER:
        try:
            c, low = cho_factor(K + jitter * np.eye(len(values)), lower=True, check_finite=True)
        except np.linalg.LinAlgError:
            continue
        weights = cho_solve((c, low), values)
        L = np.tril(c)
        return GpModel(kernel, points, values, float(sigma_n2), L, weights, jitter)
    raise NumericalError(
        f"covariance matrix not positive definite for kernel {kernel.family.value} "
        f"with n={len(values)} training points"
    )


def predict_many(model: GpModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at each row of ``X``."""
    X = as_points(X)
    prior = np.full(len(X), model.kernel.prior_variance())
    if model.n == 0:
        return np.zeros(len(X)), prior
    Kt = cross_covariance(model.kernel, X, model.train_points)
    mean = Kt @ model.weights
    v = solve_triangular(model.chol, Kt.T, lower=True, check_finite=False)
    var = prior - np.einsum("ij,ij->j", v, v)
    return mean, np.maximum(var, 0.0)


def predict(model: GpModel, x) -> tuple[float, float]:
    mean, var = predict_many(model, x)
    return float(mean[0]), float(var[0])


def predict_field(model: GpModel, domain: AcquisitionDomain) -> PosteriorField:
    mean, var = predict_many(model, domain.candidates())
    return PosteriorField(mean=mean, std=np.sqrt(var))


def export_field(field: PosteriorField, domain: AcquisitionDomain, mean_path, std_path) -> None:
    write_grid_csv(mean_path, domain, field.mean)
    write_grid_csv(std_path, domain, field.std)
