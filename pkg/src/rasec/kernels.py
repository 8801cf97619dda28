"""Stationary covariance functions for hardness fields on the sample plane.

Four families are supported: squared exponential (SE), thin plate (TP),
Ornstein-Uhlenbeck (OU) and the SE-OU fusion kernel, whose exponent is a
weighted sum of the SE and OU exponents.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .domain import AcquisitionDomain, as_points
from .errors import ConfigError, DomainError


class KernelFamily(str, enum.Enum):
    SE = "SE"
    TP = "TP"
    OU = "OU"
    SE_OU = "SE_OU"

    @classmethod
    def parse(cls, name: str) -> "KernelFamily":
        if isinstance(name, cls):
            return name
        key = str(name).upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown kernel family {name!r}") from None


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters (lengths in mm).

    ``l`` is used by SE and OU, ``l1``/``l2``/``alpha``/``beta`` by SE-OU and
    ``R`` (the training-set diameter) by TP. OU carries no amplitude.
    """

    family: KernelFamily = KernelFamily.SE_OU
    sigma_f: float = 1.0
    l: float = 4.0
    l1: float = 4.0
    l2: float = 3.5
    alpha: float = 1.0
    beta: float = 1.0
    R: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily.parse(self.family))
        if not self.sigma_f > 0:
            raise ConfigError("sigma_f must be positive")
        if not (self.l > 0 and self.l1 > 0 and self.l2 > 0):
            raise ConfigError("length scales must be positive")
        if self.family is KernelFamily.SE_OU:
            if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
                raise ConfigError("SE-OU needs alpha, beta >= 0 with alpha + beta > 0")
        if self.R is not None and not self.R > 0:
            raise ConfigError("TP radius R must be positive")

    def with_radius(self, R: float) -> "KernelSpec":
        return replace(self, R=float(R))

    def prior_variance(self) -> float:
        """k(x, x), identical for every x."""
        return float(self.of_distance(np.zeros(1))[0])

    def of_distance(self, r: np.ndarray) -> np.ndarray:
        """Evaluate the kernel as a function of Euclidean distance ``r``."""
        r = np.asarray(r, dtype=float)
        fam = self.family
        if fam is KernelFamily.SE:
            return self.sigma_f**2 * np.exp(-(r**2) / (2 * self.l**2))
        if fam is KernelFamily.OU:
            return np.exp(-r / self.l)
        if fam is KernelFamily.SE_OU:
            return self.sigma_f**2 * np.exp(
                -self.alpha * r**2 / (2 * self.l1**2) - self.beta * r / self.l2
            )
        return _thin_plate(r, self.R)


def _thin_plate(r: np.ndarray, R: float | None) -> np.ndarray:
    if R is None:
        raise ConfigError("TP kernel needs its radius R set")
    if np.any(r > R * (1 + 1e-12)):
        raise DomainError(f"TP kernel undefined beyond R={R!r} (max r={float(np.max(r))!r})")
    with np.errstate(divide="ignore", invalid="ignore"):
        r2logr = np.where(r > 0, r**2 * np.log(np.where(r > 0, r, 1.0)), 0.0)
    return 2 * r2logr - (1 + 2 * math.log(R)) * r**2 + R**2


def kernel_eval(spec: KernelSpec, a, b) -> float:
    r = math.dist(tuple(map(float, a)), tuple(map(float, b)))
    return float(spec.of_distance(np.array([r]))[0])


def cross_covariance(spec: KernelSpec, A, B) -> np.ndarray:
    """Matrix of k(a_i, b_j)."""
    return spec.of_distance(cdist(as_points(A), as_points(B)))


def max_pairwise_distance(points) -> float:
    p = as_points(points)
    if len(p) < 2:
        return 0.0
    return float(cdist(p, p).max())


def gram_matrix(spec: KernelSpec, points) -> np.ndarray:
    """Symmetric covariance matrix over ``points``.

    A TP spec gets its radius from the point set itself.
    """
    p = as_points(points)
    if spec.family is KernelFamily.TP:
        spec = spec.with_radius(max(max_pairwise_distance(p), np.finfo(float).tiny))
    K = cross_covariance(spec, p, p)
    return (K + K.T) / 2


def kernel_from_dict(cfg: dict) -> KernelSpec:
    cfg = dict(cfg)
    cfg.pop("name", None)
    fam = cfg.pop("family", "SE_OU")
    allowed = {"sigma_f", "l", "l1", "l2", "alpha", "beta", "R"}
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"unknown kernel keys: {sorted(extra)}")
    try:
        values = {k: (None if v is None else float(v)) for k, v in cfg.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad kernel parameter: {exc}") from exc
    return KernelSpec(family=fam, **values)


def contour_points(domain: AcquisitionDomain) -> np.ndarray:
    """Candidates along the x axis (y = 0), used for covariance contour slices."""
    return np.column_stack([domain.axis, np.zeros_like(domain.axis)])


def export_covariance_contour(spec: KernelSpec, domain: AcquisitionDomain, path) -> np.ndarray:
    """Write the Gram matrix over a line of collinear candidates as CSV.

    Returns the matrix that was written.
    """
    K = gram_matrix(spec, contour_points(domain))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in K:
            writer.writerow([repr(float(v)) for v in row])
    return K
