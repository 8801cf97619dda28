"""Acquisition domain and simulated hardness phantom.

Points are expressed in millimetres in the sample frame, origin at the
centre of the square acquisition region.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DomainError

OUTSIDE = 0
INSIDE = 1
BOUNDARY = 2


class Point2(NamedTuple):
    x: float
    y: float


def as_points(points) -> np.ndarray:
    """Coerce a point or a sequence of points to a float array of shape (n, 2)."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"expected points of shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("point coordinates must be finite")
    return arr


@dataclass(frozen=True)
class AcquisitionDomain:
    """Square grid of candidate contact points, ``[-half_extent, half_extent]^2``."""

    half_extent: float = 25.0
    grid_step: float = 1.0

    def __post_init__(self):
        if not (self.half_extent > 0 and self.grid_step > 0):
            raise ConfigError("half_extent and grid_step must be positive")

    @property
    def axis(self) -> np.ndarray:
        n = int(math.floor(2 * self.half_extent / self.grid_step + 1e-9)) + 1
        return -self.half_extent + self.grid_step * np.arange(n)

    @property
    def shape(self) -> tuple[int, int]:
        n = self.axis.size
        return n, n

    @property
    def diameter(self) -> float:
        """Largest distance between two candidates."""
        span = self.axis[-1] - self.axis[0]
        return float(math.hypot(span, span))

    def candidates(self) -> np.ndarray:
        """All grid points, row-major: y is the slow index, x the fast one."""
        a = self.axis
        yy, xx = np.meshgrid(a, a, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def contains(self, points) -> np.ndarray:
        p = as_points(points)
        tol = 1e-9
        return np.all(np.abs(p) <= self.half_extent + tol, axis=1)

    def center(self) -> Point2:
        return Point2(0.0, 0.0)


def candidates(domain: AcquisitionDomain) -> list[Point2]:
    return [Point2(float(x), float(y)) for x, y in domain.candidates()]


@dataclass(frozen=True)
class IncisionRect:
    center: Point2
    width: float
    height: float
    rotation: float = 0.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ConfigError("incision width and height must be positive")

    def corners(self) -> np.ndarray:
        hw, hh = self.width / 2, self.height / 2
        local = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
        return self._to_world(local)

    def _to_world(self, local: np.ndarray) -> np.ndarray:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.asarray(self.center, dtype=float)

    def _to_local(self, points: np.ndarray) -> np.ndarray:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        rot = np.array([[c, -s], [s, c]])
        return (points - np.asarray(self.center, dtype=float)) @ rot

    def inside(self, points) -> np.ndarray:
        """Closed-rectangle membership test."""
        q = np.abs(self._to_local(as_points(points)))
        eps = 1e-9
        return (q[:, 0] <= self.width / 2 + eps) & (q[:, 1] <= self.height / 2 + eps)

    def edge_distance(self, points) -> np.ndarray:
        """Distance from each point to the rectangle perimeter."""
        q = np.abs(self._to_local(as_points(points)))
        dx = q[:, 0] - self.width / 2
        dy = q[:, 1] - self.height / 2
        outside = np.hypot(np.maximum(dx, 0), np.maximum(dy, 0))
        inside = -np.maximum(dx, dy)
        return np.where((dx <= 0) & (dy <= 0), inside, outside)


@dataclass(frozen=True)
class MeasurementNoise:
    sigma_n: float = 0.01

    def __post_init__(self):
        if not self.sigma_n >= 0:
            raise ConfigError("sigma_n must be non-negative")


@dataclass(frozen=True)
class GroundTruthPhantom:
    """Piecewise-constant hardness field with soft rectangular incisions.

    Points strictly inside an incision score ``lambda_value``, points outside
    every incision score ``gamma_value`` and points within
    ``boundary_tolerance`` of an incision edge score the midpoint of the two.
    Higher scores mean softer tissue, so incisions are the high-value class.
    """

    domain: AcquisitionDomain = field(default_factory=AcquisitionDomain)
    incisions: tuple[IncisionRect, ...] = ()
    lambda_value: float = 1.0
    gamma_value: float = 0.0
    boundary_tolerance: float | None = None

    def __post_init__(self):
        if not self.lambda_value > self.gamma_value:
            raise ConfigError("lambda_value must exceed gamma_value")
        if self.boundary_tolerance is None:
            object.__setattr__(self, "boundary_tolerance", self.domain.grid_step / 2)
        if self.boundary_tolerance < 0:
            raise ConfigError("boundary_tolerance must be non-negative")
        object.__setattr__(self, "incisions", tuple(self.incisions))
        for rect in self.incisions:
            if not np.all(self.domain.contains(rect.corners())):
                raise ConfigError(f"incision {rect} does not fit inside the domain")

    @property
    def boundary_value(self) -> float:
        return (self.lambda_value + self.gamma_value) / 2

    def labels(self, points) -> np.ndarray:
        """Label each point OUTSIDE, INSIDE or BOUNDARY."""
        p = as_points(points)
        out = np.full(len(p), OUTSIDE, dtype=np.int8)
        near = np.zeros(len(p), dtype=bool)
        for rect in self.incisions:
            d = rect.edge_distance(p)
            near |= (d < self.boundary_tolerance) | (d == 0)
            out[rect.inside(p)] = INSIDE
        out[near] = BOUNDARY
        return out

    def values(self, points) -> np.ndarray:
        p = as_points(points)
        if not np.all(self.domain.contains(p)):
            raise DomainError("point outside the acquisition domain")
        table = np.array([self.gamma_value, self.lambda_value, self.boundary_value])
        return table[self.labels(p)]

    def grid_labels(self) -> np.ndarray:
        return self.labels(self.domain.candidates())

    def grid_values(self) -> np.ndarray:
        return self.values(self.domain.candidates())


def true_hardness(phantom: GroundTruthPhantom, p) -> float:
    return float(phantom.values(p)[0])


def measure(phantom: GroundTruthPhantom, p, noise: MeasurementNoise,
            rng: np.random.Generator) -> float:
    """Noisy hardness reading at ``p``; the ideal label plus Gaussian noise."""
    value = true_hardness(phantom, p)
    if noise.sigma_n == 0:
        return value
    return value + noise.sigma_n * float(rng.standard_normal())


def two_incision_phantom(gap: float = 10.0, **kwargs) -> GroundTruthPhantom:
    """Default test sample: two parallel 30 x 10 mm incisions ``gap`` mm apart."""
    offset = (10.0 + gap) / 2
    rects = (
        IncisionRect(Point2(0.0, offset), 30.0, 10.0),
        IncisionRect(Point2(0.0, -offset), 30.0, 10.0),
    )
    return GroundTruthPhantom(incisions=rects, **kwargs)


def phantom_from_dict(cfg: dict) -> tuple[GroundTruthPhantom, MeasurementNoise]:
    """Build a phantom and its noise model from a config mapping."""
    cfg = dict(cfg or {})
    try:
        domain = AcquisitionDomain(
            half_extent=float(cfg.pop("half_extent", 25.0)),
            grid_step=float(cfg.pop("grid_step", 1.0)),
        )
        noise = MeasurementNoise(float(cfg.pop("sigma_n", 0.01)))
        rects = []
        for item in cfg.pop("incisions", None) or []:
            item = dict(item)
            cx, cy = item.pop("center")
            rects.append(IncisionRect(
                Point2(float(cx), float(cy)),
                float(item.pop("width")),
                float(item.pop("height")),
                float(item.pop("rotation", 0.0)),
            ))
            if item:
                raise ConfigError(f"unknown incision keys: {sorted(item)}")
        tol = cfg.pop("boundary_tolerance", None)
        phantom = GroundTruthPhantom(
            domain=domain,
            incisions=tuple(rects),
            lambda_value=float(cfg.pop("lambda", 1.0)),
            gamma_value=float(cfg.pop("gamma", 0.0)),
            boundary_tolerance=None if tol is None else float(tol),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad phantom config: {exc}") from exc
    if cfg:
        raise ConfigError(f"unknown phantom keys: {sorted(cfg)}")
    return phantom, noise


def write_grid_csv(path, domain: AcquisitionDomain, values: Sequence[float]) -> None:
    """Write a per-candidate field as a matrix, one row per y value.

    The first line is a comment header carrying the grid extents so files
    from different sources can be checked for alignment.
    """
    values = np.asarray(values, dtype=float)
    ny, nx = domain.shape
    if values.size != nx * ny:
        raise DomainError(f"field has {values.size} entries, grid has {nx * ny}")
    grid = values.reshape(ny, nx)
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# half_extent={domain.half_extent!r} grid_step={domain.grid_step!r} "
                 f"rows={ny} cols={nx}\n")
        writer = csv.writer(fh, lineterminator="\n")
        for row in grid:
            writer.writerow([repr(float(v)) for v in row])


def read_grid_csv(path) -> np.ndarray:
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            rows.append([float(v) for v in line.strip().split(",")])
    return np.array(rows)
