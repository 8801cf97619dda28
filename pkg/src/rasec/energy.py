"""Planar kinematic proxy for the palpation robot's energy use.

The sensor's travel is measured as Euclidean distance between consecutive
contact points. The base-link rotation is approximated by the bearing of the
contact point as seen from the robot base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import AcquisitionDomain, Point2, as_points
from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class RobotLayout:
    base_position: Point2 = Point2(0.0, -50.0)
    forward_axis: Point2 = Point2(0.0, 1.0)

    def __post_init__(self):
        fx, fy = map(float, self.forward_axis)
        norm = math.hypot(fx, fy)
        if norm == 0:
            raise ConfigError("forward_axis must be non-zero")
        object.__setattr__(self, "forward_axis", Point2(fx / norm, fy / norm))
        object.__setattr__(self, "base_position", Point2(*map(float, self.base_position)))

    def check_outside(self, domain: AcquisitionDomain) -> None:
        if domain.contains(self.base_position)[0]:
            raise ConfigError("robot base must lie outside the acquisition domain")

    def angles(self, points) -> np.ndarray:
        """Vectorised :func:`base_angle`."""
        p = as_points(points)
        ray = p - np.asarray(self.base_position)
        if np.any(np.all(ray == 0, axis=1)):
            raise DomainError("bearing undefined at the robot base")
        fx, fy = self.forward_axis
        cross = fx * ray[:, 1] - fy * ray[:, 0]
        dot = fx * ray[:, 0] + fy * ray[:, 1]
        ang = np.arctan2(cross, dot)
        return np.where(ang <= -math.pi, math.pi, ang)


def step_distance(a, b) -> float:
    return math.dist(tuple(map(float, a)), tuple(map(float, b)))


def base_angle(layout: RobotLayout, p) -> float:
    """Signed bearing of ``p`` from the base, relative to the forward axis, in (-pi, pi]."""
    return float(layout.angles(p)[0])


def wrap_abs(delta):
    """Absolute angular difference folded into [0, pi]."""
    d = np.mod(np.abs(delta), 2 * math.pi)
    return np.minimum(d, 2 * math.pi - d)


def step_rotation(layout: RobotLayout, a, b) -> float:
    return float(wrap_abs(base_angle(layout, b) - base_angle(layout, a)))


@dataclass
class EnergyLedger:
    dist_steps: list[float] = field(default_factory=list)
    rot_steps: list[float] = field(default_factory=list)

    @property
    def cumulative_distance(self) -> float:
        return float(sum(self.dist_steps))

    @property
    def cumulative_rotation(self) -> float:
        return float(sum(self.rot_steps))

    def dist_cum(self) -> np.ndarray:
        return np.cumsum(self.dist_steps)

    def rot_cum(self) -> np.ndarray:
        return np.cumsum(self.rot_steps)

    def rows(self):
        """(step, dist_step, dist_cum, rot_step, rot_cum) tuples."""
        dc, rc = self.dist_cum(), self.rot_cum()
        for i, (d, r) in enumerate(zip(self.dist_steps, self.rot_steps)):
            yield i + 1, d, float(dc[i]), r, float(rc[i])


def accrue(ledger: EnergyLedger, layout: RobotLayout, src, dst) -> EnergyLedger:
    ledger.dist_steps.append(step_distance(src, dst))
    ledger.rot_steps.append(step_rotation(layout, src, dst))
    return ledger
