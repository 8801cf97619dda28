import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rasec.domain import AcquisitionDomain, Point2
from rasec.energy import (EnergyLedger, RobotLayout, accrue, base_angle, step_distance,
                          step_rotation, wrap_abs)
from rasec.errors import ConfigError, DomainError

LAYOUT = RobotLayout()
coord = st.floats(-25, 25, allow_nan=False)
pt = st.tuples(coord, coord)


def test_distance_examples():
    assert step_distance((0, 0), (0, 0)) == 0.0
    assert step_distance((0, 0), (3, 4)) == 5.0


@settings(max_examples=200, deadline=None)
@given(pt, pt)
def test_distance_matches_scalar_oracle(a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    assert step_distance(a, b) == pytest.approx((dx * dx + dy * dy) ** 0.5, abs=1e-12)


def test_angle_examples():
    assert base_angle(LAYOUT, (0.0, 0.0)) == 0.0
    assert abs(base_angle(LAYOUT, (25.0, -50.0))) == pytest.approx(math.pi / 2)
    assert abs(base_angle(LAYOUT, (25.0, 0.0))) == pytest.approx(0.4636476090008061, abs=1e-12)


def test_angle_range_and_sign():
    assert base_angle(LAYOUT, (0.0, -60.0)) == pytest.approx(math.pi)
    assert np.sign(base_angle(LAYOUT, (10.0, 0.0))) == -np.sign(base_angle(LAYOUT, (-10.0, 0.0)))


def test_angle_at_base_raises():
    with pytest.raises(DomainError):
        base_angle(LAYOUT, (0.0, -50.0))


def test_rotation_examples():
    assert step_rotation(LAYOUT, (3.0, 4.0), (3.0, 4.0)) == 0.0
    r = step_rotation(LAYOUT, (25.0, 0.0), (-25.0, 0.0))
    assert r == pytest.approx(0.9272952180016122, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(pt, pt)
def test_rotation_symmetric_and_bounded(a, b):
    r = step_rotation(LAYOUT, a, b)
    assert r == step_rotation(LAYOUT, b, a)
    assert 0.0 <= r <= math.pi


def test_wrap_abs():
    np.testing.assert_allclose(wrap_abs(np.array([0.0, math.pi, 1.5 * math.pi, -3.0])),
                               [0.0, math.pi, 0.5 * math.pi, 3.0])


@settings(max_examples=100, deadline=None)
@given(pt, pt, pt)
def test_frame_independence(a, b, shift):
    moved = RobotLayout(Point2(shift[0], -50.0 + shift[1]))
    a2 = (a[0] + shift[0], a[1] + shift[1])
    b2 = (b[0] + shift[0], b[1] + shift[1])
    assert step_distance(a2, b2) == pytest.approx(step_distance(a, b), abs=1e-12)
    assert step_rotation(moved, a2, b2) == pytest.approx(step_rotation(LAYOUT, a, b), abs=1e-12)


def test_ledger_additivity():
    led = EnergyLedger()
    accrue(led, LAYOUT, (0, 0), (0, 0))
    assert (led.cumulative_distance, led.cumulative_rotation) == (0.0, 0.0)
    accrue(led, LAYOUT, (0, 0), (0, 5))
    accrue(led, LAYOUT, (0, 5), (0, 10))
    assert led.cumulative_distance == 10.0
    rows = list(led.rows())
    assert [r[0] for r in rows] == [1, 2, 3]
    assert rows[-1][2] == 10.0


@pytest.mark.parametrize("seed", range(10))
def test_ledger_triangle_and_monotone(seed):
    rng = np.random.default_rng(seed)
    path = rng.uniform(-25, 25, size=(20, 2))
    led = EnergyLedger()
    for a, b in zip(path, path[1:]):
        accrue(led, LAYOUT, a, b)
    assert led.cumulative_distance >= step_distance(path[0], path[-1]) - 1e-12
    assert np.all(np.diff(led.dist_cum()) >= 0) and np.all(np.diff(led.rot_cum()) >= 0)
    assert led.cumulative_rotation <= math.pi * len(led.rot_steps)
    assert len(led.dist_steps) == len(led.rot_steps) == 19


def test_layout_validation():
    with pytest.raises(ConfigError):
        RobotLayout(forward_axis=(0.0, 0.0))
    with pytest.raises(ConfigError):
        RobotLayout(base_position=(0.0, 0.0)).check_outside(AcquisitionDomain())
    RobotLayout().check_outside(AcquisitionDomain())
    assert RobotLayout(forward_axis=(0.0, 3.0)).forward_axis == Point2(0.0, 1.0)
