#!/usr/bin/env python3
"""
Rear-wheel differential-drive odometry, curvature and the steering
linearization tan(steer) = ω·horizon.

Wheel speeds relate to the body twist by

    V_R = vx + ω·d/2
    V_L = vx - ω·d/2

so ω = (V_R - V_L)/d, positive anticlockwise.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from exceptions.control_exceptions import (
    DegenerateSpeed, HorizonNonpositive, KinematicsError, SteerSaturated,
)
from lti_core import wrap_angle

logger = logging.getLogger(__name__)

SPEED_EPSILON = 1e-6
STRAIGHT_TOLERANCE = 1e-12
MAX_STEER_ARGUMENT = math.tan(math.radians(85.0))
POSE_COLUMNS = ["t", "x", "y", "heading", "vx", "omega", "kappa", "steer"]


@dataclass(frozen=True)
class WheelGeometry:
    wheel_radius: float = 0.1
    track_width: float = 0.4

    def __post_init__(self):
        if not self.wheel_radius > 0.0:
            raise KinematicsError(f"Wheel radius must be positive, got {self.wheel_radius}")
        if not self.track_width > 0.0:
            raise KinematicsError(f"Track width must be positive, got {self.track_width}")


@dataclass(frozen=True)
class BodyTwist:
    vx: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.vx) and math.isfinite(self.omega)):
            raise KinematicsError("Body twist must be finite")


@dataclass(frozen=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))


@dataclass(frozen=True)
class CurvatureSample:
    """Curvature and signed radius; radius is None on a straight line."""

    kappa: float
    radius: Optional[float]

    @property
    def is_straight(self) -> bool:
        return self.radius is None


STRAIGHT_LINE = CurvatureSample(0.0, None)


def wheel_speeds_to_body(omega_l: float, omega_r: float, geom: WheelGeometry) -> BodyTwist:
    """Rear wheel angular velocities (rad/s) to forward speed and yaw rate."""
    v_l = geom.wheel_radius * omega_l
    v_r = geom.wheel_radius * omega_r
    return BodyTwist((v_l + v_r) / 2.0, (v_r - v_l) / geom.track_width)


def body_to_wheel_speeds(twist: BodyTwist, geom: WheelGeometry) -> Tuple[float, float]:
    """
    Wheel angular velocities of the free rear wheels for a body twist.

    Returns:
        Tuple (omega_l, omega_r) in rad/s
    """
    half = twist.omega * geom.track_width / 2.0
    return (twist.vx - half) / geom.wheel_radius, (twist.vx + half) / geom.wheel_radius


def curvature(twist: BodyTwist, speed_epsilon: float = SPEED_EPSILON) -> CurvatureSample:
    """
    κ = ω/vx with the signed radius vx/ω.

    Raises:
        DegenerateSpeed: |vx| < speed_epsilon while turning
    """
    if abs(twist.vx) < speed_epsilon:
        if twist.omega == 0.0:
            return STRAIGHT_LINE
        raise DegenerateSpeed(f"vx={twist.vx:.3g} m/s with omega={twist.omega:.6g} rad/s")
    if twist.omega == 0.0:
        return STRAIGHT_LINE
    return CurvatureSample(twist.omega / twist.vx, twist.vx / twist.omega)


def radius_from_wheels(v_l: float, v_r: float, d: float) -> Optional[float]:
    """
    Signed turning radius to the wheel midpoint, (d/2)(v_r + v_l)/(v_r - v_l).

    Returns:
        Radius in metres, or None for straight-line motion
    """
    difference = v_r - v_l
    if abs(difference) < STRAIGHT_TOLERANCE * max(abs(v_l), abs(v_r), SPEED_EPSILON):
        return None
    return (d / 2.0) * (v_r + v_l) / difference


def yaw_rate_from_steer(steer: float, horizon: float) -> float:
    """Inverse of the steering linearization, ω = tan(steer)/horizon."""
    if not horizon > 0.0:
        raise HorizonNonpositive(f"Horizon must be positive, got {horizon}")
    return math.tan(steer) / horizon


def steer_angle_ref(omega: float, horizon: float, steer_limit: Optional[float] = None) -> float:
    """
    Steering reference atan(ω·horizon).

    Raises:
        HorizonNonpositive: horizon <= 0
        SteerSaturated: |ω·horizon| >= tan(85°) or the result exceeds steer_limit
    """
    if not horizon > 0.0:
        raise HorizonNonpositive(f"Horizon must be positive, got {horizon}")
    argument = omega * horizon
    if abs(argument) >= MAX_STEER_ARGUMENT:
        raise SteerSaturated(f"|omega·horizon| = {abs(argument):.6g} exceeds tan(85 deg)")
    steer = math.atan(argument)
    if steer_limit is not None and abs(steer) > steer_limit:
        raise SteerSaturated(f"Steer reference {steer:.6g} rad exceeds limit {steer_limit:.6g} rad")
    return steer


def integrate_pose(pose: Pose, twist: BodyTwist, dt: float) -> Pose:
    """
    Advance a pose along the exact arc for a constant twist over dt.

    The chord form keeps the update smooth as ω goes to zero.
    """
    if not dt > 0.0:
        raise KinematicsError(f"Integration step must be positive, got {dt}")
    dtheta = twist.omega * dt
    distance = twist.vx * dt
    half = dtheta / 2.0
    chord = distance * (math.sin(half) / half if half != 0.0 else 1.0)
    direction = pose.heading + half
    return Pose(pose.x + chord * math.cos(direction),
                pose.y + chord * math.sin(direction),
                pose.heading + dtheta)


def fit_circle(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float, float]:
    """
    Algebraic least-squares circle through points.

    Returns:
        Tuple (centre x, centre y, radius)
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) < 3:
        raise KinematicsError("Circle fit needs at least three points")
    design = np.column_stack([x, y, np.ones_like(x)])
    (a, b, c), _, rank, _ = np.linalg.lstsq(design, x ** 2 + y ** 2, rcond=None)
    if rank < 3:
        raise KinematicsError("Points are collinear; no circle fits")
    cx, cy = a / 2.0, b / 2.0
    return float(cx), float(cy), float(math.sqrt(c + cx ** 2 + cy ** 2))


def pose_frame(rows: Sequence[Tuple[float, ...]]) -> pd.DataFrame:
    """Pose trace table with the t,x,y,heading,vx,omega,kappa,steer schema."""
    return pd.DataFrame(list(rows), columns=POSE_COLUMNS)
