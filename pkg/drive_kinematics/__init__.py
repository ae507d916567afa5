"""
Differential-drive odometry, curvature estimation and steering linearization.
"""

from drive_kinematics.kinematics import (
    POSE_COLUMNS, STRAIGHT_LINE, BodyTwist, CurvatureSample, Pose, WheelGeometry,
    body_to_wheel_speeds, curvature, fit_circle, integrate_pose, pose_frame,
    radius_from_wheels, steer_angle_ref, wheel_speeds_to_body, yaw_rate_from_steer,
)

__all__ = [
    "POSE_COLUMNS", "STRAIGHT_LINE", "BodyTwist", "CurvatureSample", "Pose", "WheelGeometry",
    "body_to_wheel_speeds", "curvature", "fit_circle", "integrate_pose", "pose_frame",
    "radius_from_wheels", "steer_angle_ref", "wheel_speeds_to_body", "yaw_rate_from_steer",
]
