#!/usr/bin/env python3
"""
Closed loops of the trike: wheel speed, steering servo and curvature
tracking. Every run starts from rest with freshly reset controllers, so a
scenario always reproduces the same trace.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
import pandas as pd

from drive_kinematics import (
    BodyTwist, Pose, body_to_wheel_speeds, curvature, fit_circle, integrate_pose, pose_frame,
    steer_angle_ref, wheel_speeds_to_body, yaw_rate_from_steer,
)
from drive_kinematics.kinematics import MAX_STEER_ARGUMENT, SPEED_EPSILON
from exceptions.control_exceptions import ConfigMismatch, DegenerateSpeed
from lti_core import TimeSeries, delay_samples
from lti_core.discretize import zoh_state_space
from robot_sim.bldc import duty_to_voltage
from robot_sim.scenario import Scenario, SteeringPlant, TrajectoryConfig

logger = logging.getLogger(__name__)

CIRCLE_FIT_START = 10.0
LIMIT_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class LoopResult:
    """Loop trace plus the reference it tracked."""

    series: TimeSeries
    reference: np.ndarray
    saturated_share: float = 0.0


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    frame: pd.DataFrame
    summary: Dict[str, float] = field(default_factory=dict)


def _require_loop(scenario: Scenario, loop: str) -> None:
    if scenario.loop != loop:
        raise ConfigMismatch(f"Scenario loop is '{scenario.loop}', expected '{loop}'")


def run_velocity_loop(scenario: Scenario) -> LoopResult:
    """
    Wheel-speed loop in deviation variables about the operating point.

    Per tick the measured speed deviation is compared with the reference,
    the PID output (a voltage deviation) sets the duty cycle, the duty goes
    through the source voltage and, when enabled, the BLDC map, and the
    resulting voltage deviation enters the ZOH plant after its dead time.
    For the duration of the run the duty limits are handed to the
    controller as voltage-deviation limits, so its integrator stays frozen
    while the actuator is clamped.

    Returns:
        LoopResult whose series holds duty deviation (u) and measured speed
        deviation (y)

    Raises:
        ConfigMismatch: wrong loop kind, a biproper plant without delay, or
            controller limits outside the actuator range
    """
    _require_loop(scenario, "velocity")
    T = scenario.sample_time
    Ad, Bd, C, D = zoh_state_space(scenario.plant, T)
    delay = delay_samples(scenario.plant.dead_time, T)
    feedthrough = float(D[0, 0])
    if feedthrough != 0.0 and delay == 0:
        raise ConfigMismatch("Plant with direct feedthrough and no dead time forms an algebraic loop")

    operating_voltage, _ = scenario.operating_point
    source = scenario.bldc.source_voltage
    operating_duty = operating_voltage / source
    if not 0.0 <= operating_duty <= 1.0:
        raise ConfigMismatch(f"Operating voltage {operating_voltage} V is outside the source range")
    if scenario.use_bldc_map and scenario.bldc.slope_at(operating_voltage) <= 0.0:
        raise ConfigMismatch(f"BLDC map is flat at the operating voltage {operating_voltage} V")

    t = scenario.time_grid()
    n = len(t)
    reference = scenario.reference.evaluate(t)
    disturbance = scenario.disturbance.evaluate(t) if scenario.disturbance is not None else np.zeros(n)
    rng = np.random.default_rng(scenario.seed)
    noise = rng.normal(0.0, scenario.noise_std, n) if scenario.noise_std > 0.0 else np.zeros(n)

    controller = scenario.controller
    own_limits = controller.output_limits
    if scenario.actuator_limits is not None:
        controller.output_limits = _command_limits(scenario.actuator_limits, source, operating_voltage, own_limits)

    try:
        controller.reset()
        x = np.zeros((Ad.shape[0], 1))
        applied = np.zeros(n)
        duty_trace = np.zeros(n)
        measured = np.zeros(n)
        saturated = 0
        for k in range(n):
            plant_input = applied[k - delay] if delay > 0 and k >= delay else 0.0
            speed = float((C @ x)[0, 0]) + feedthrough * plant_input
            measured[k] = speed + disturbance[k] + noise[k]

            command = controller.step(reference[k] - measured[k])
            duty = (operating_voltage + command) / source
            if scenario.actuator_limits is not None:
                low, high = scenario.actuator_limits
                if controller.saturated or duty < low - LIMIT_TOLERANCE or duty > high + LIMIT_TOLERANCE:
                    saturated += 1
                duty = min(max(duty, low), high)
                voltage = duty_to_voltage(duty, source)
            else:
                voltage = duty * source
            if scenario.use_bldc_map:
                voltage = float(scenario.bldc.equivalent_voltage(voltage, operating_voltage))
            applied[k] = voltage - operating_voltage
            duty_trace[k] = duty - operating_duty

            if delay == 0:
                plant_input = applied[k]
            x = Ad @ x + Bd * plant_input
    finally:
        controller.output_limits = own_limits

    share = saturated / n if n else 0.0
    if share > 0.0:
        logger.warning(f"Actuator saturated on {share:.1%} of samples")
    return LoopResult(TimeSeries(t, duty_trace, measured), reference, share)


def _command_limits(actuator_limits, source: float, operating_voltage: float, own_limits):
    """Duty limits expressed as voltage deviations, narrowed by the controller's own clamp."""
    low, high = actuator_limits
    limits = (low * source - operating_voltage, high * source - operating_voltage)
    if own_limits is not None:
        limits = (max(limits[0], own_limits[0]), min(limits[1], own_limits[1]))
        if limits[0] > limits[1]:
            raise ConfigMismatch(f"Controller limits {own_limits} do not overlap the actuator range {actuator_limits}")
    return limits


def run_steering_loop(scenario: Scenario, steering: SteeringPlant) -> LoopResult:
    """
    Steering servo: PID on the steer-angle error driving the first-order
    actuator, whose angle is clamped at the mechanical limit.

    Returns:
        LoopResult whose series holds the steer reference (u) and angle (y)
    """
    _require_loop(scenario, "steering")
    T = scenario.sample_time
    a, b = steering.discrete_coefficients(T)
    t = scenario.time_grid()
    reference = scenario.reference.evaluate(t)
    controller = scenario.controller
    controller.reset()

    angle = 0.0
    angles = np.zeros(len(t))
    for k in range(len(t)):
        angles[k] = angle
        command = controller.step(reference[k] - angle)
        angle = min(max(a * angle + b * command, -steering.steer_limit), steering.steer_limit)
    return LoopResult(TimeSeries(t, reference, angles), reference)


def run_trajectory_loop(scenario: Scenario, cfg: TrajectoryConfig, steering: SteeringPlant) -> TrajectoryResult:
    """
    Curvature tracking at the commanded forward speed.

    The forward speed follows scenario.reference (the wheel-speed loop is
    taken as settled). Each tick the achieved steer angle gives the yaw rate
    through ω = tan(steer)/horizon, the free rear wheels are synthesized from
    (vx, ω), odometry measures the curvature, the curvature PID sets a yaw
    rate reference, steer_angle_ref turns it into the steering command and
    the pose advances along the exact arc.

    Raises:
        ConfigMismatch: wrong loop kind or controller sample times
        DegenerateSpeed: commanded forward speed is effectively zero
    """
    _require_loop(scenario, "trajectory")
    scenario.check_sample_time(cfg.curvature_controller)
    scenario.check_sample_time(cfg.steering_controller)
    T = scenario.sample_time
    t = scenario.time_grid()
    speeds = scenario.reference.evaluate(t)
    kappa_ref = cfg.reference_path.evaluate(t)
    if np.any(np.abs(speeds) < SPEED_EPSILON):
        raise DegenerateSpeed("Trajectory control needs a non-zero forward speed reference")

    a, b = steering.discrete_coefficients(T)
    omega_bound = MAX_STEER_ARGUMENT * (1.0 - 1e-9) / cfg.horizon
    curvature_pid = cfg.curvature_controller
    steering_pid = cfg.steering_controller
    curvature_pid.reset()
    steering_pid.reset()

    pose = Pose()
    steer = 0.0
    rows = []
    for k in range(len(t)):
        vx = float(speeds[k])
        omega = yaw_rate_from_steer(steer, cfg.horizon)
        omega_l, omega_r = body_to_wheel_speeds(BodyTwist(vx, omega), cfg.geometry)
        measured = curvature(wheel_speeds_to_body(omega_l, omega_r, cfg.geometry))
        rows.append((t[k], pose.x, pose.y, pose.heading, vx, omega, measured.kappa, steer))

        omega_ref = curvature_pid.step(kappa_ref[k] - measured.kappa)
        omega_ref = min(max(omega_ref, -omega_bound), omega_bound)
        steer_ref = steer_angle_ref(omega_ref, cfg.horizon)
        steer_ref = min(max(steer_ref, -steering.steer_limit), steering.steer_limit)
        command = steering_pid.step(steer_ref - steer)

        pose = integrate_pose(pose, BodyTwist(vx, omega), T)
        steer = min(max(a * steer + b * command, -steering.steer_limit), steering.steer_limit)

    frame = pose_frame(rows)
    return TrajectoryResult(frame, trajectory_summary(frame))


def trajectory_summary(frame: pd.DataFrame, fit_start: float = CIRCLE_FIT_START) -> Dict[str, float]:
    """Final curvature, and circle fit of the settled part of the path."""
    summary = {
        "final_kappa": float(frame["kappa"].iloc[-1]),
        "final_x": float(frame["x"].iloc[-1]),
        "final_y": float(frame["y"].iloc[-1]),
        "final_heading": float(frame["heading"].iloc[-1]),
    }
    settled = frame[frame["t"] >= fit_start]
    if len(settled) >= 3 and settled["kappa"].abs().max() > 1e-9:
        cx, cy, radius = fit_circle(settled["x"], settled["y"])
        distances = np.hypot(settled["x"] - cx, settled["y"] - cy)
        summary["circle_radius"] = radius
        summary["max_radial_deviation"] = float(np.max(np.abs(distances - radius)) / radius)
    else:
        summary["max_cross_track"] = float(frame["y"].abs().max())
    return summary
