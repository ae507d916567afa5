"""
Closed-loop simulator of the trike: wheel-speed, steering and trajectory
loops plus open-loop validation experiments.
"""

from robot_sim.bldc import BldcMap, bldc_plant_system, bldc_static, duty_to_voltage
from robot_sim.experiments import (
    ValidationReport, calibrate_gain, compare_response, open_loop_experiment, run_open_loop,
)
from robot_sim.loops import (
    LoopResult, TrajectoryResult, run_steering_loop, run_trajectory_loop, run_velocity_loop,
    trajectory_summary,
)
from robot_sim.scenario import Scenario, SignalSpec, SteeringPlant, TrajectoryConfig

__all__ = [
    "BldcMap", "bldc_plant_system", "bldc_static", "duty_to_voltage",
    "ValidationReport", "calibrate_gain", "compare_response", "open_loop_experiment", "run_open_loop",
    "LoopResult", "TrajectoryResult", "run_steering_loop", "run_trajectory_loop", "run_velocity_loop",
    "trajectory_summary", "Scenario", "SignalSpec", "SteeringPlant", "TrajectoryConfig",
]
