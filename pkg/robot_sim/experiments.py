#!/usr/bin/env python3
"""
Open-loop validation experiments: replaying step, ramp and sine inputs on
the plant, comparing a model with recorded data and calibrating the plant
gain against a measured static slope.
"""

import logging
from dataclasses import dataclass

import numpy as np

from exceptions.control_exceptions import ConfigMismatch, SimulationError
from lti_core import TimeSeries, TransferFunction, dc_gain, simulate
from robot_sim.scenario import Scenario, SignalSpec
from sysid.iv_estimator import normalized_fit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValidationReport:
    fit: float
    max_abs_error: float
    rms_error: float


def open_loop_experiment(plant: TransferFunction, input_kind: str, amplitude: float, sample_time: float,
                         duration: float, start: float = 0.0, frequency: float = 0.125) -> TimeSeries:
    """
    Apply a deviation-variable input to the plant from rest.

    Args:
        plant: Plant model
        input_kind: step, ramp or sine (any SignalSpec kind is accepted)
        amplitude: Step height, ramp slope per second or sine amplitude
        sample_time: Sample period in seconds
        duration: Record length in seconds
        start: Time at which the input switches on
        frequency: Sine frequency in Hz

    Returns:
        TimeSeries of input and plant output deviations
    """
    signal = SignalSpec(input_kind, amplitude, start=start, frequency=frequency)
    steps = int(round(duration / sample_time))
    if steps < 1:
        raise SimulationError(f"Duration {duration} s holds no samples at T={sample_time} s")
    t = sample_time * np.arange(steps)
    return simulate(plant, TimeSeries(t, signal.evaluate(t)), sample_time)


def run_open_loop(scenario: Scenario) -> TimeSeries:
    """Open-loop scenario: the reference signal drives the plant directly."""
    if scenario.loop != "open_loop":
        raise ConfigMismatch(f"Scenario loop is '{scenario.loop}', expected 'open_loop'")
    t = scenario.time_grid()
    result = simulate(scenario.plant, TimeSeries(t, scenario.reference.evaluate(t)), scenario.sample_time)
    if scenario.disturbance is None and scenario.noise_std == 0.0:
        return result
    y = result.y.copy()
    if scenario.disturbance is not None:
        y += scenario.disturbance.evaluate(t)
    if scenario.noise_std > 0.0:
        y += np.random.default_rng(scenario.seed).normal(0.0, scenario.noise_std, len(t))
    return result.with_output(y)


def compare_response(model: TransferFunction, data: TimeSeries) -> ValidationReport:
    """Simulate the model on the recorded input and score it against the output."""
    predicted = simulate(model, data, data.sample_time).y
    error = data.y - predicted
    report = ValidationReport(
        fit=normalized_fit(data.y, predicted),
        max_abs_error=float(np.max(np.abs(error))),
        rms_error=float(np.sqrt(np.mean(error ** 2))),
    )
    logger.info(f"Model validation: fit={report.fit:.4f}, max error={report.max_abs_error:.4g}")
    return report


def calibrate_gain(plant: TransferFunction, dc_slope: float) -> float:
    """
    Gain K such that K·plant has the given static speed/voltage slope.

    Raises:
        SimulationError: the plant has zero DC gain
    """
    gain = dc_gain(plant)
    if abs(gain) < 1e-12:
        raise SimulationError("Plant has zero DC gain; cannot calibrate")
    return dc_slope / gain
