#!/usr/bin/env python3
"""
Deterministic simulation of LTI systems on sampled inputs, and step
response metrics.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Union

import numpy as np
from scipy.signal import dlsim, lfilter

from exceptions.control_exceptions import ModelError, NotSettled, SampleTimeMismatch
from lti_core.discretize import delay_samples, zoh_state_space
from lti_core.transfer_function import (
    Coefficients, DiscreteTransferFunction, TimeSeries, TransferFunction,
)

logger = logging.getLogger(__name__)

SETTLING_BAND = 0.02
SETTLED_TAIL = 0.10
SAMPLE_TIME_TOLERANCE = 1e-6

System = Union[TransferFunction, DiscreteTransferFunction]


def _shift(values: np.ndarray, samples: int) -> np.ndarray:
    """Delay a sequence by whole samples, zero-filling the front."""
    if samples == 0:
        return values
    shifted = np.zeros_like(values)
    if samples < len(values):
        shifted[samples:] = values[:len(values) - samples]
    return shifted


def simulate(sys: System, signal: Union[TimeSeries, Coefficients], sample_time: float) -> TimeSeries:
    """
    Simulate a system from rest on a sampled input.

    Continuous systems see the input through a zero-order hold and are
    propagated with their exact ZOH realization; discrete systems are
    filtered directly.

    Args:
        sys: Continuous or discrete transfer function
        signal: TimeSeries (its u column is used) or raw input samples
        sample_time: Sample period T in seconds

    Returns:
        TimeSeries carrying the input and the simulated output

    Raises:
        SampleTimeMismatch: T disagrees with the series or the discrete system
    """
    if isinstance(signal, TimeSeries):
        if len(signal) >= 2 and abs(signal.sample_time - sample_time) > SAMPLE_TIME_TOLERANCE * sample_time:
            raise SampleTimeMismatch(
                f"Series sampled at {signal.sample_time:.9g} s, simulation requested at {sample_time:.9g} s")
        series = signal
    else:
        series = TimeSeries.from_input(signal, sample_time)
    u = series.u

    if isinstance(sys, DiscreteTransferFunction):
        if abs(sys.sample_time - sample_time) > SAMPLE_TIME_TOLERANCE * sample_time:
            raise SampleTimeMismatch(
                f"System sampled at {sys.sample_time:.9g} s, simulation requested at {sample_time:.9g} s")
        b, a = sys.filter_coefficients()
        y = lfilter(b, a, u)
    elif isinstance(sys, TransferFunction):
        samples = delay_samples(sys.dead_time, sample_time)
        Ad, Bd, C, D = zoh_state_space(sys, sample_time)
        if Ad.shape[0] == 0:
            y = D[0, 0] * u
        else:
            _, yout, _ = dlsim((Ad, Bd, C, D, sample_time), u)
            y = np.asarray(yout, dtype=float).reshape(-1)
        y = _shift(y, samples)
    else:
        raise ModelError(f"Cannot simulate object of type {type(sys).__name__}")

    return series.with_output(y)


@dataclass(frozen=True)
class StepMetrics:
    """Step response summary. Times are measured from the first sample."""

    rise_time_10_90: float
    overshoot: float
    settling_time_2pct: float
    steady_state: float
    peak: float
    peak_time: float
    time_to_90: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def _crossing_time(t: np.ndarray, progress: np.ndarray, level: float) -> float:
    """First time the normalized progress reaches level, linearly interpolated."""
    above = np.nonzero(progress >= level)[0]
    if len(above) == 0:
        raise NotSettled(f"Response never reaches {level:.0%} of its final value")
    k = int(above[0])
    if k == 0:
        return float(t[0])
    p0, p1 = progress[k - 1], progress[k]
    fraction = (level - p0) / (p1 - p0) if p1 != p0 else 0.0
    return float(t[k - 1] + fraction * (t[k] - t[k - 1]))


def step_metrics(response: TimeSeries) -> StepMetrics:
    """
    Rise time (10-90 %), overshoot, 2 % settling time and steady state.

    The steady state is the last output sample and the step size is measured
    from the first one. A response with no net change reports zeros.

    Raises:
        NotSettled: the last 10 % of samples leave the 2 % band
    """
    t = response.t
    y = response.y
    if len(y) == 0:
        raise NotSettled("Empty response")
    steady = float(y[-1])
    initial = float(y[0])
    delta = steady - initial
    if abs(delta) <= 1e-12 * max(1.0, abs(steady)):
        return StepMetrics(0.0, 0.0, 0.0, steady, steady, float(t[0]), 0.0)

    band = SETTLING_BAND * abs(delta)
    tail = max(1, int(np.ceil(SETTLED_TAIL * len(y))))
    if np.any(np.abs(y[-tail:] - steady) > band):
        raise NotSettled(f"Last {tail} samples leave the {SETTLING_BAND:.0%} band around {steady:.9g}")

    progress = (y - initial) / delta
    t10 = _crossing_time(t, progress, 0.1)
    t90 = _crossing_time(t, progress, 0.9)

    peak_index = int(np.argmax(progress))
    overshoot = max(0.0, float(progress[peak_index]) - 1.0)

    outside = np.nonzero(np.abs(y - steady) > band)[0]
    settling = float(t[outside[-1] + 1] - t[0]) if len(outside) else 0.0

    logger.debug(f"Step metrics: rise={t90 - t10:.6g}s, overshoot={overshoot:.4g}, settling={settling:.6g}s")
    return StepMetrics(
        rise_time_10_90=t90 - t10,
        overshoot=overshoot,
        settling_time_2pct=settling,
        steady_state=steady,
        peak=float(y[peak_index]),
        peak_time=float(t[peak_index] - t[0]),
        time_to_90=t90 - float(t[0]),
    )
