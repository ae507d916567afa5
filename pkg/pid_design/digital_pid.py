#!/usr/bin/env python3
"""
Discrete PID realization

    D(z) = Kp + (Ki·T/2)(z+1)/(z-1) + Kd(z-1)/(T·z)

with a trapezoidal integrator, a backward-difference derivative on the
error and conditional-integration anti-windup when output limits are set.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from exceptions.control_exceptions import DesignError, NonpositiveSampleTime
from lti_core import DiscreteTransferFunction
from pid_design.design import PidGains

logger = logging.getLogger(__name__)


class DigitalPid:
    """
    Stateful digital PID controller.

    An instance belongs to one control loop; call step() once per sample
    period with the current error.
    """

    def __init__(self, gains: PidGains, sample_time: float,
                 output_limits: Optional[Tuple[float, float]] = None):
        """
        Initialize the controller at zero history.

        Args:
            gains: Parallel-form gains
            sample_time: Sample period T in seconds
            output_limits: Optional (min, max) clamp on the output
        """
        if not sample_time > 0.0:
            raise NonpositiveSampleTime(f"Controller sample time must be positive, got {sample_time}")
        if output_limits is not None:
            low, high = float(output_limits[0]), float(output_limits[1])
            if not low <= high:
                raise DesignError(f"Output limits must satisfy min <= max, got {output_limits}")
            output_limits = (low, high)
        self.gains = gains
        self.sample_time = float(sample_time)
        self.output_limits = output_limits
        self.reset()

    def reset(self) -> None:
        """Return to the zero-history condition."""
        self.previous_error = 0.0
        self.integral = 0.0
        self.last_output = 0.0
        self.saturated = False

    def step(self, error: float) -> float:
        """
        Advance one sample and return the control output.

        While the output is clamped the integral accumulator keeps its value,
        except when the new increment would pull the output back inside the
        limits.
        """
        g = self.gains
        half_ki_t = g.ki * self.sample_time / 2.0
        candidate = self.integral + half_ki_t * (error + self.previous_error)
        derivative = g.kd / self.sample_time * (error - self.previous_error)
        output = g.kp * error + candidate + derivative

        self.saturated = False
        if self.output_limits is not None:
            low, high = self.output_limits
            if output > high or output < low:
                self.saturated = True
                increment = candidate - self.integral
                unwinding = (output > high and increment < 0.0) or (output < low and increment > 0.0)
                if not unwinding:
                    candidate = self.integral
                    output = g.kp * error + candidate + derivative
                output = min(max(output, low), high)

        self.integral = candidate
        self.previous_error = float(error)
        self.last_output = float(output)
        return self.last_output

    def run(self, errors: Sequence[float]) -> np.ndarray:
        """Step through a whole error sequence."""
        return np.array([self.step(e) for e in errors], dtype=float)

    def transfer_function(self) -> DiscreteTransferFunction:
        """D(z) over the common denominator z(z-1)."""
        g = self.gains
        T = self.sample_time
        num = (g.kp * np.array([1.0, -1.0, 0.0])
               + g.ki * T / 2.0 * np.array([1.0, 1.0, 0.0])
               + g.kd / T * np.array([1.0, -2.0, 1.0]))
        return DiscreteTransferFunction(tuple(num), (1.0, -1.0, 0.0), T)

    def integral_term(self) -> DiscreteTransferFunction:
        """The integrator alone, (Ki·T/2)(z+1)/(z-1)."""
        half_ki_t = self.gains.ki * self.sample_time / 2.0
        return DiscreteTransferFunction((half_ki_t, half_ki_t), (1.0, -1.0), self.sample_time)

    def __repr__(self) -> str:
        return f"DigitalPid(gains={self.gains}, sample_time={self.sample_time}, limits={self.output_limits})"


def discretize_pid(gains: PidGains, sample_time: float,
                   output_limits: Optional[Tuple[float, float]] = None) -> DigitalPid:
    """
    Realize PID gains as a discrete controller.

    Raises:
        NonpositiveSampleTime: T <= 0
    """
    return DigitalPid(gains, sample_time, output_limits)


def pid_step(ctrl: DigitalPid, error: float) -> float:
    return ctrl.step(error)
