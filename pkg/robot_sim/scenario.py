#!/usr/bin/env python3
"""
Scenario description for the closed-loop simulator: reference signals,
loop topology, actuator limits and the steering and trajectory settings.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from drive_kinematics import WheelGeometry
from exceptions.control_exceptions import ConfigMismatch
from lti_core import TransferFunction
from pid_design import DigitalPid
from robot_sim.bldc import BldcMap
from sysid.iv_estimator import prbs

logger = logging.getLogger(__name__)

SIGNAL_KINDS = ("zero", "step", "ramp", "sine", "pulse", "prbs")
LOOP_KINDS = ("velocity", "steering", "trajectory", "open_loop")
MIN_DURATION_SAMPLES = 10


@dataclass(frozen=True)
class SignalSpec:
    """
    Reference or disturbance signal.

    amplitude is the step height, ramp slope per second, sine or pulse
    amplitude, or PRBS level; the signal is zero before start.
    """

    kind: str = "step"
    amplitude: float = 1.0
    start: float = 0.0
    frequency: float = 0.125
    width: float = 1.0
    hold: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise ConfigMismatch(f"Unknown signal kind '{self.kind}', expected one of {', '.join(SIGNAL_KINDS)}")
        if self.kind == "sine" and not self.frequency > 0.0:
            raise ConfigMismatch("Sine frequency must be positive")
        if self.kind == "pulse" and not self.width > 0.0:
            raise ConfigMismatch("Pulse width must be positive")
        if self.kind == "prbs" and int(self.hold) < 1:
            raise ConfigMismatch("PRBS hold must be at least one sample")

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """Sample the signal at the given times."""
        t = np.asarray(t, dtype=float)
        active = t >= self.start - 1e-12
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "step":
            return np.where(active, self.amplitude, 0.0)
        if self.kind == "ramp":
            return np.where(active, self.amplitude * (t - self.start), 0.0)
        if self.kind == "sine":
            return np.where(active, self.amplitude * np.sin(2.0 * math.pi * self.frequency * (t - self.start)), 0.0)
        if self.kind == "pulse":
            return np.where(active & (t < self.start + self.width - 1e-12), self.amplitude, 0.0)
        values = np.zeros_like(t)
        first = int(np.argmax(active)) if active.any() else len(t)
        if first < len(t):
            values[first:] = prbs(len(t) - first, self.amplitude, int(self.hold), self.seed)
        return values


@dataclass(frozen=True)
class SteeringPlant:
    """First-order steering actuator with a mechanical limit."""

    time_constant: float = 0.2
    gain: float = 1.0
    steer_limit: float = 0.5

    def __post_init__(self):
        if not self.time_constant > 0.0:
            raise ConfigMismatch(f"Steering time constant must be positive, got {self.time_constant}")
        if not self.steer_limit > 0.0:
            raise ConfigMismatch(f"Steer limit must be positive, got {self.steer_limit}")

    def discrete_coefficients(self, sample_time: float) -> Tuple[float, float]:
        """ZOH recursion steer[k+1] = a·steer[k] + b·command[k]."""
        a = math.exp(-sample_time / self.time_constant)
        return a, self.gain * (1.0 - a)


@dataclass(frozen=True)
class TrajectoryConfig:
    """Curvature loop around the steering servo."""

    curvature_controller: DigitalPid
    steering_controller: DigitalPid
    horizon: float = 1.0
    reference_path: SignalSpec = field(default_factory=lambda: SignalSpec("step", 0.5))
    geometry: WheelGeometry = field(default_factory=WheelGeometry)


@dataclass(frozen=True)
class Scenario:
    """
    One simulation run.

    reference is the speed deviation for velocity loops, the steer angle
    for steering loops, the forward speed for trajectory runs and the
    voltage deviation for open-loop experiments.
    """

    loop: str
    plant: TransferFunction
    controller: Optional[DigitalPid]
    sample_time: float
    duration: float
    reference: SignalSpec
    disturbance: Optional[SignalSpec] = None
    actuator_limits: Optional[Tuple[float, float]] = (0.0, 1.0)
    seed: int = 0
    noise_std: float = 0.0
    operating_point: Tuple[float, float] = (11.0, 1.0)
    bldc: BldcMap = field(default_factory=BldcMap)
    use_bldc_map: bool = True

    def __post_init__(self):
        if self.loop not in LOOP_KINDS:
            raise ConfigMismatch(f"Unknown loop '{self.loop}', expected one of {', '.join(LOOP_KINDS)}")
        if not self.sample_time > 0.0:
            raise ConfigMismatch(f"Sample time must be positive, got {self.sample_time}")
        if self.duration < MIN_DURATION_SAMPLES * self.sample_time - 1e-12:
            raise ConfigMismatch(f"Duration {self.duration} s is shorter than {MIN_DURATION_SAMPLES} samples")
        if self.loop != "open_loop":
            if self.controller is None:
                raise ConfigMismatch(f"A {self.loop} loop needs a controller")
            self.check_sample_time(self.controller)
        if self.actuator_limits is not None:
            low, high = self.actuator_limits
            if not 0.0 <= low <= high <= 1.0:
                raise ConfigMismatch(f"Actuator limits must satisfy 0 <= min <= max <= 1, got {self.actuator_limits}")
        if self.noise_std < 0.0:
            raise ConfigMismatch("Noise standard deviation must be non-negative")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.sample_time))

    def time_grid(self) -> np.ndarray:
        return self.sample_time * np.arange(self.steps)

    def check_sample_time(self, controller: DigitalPid) -> None:
        if abs(controller.sample_time - self.sample_time) > 1e-9 * self.sample_time:
            raise ConfigMismatch(
                f"Controller sample time {controller.sample_time} s differs from scenario {self.sample_time} s")
