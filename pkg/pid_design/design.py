#!/usr/bin/env python3
"""
Frequency-domain PID synthesis at a single gain-crossover frequency.

At the crossover ω_w1 the controller is required to satisfy
|D(jω_w1)|·|G(jω_w1)| = 1 with arg D(jω_w1) = theta. Splitting D into real
and imaginary parts gives

    kp = cos(theta) / |G|
    kd·ω - ki/ω = sin(theta) / |G|

so once ki is chosen the remaining gains follow.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from exceptions.control_exceptions import (
    DesignError, NonpositiveRiseTime, PlantZeroGain, ThetaOutOfRange,
)
from lti_core import TransferFunction, c2d_zoh, freq_response, w_frequency, w_transform, wrap_angle

logger = logging.getLogger(__name__)

RISE_TIME_BANDWIDTH = 1.8
DEFAULT_KI_DIVISOR = 20.0
ZERO_GAIN = 1e-12
VERIFY_TOLERANCE = 1e-8


@dataclass(frozen=True)
class PidGains:
    """Parallel-form PID gains."""

    kp: float
    ki: float
    kd: float

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DesignError(f"Gain {name} must be finite")
            object.__setattr__(self, name, value)

    def controller_response(self, omega: float) -> complex:
        """D(jω) = kp + ki/(jω) + kd·jω."""
        if not omega > 0.0:
            raise DesignError(f"Controller response needs omega > 0, got {omega:.9g}")
        return complex(self.kp, self.kd * omega - self.ki / omega)

    def scaled(self, factor: float) -> "PidGains":
        return PidGains(self.kp * factor, self.ki * factor, self.kd * factor)


@dataclass(frozen=True)
class DesignSpec:
    """
    Closed-loop specification that generates the gains.

    omega_w1 and ki are optional; when absent they come from the rise-time
    rule and the default ki rule respectively.
    """

    rise_time: float
    theta: float
    omega_w1: Optional[float] = None
    ki: Optional[float] = None

    def __post_init__(self):
        if not self.rise_time > 0.0:
            raise NonpositiveRiseTime(f"Rise time must be positive, got {self.rise_time}")
        if not abs(self.theta) < math.pi / 2.0:
            raise ThetaOutOfRange(f"Phase angle must satisfy |theta| < pi/2, got {self.theta}")
        if self.omega_w1 is not None and not self.omega_w1 > 0.0:
            raise DesignError(f"Crossover frequency must be positive, got {self.omega_w1}")
        if self.ki is not None and not self.ki >= 0.0:
            raise DesignError(f"ki must be non-negative, got {self.ki}")

    def crossover(self) -> float:
        if self.omega_w1 is not None:
            return float(self.omega_w1)
        return crossover_from_rise_time(self.rise_time)


@dataclass(frozen=True)
class DesignResult:
    omega_w1: float
    plant_gain: float
    plant_phase: float
    gains: PidGains
    domain: str


@dataclass(frozen=True)
class DesignReport:
    """Loop quantities at the crossover frequency."""

    loop_gain: float
    controller_phase: float
    phase_margin: float
    matches: bool


def crossover_from_rise_time(rise_time: float) -> float:
    """
    Gain crossover for a rise-time target, ω_w1 = 1.8/tr.

    Raises:
        NonpositiveRiseTime: tr <= 0
    """
    if not rise_time > 0.0:
        raise NonpositiveRiseTime(f"Rise time must be positive, got {rise_time}")
    return RISE_TIME_BANDWIDTH / rise_time


def default_ki(kp: float, omega_w1: float) -> float:
    """Integral gain used when none is chosen: kp·ω_w1/20."""
    return kp * omega_w1 / DEFAULT_KI_DIVISOR


def _plant_gain(plant: TransferFunction, omega_w1: float) -> float:
    magnitude = freq_response(plant, omega_w1).magnitude
    if magnitude < ZERO_GAIN:
        raise PlantZeroGain(f"|G(j{omega_w1:.9g})| = {magnitude:.3g}")
    return magnitude


def design_pid(plant: TransferFunction, omega_w1: float, theta: float, ki: float) -> PidGains:
    """
    Solve the crossover conditions for kp and kd given ki.

    Args:
        plant: Plant (s-plane or w-plane) evaluated at jω_w1
        omega_w1: Gain crossover frequency in rad/s
        theta: Controller phase at crossover in radians, |theta| < pi/2
        ki: Chosen integral gain, >= 0

    Returns:
        PidGains with |D·G| = 1 and arg D = theta at ω_w1

    Raises:
        PlantZeroGain: |G(jω_w1)| below 1e-12
        ThetaOutOfRange: |theta| >= pi/2
    """
    if not abs(theta) < math.pi / 2.0:
        raise ThetaOutOfRange(f"Phase angle must satisfy |theta| < pi/2, got {theta}")
    if not omega_w1 > 0.0:
        raise DesignError(f"Crossover frequency must be positive, got {omega_w1}")
    if not ki >= 0.0:
        raise DesignError(f"ki must be non-negative, got {ki}")

    magnitude = _plant_gain(plant, omega_w1)
    kp = math.cos(theta) / magnitude
    kd = (math.sin(theta) / magnitude + ki / omega_w1) / omega_w1
    gains = PidGains(kp, ki, kd)
    logger.debug(f"Designed at omega={omega_w1:.6g}: |G|={magnitude:.9g}, gains={gains}")
    return gains


def design_from_spec(plant: TransferFunction, spec: DesignSpec, sample_time: Optional[float] = None,
                     domain: str = "s") -> DesignResult:
    """
    Design from a DesignSpec on the s-plane plant or on its w-plane image.

    With domain "w" the plant is first discretized with a zero-order hold
    and mapped to the w-plane, and the crossover is taken at the w-plane
    frequency matching ω_w1.
    """
    omega = spec.crossover()
    if domain == "s":
        design_plant, design_omega = plant, omega
    elif domain == "w":
        if sample_time is None:
            raise DesignError("w-plane design requires a sample time")
        design_plant = w_transform(c2d_zoh(plant, sample_time))
        design_omega = w_frequency(omega, sample_time)
    else:
        raise DesignError(f"Unknown design domain '{domain}', expected 's' or 'w'")

    magnitude = _plant_gain(design_plant, design_omega)
    ki = spec.ki if spec.ki is not None else default_ki(math.cos(spec.theta) / magnitude, design_omega)
    gains = design_pid(design_plant, design_omega, spec.theta, ki)
    point = freq_response(design_plant, design_omega)
    logger.info(f"PID design ({domain}-plane): omega_w1={design_omega:.6g} rad/s, "
                f"kp={gains.kp:.6g}, ki={gains.ki:.6g}, kd={gains.kd:.6g}")
    return DesignResult(design_omega, magnitude, point.phase_unwrapped, gains, domain)


def verify_design(plant: TransferFunction, gains: PidGains, omega_w1: float,
                  theta: Optional[float] = None, tolerance: float = VERIFY_TOLERANCE) -> DesignReport:
    """
    Check the crossover identities for a set of gains.

    matches is True when |D·G| is 1 within tolerance and, if theta is
    given, arg D equals theta within tolerance.
    """
    magnitude = _plant_gain(plant, omega_w1)
    plant_point = freq_response(plant, omega_w1)
    controller = gains.controller_response(omega_w1)
    loop_gain = abs(controller) * magnitude
    controller_phase = float(np.angle(controller))
    phase_margin = wrap_angle(math.pi + controller_phase + plant_point.phase_unwrapped)

    matches = abs(loop_gain - 1.0) <= tolerance
    if theta is not None:
        matches = matches and abs(controller_phase - theta) <= tolerance
    if not matches:
        logger.warning(f"Design check failed at omega={omega_w1:.6g}: loop gain {loop_gain:.9g}, "
                       f"controller phase {controller_phase:.9g} rad")
    return DesignReport(loop_gain, controller_phase, phase_margin, matches)
