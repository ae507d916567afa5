#!/usr/bin/env python3
"""
Static duty/voltage-to-speed characteristic of the BLDC drive.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

from exceptions.control_exceptions import ConfigMismatch, DutyOutOfRange, NegativeVoltage, SimulationError
from lti_core import TransferFunction, simulate

logger = logging.getLogger(__name__)

DEFAULT_SOURCE_VOLTAGE = 48.0
DEFAULT_KNEES = ((11.0, 1.0), (28.0, 4.0))


@dataclass(frozen=True)
class BldcMap:
    """
    Monotone piecewise-linear map from average voltage to steady speed.

    The first segment extends below the first knee; beyond the last knee
    the speed stays constant.
    """

    knee_points: Tuple[Tuple[float, float], ...] = DEFAULT_KNEES
    source_voltage: float = DEFAULT_SOURCE_VOLTAGE

    def __post_init__(self):
        knees = tuple((float(v), float(s)) for v, s in self.knee_points)
        if len(knees) < 2:
            raise SimulationError("BLDC map needs at least two knee points")
        voltages = [v for v, _ in knees]
        speeds = [s for _, s in knees]
        if any(b <= a for a, b in zip(voltages, voltages[1:])):
            raise SimulationError("Knee voltages must be strictly increasing")
        if any(b < a for a, b in zip(speeds, speeds[1:])):
            raise SimulationError("Knee speeds must be non-decreasing")
        if not self.source_voltage > 0.0:
            raise SimulationError("Source voltage must be positive")
        object.__setattr__(self, "knee_points", knees)
        object.__setattr__(self, "source_voltage", float(self.source_voltage))

    @property
    def voltages(self) -> np.ndarray:
        return np.array([v for v, _ in self.knee_points])

    @property
    def speeds(self) -> np.ndarray:
        return np.array([s for _, s in self.knee_points])

    def speed(self, voltage):
        """Map value without the zero-speed floor; accepts scalars or arrays."""
        voltages, speeds = self.voltages, self.speeds
        first_slope = (speeds[1] - speeds[0]) / (voltages[1] - voltages[0])
        v = np.asarray(voltage, dtype=float)
        result = np.where(v < voltages[0], speeds[0] + first_slope * (v - voltages[0]),
                          np.interp(v, voltages, speeds))
        return float(result) if result.ndim == 0 else result

    def slope_at(self, voltage: float) -> float:
        """Local slope of the map (speed per volt)."""
        voltages, speeds = self.voltages, self.speeds
        if voltage >= voltages[-1]:
            return 0.0
        index = max(0, int(np.searchsorted(voltages, voltage, side="right")) - 1)
        return float((speeds[index + 1] - speeds[index]) / (voltages[index + 1] - voltages[index]))

    def equivalent_voltage(self, voltage, operating_voltage: float):
        """
        Voltage that drives the linear plant to the map's speed change.

        The plant is linearized at operating_voltage, so the map's speed
        change is converted back through the slope at that point.
        """
        slope = self.slope_at(operating_voltage)
        if slope <= 0.0:
            raise ConfigMismatch(f"BLDC map is flat at the operating voltage {operating_voltage:.6g} V")
        return operating_voltage + (self.speed(voltage) - self.speed(operating_voltage)) / slope


def duty_to_voltage(duty: float, source_voltage: float = DEFAULT_SOURCE_VOLTAGE) -> float:
    """
    Average voltage delivered at a PWM duty cycle.

    Raises:
        DutyOutOfRange: duty outside [0, 1]
    """
    if not 0.0 <= duty <= 1.0:
        raise DutyOutOfRange(f"Duty cycle must lie in [0, 1], got {duty}")
    return duty * source_voltage


def bldc_static(bldc: BldcMap, voltage: float) -> float:
    """
    Steady speed at a voltage; zero below the map's zero crossing.

    Raises:
        NegativeVoltage: voltage < 0
    """
    if voltage < 0.0:
        raise NegativeVoltage(f"Voltage must be non-negative, got {voltage}")
    return max(0.0, bldc.speed(voltage))


def bldc_plant_system(bldc: BldcMap, plant: TransferFunction,
                      operating_voltage: float) -> Callable[[np.ndarray, float], np.ndarray]:
    """
    Static map followed by the linear plant, as a callable on voltage
    deviations for linearity scans.
    """
    if bldc.slope_at(operating_voltage) <= 0.0:
        raise ConfigMismatch(f"BLDC map is flat at the operating voltage {operating_voltage:.6g} V")

    def system(deviation: Sequence[float], sample_time: float) -> np.ndarray:
        voltage = operating_voltage + np.asarray(deviation, dtype=float)
        equivalent = bldc.equivalent_voltage(voltage, operating_voltage) - operating_voltage
        return simulate(plant, equivalent, sample_time).y

    return system
