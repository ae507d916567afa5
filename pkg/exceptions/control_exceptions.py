#!/usr/bin/env python3
"""
Custom exceptions for modelling, design, identification and simulation.
Every failure the toolkit reports maps onto one of these classes; the CLI
turns the families into stable exit codes.
"""

from typing import Optional


class ControlError(Exception):
    """Base exception for all toolkit errors."""

    def __init__(self, message: str = "Control toolkit operation failed", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


# --- Model construction and analysis -------------------------------------

class ModelError(ControlError):
    """Base exception for invalid or unusable LTI models."""

    def __init__(self, message: str = "Invalid system model", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class ImproperSystem(ModelError):
    """Raised when degree(num) exceeds degree(den)."""

    def __init__(self, message: str = "System is improper: numerator degree exceeds denominator degree",
                 *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class ZeroDenominator(ModelError):
    """Raised for an empty denominator or one whose leading coefficient is zero."""

    def __init__(self, message: str = "Denominator is empty or has a zero leading coefficient",
                 *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class NegativeDeadTime(ModelError):
    """Raised when a dead time below zero is supplied."""

    def __init__(self, message: str = "Dead time must be non-negative", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class UnsupportedOrder(ModelError):
    """Raised for systems above the supported polynomial order."""

    def __init__(self, message: str = "System order exceeds the supported maximum", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class PoleOnAxis(ModelError):
    """Raised when a frequency response is evaluated at a pole."""

    def __init__(self, message: str = "Frequency response evaluated at a pole", omega: Optional[float] = None,
                 *args, **kwargs):
        self.omega = omega
        full_message = message
        if omega is not None:
            full_message = "{} (omega={:.9g} rad/s)".format(message, omega)
        super().__init__(full_message, *args, **kwargs)


class FractionalDelay(ModelError):
    """Raised when a dead time is not an integer number of samples."""

    def __init__(self, message: str = "Dead time is not an integer multiple of the sample time",
                 *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class NonpositiveSampleTime(ModelError):
    """Raised when a sample time is zero or negative."""

    def __init__(self, message: str = "Sample time must be positive", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class BilinearSingularity(ModelError):
    """Raised when a continuous pole sits at s = 2/T."""

    def __init__(self, message: str = "Continuous pole at s = 2/T makes the bilinear map singular",
                 *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class SampleTimeMismatch(ModelError):
    """Raised when sample times of a system and a signal disagree."""

    def __init__(self, message: str = "Sample times do not match", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class NotSettled(ModelError):
    """Raised when a step response has not reached steady state."""

    def __init__(self, message: str = "Response has not settled within the 2% band", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


# --- Controller design -----------------------------------------------------

class DesignError(ControlError):
    """Base exception for PID design failures."""

    def __init__(self, message: str = "Controller design failed", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class NonpositiveRiseTime(DesignError):
    """Raised when the rise-time specification is not positive."""

    def __init__(self, message: str = "Rise time must be positive", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class PlantZeroGain(DesignError):
    """Raised when the plant gain at crossover is numerically zero."""

    def __init__(self, message: str = "Plant gain at the crossover frequency is zero", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class ThetaOutOfRange(DesignError):
    """Raised when |theta| is not below pi/2."""

    def __init__(self, message: str = "Phase angle must satisfy |theta| < pi/2", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


# --- Identification and spectral analysis ----------------------------------

class IdentificationError(ControlError):
    """Base exception for identification and spectrum failures."""

    def __init__(self, message: str = "System identification failed", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class InsufficientExcitation(IdentificationError):
    """Raised when the input carries too little excitation to identify a model."""

    def __init__(self, message: str = "Input signal does not excite the system sufficiently",
                 *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class SingularRegression(IdentificationError):
    """Raised when the (instrumental) regression matrix is singular."""

    def __init__(self, message: str = "Regression matrix is singular; instruments correlate poorly",
                 *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class TooShort(IdentificationError):
    """Raised when a signal is too short for the requested analysis."""

    def __init__(self, message: str = "Signal is too short", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class BinMisalignment(IdentificationError):
    """Raised when an excitation frequency does not fall on an exact DFT bin."""

    def __init__(self, message: str = "Excitation frequency is not aligned to a DFT bin",
                 suggestion: Optional[str] = None, *args, **kwargs):
        self.suggestion = suggestion
        full_message = message
        if suggestion:
            full_message = "{} ({})".format(message, suggestion)
        super().__init__(full_message, *args, **kwargs)


class UnstableEstimateWarning(UserWarning):
    """Issued when an identified model has poles in the right half plane."""


# --- Kinematics ------------------------------------------------------------

class KinematicsError(ControlError):
    """Base exception for drive kinematics failures."""

    def __init__(self, message: str = "Kinematics computation failed", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class DegenerateSpeed(KinematicsError):
    """Raised when curvature is requested at (near) zero forward speed."""

    def __init__(self, message: str = "Curvature undefined: forward speed is effectively zero",
                 *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class HorizonNonpositive(KinematicsError):
    """Raised when the steering linearization horizon is not positive."""

    def __init__(self, message: str = "Steering horizon must be positive", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class SteerSaturated(KinematicsError):
    """Raised when a steer reference exceeds the mechanical limit or the conditioning bound."""

    def __init__(self, message: str = "Steer angle reference exceeds its limit", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


# --- Simulation ------------------------------------------------------------

class SimulationError(ControlError):
    """Base exception for closed-loop and experiment failures."""

    def __init__(self, message: str = "Simulation failed", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class DutyOutOfRange(SimulationError):
    """Raised when a duty cycle lies outside [0, 1]."""

    def __init__(self, message: str = "Duty cycle must lie in [0, 1]", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class NegativeVoltage(SimulationError):
    """Raised when the BLDC map is evaluated at a negative voltage."""

    def __init__(self, message: str = "Voltage must be non-negative", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


class ConfigMismatch(SimulationError):
    """Raised when scenario parts are inconsistent with each other."""

    def __init__(self, message: str = "Scenario configuration is inconsistent", *args, **kwargs):
        super().__init__(message, *args, **kwargs)


# --- Configuration and data files -------------------------------------------

class ConfigValidationError(ControlError):
    """Raised when a run configuration document fails validation."""

    def __init__(self, message: str = "Configuration is invalid", key: Optional[str] = None,
                 *args, **kwargs):
        self.key = key
        full_message = message
        if key:
            full_message = "{}: {}".format(key, message)
        super().__init__(full_message, *args, **kwargs)


class DataFormatError(ControlError):
    """Raised when a data file does not follow its CSV schema."""

    def __init__(self, message: str = "Data file does not match the expected schema",
                 path: Optional[str] = None, *args, **kwargs):
        self.path = path
        full_message = message
        if path:
            full_message = "{} (File: {})".format(message, path)
        super().__init__(full_message, *args, **kwargs)
