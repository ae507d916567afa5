#!/usr/bin/env python3
"""
LTI model types: continuous and discrete transfer functions with dead time,
state-space realizations and uniformly sampled time series.

All types are immutable once constructed; constructors validate and
normalize so that value-equal inputs give value-equal systems.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from exceptions.control_exceptions import (
    ImproperSystem, ModelError, NegativeDeadTime, NonpositiveSampleTime,
    PoleOnAxis, UnsupportedOrder, ZeroDenominator,
)

logger = logging.getLogger(__name__)

MAX_ORDER = 10
POLE_TOLERANCE = 1e-12
UNIFORM_TOLERANCE = 1e-9

Coefficients = Union[Sequence[float], np.ndarray]


def _as_coefficients(values: Iterable[float], what: str) -> Tuple[float, ...]:
    """Convert an iterable of numbers into a tuple of finite floats."""
    try:
        array = np.atleast_1d(np.asarray(list(values), dtype=float))
    except (TypeError, ValueError) as e:
        raise ModelError(f"{what} coefficients must be numeric: {e}") from e
    if array.ndim != 1:
        raise ModelError(f"{what} coefficients must be a flat list")
    if not np.all(np.isfinite(array)):
        raise ModelError(f"{what} coefficients must be finite")
    return tuple(float(v) for v in array)


def _strip_leading_zeros(coeffs: Tuple[float, ...]) -> Tuple[float, ...]:
    """Drop exact leading zeros, keeping at least one coefficient."""
    index = 0
    while index < len(coeffs) - 1 and coeffs[index] == 0.0:
        index += 1
    return coeffs[index:]


def _normalize_pair(num: Coefficients, den: Coefficients) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Validate a num/den pair and scale it to a monic denominator."""
    den_t = _as_coefficients(den, "Denominator")
    if len(den_t) == 0 or den_t[0] == 0.0:
        raise ZeroDenominator()
    num_list = list(num)
    num_t = _strip_leading_zeros(_as_coefficients(num_list, "Numerator") if num_list else (0.0,))

    if len(num_t) > len(den_t):
        raise ImproperSystem(
            f"System is improper: numerator degree {len(num_t) - 1} exceeds "
            f"denominator degree {len(den_t) - 1}"
        )
    if len(den_t) - 1 > MAX_ORDER:
        raise UnsupportedOrder(f"System order {len(den_t) - 1} exceeds the supported maximum of {MAX_ORDER}")

    lead = den_t[0]
    return tuple(c / lead for c in num_t), tuple(c / lead for c in den_t)


def _padded(num: Tuple[float, ...], length: int) -> np.ndarray:
    """Left-pad a coefficient tuple with zeros to the given length."""
    return np.concatenate([np.zeros(length - len(num)), np.asarray(num, dtype=float)])


@dataclass(frozen=True)
class FrequencyPoint:
    """Complex gain of a system at one frequency."""

    omega: float
    value: complex
    phase_unwrapped: float

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def phase(self) -> float:
        """Phase wrapped to (-pi, pi]."""
        return wrap_angle(float(np.angle(self.value)))


def wrap_angle(angle: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    return math.pi - math.fmod(math.fmod(math.pi - angle, 2.0 * math.pi) + 2.0 * math.pi, 2.0 * math.pi)


@dataclass(frozen=True)
class TransferFunction:
    """
    Continuous-time SISO transfer function num(s)/den(s) · e^(-s·dead_time).

    Coefficients are in descending powers of s; the stored denominator is
    monic. Construct through tf_new() or directly, both validate.
    """

    num: Tuple[float, ...]
    den: Tuple[float, ...]
    dead_time: float = 0.0

    def __post_init__(self):
        num, den = _normalize_pair(self.num, self.den)
        dead_time = float(self.dead_time)
        if not math.isfinite(dead_time):
            raise ModelError("Dead time must be finite")
        if dead_time < 0.0:
            raise NegativeDeadTime(f"Dead time must be non-negative, got {dead_time:.9g}")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "dead_time", dead_time)

    @property
    def order(self) -> int:
        return len(self.den) - 1

    @property
    def is_strictly_proper(self) -> bool:
        return len(self.num) < len(self.den) or (len(self.num) == 1 and self.num[0] == 0.0)

    def padded_num(self) -> np.ndarray:
        """Numerator left-padded to the denominator length."""
        return _padded(self.num, len(self.den))

    def poles(self) -> np.ndarray:
        return np.roots(self.den)

    def zeros(self) -> np.ndarray:
        return np.roots(self.num)

    def evaluate(self, s: complex) -> complex:
        """Evaluate the rational part and the delay factor at complex s."""
        den_value = np.polyval(self.den, s)
        if abs(den_value) < POLE_TOLERANCE:
            raise PoleOnAxis(omega=float(np.imag(s)))
        return complex(np.polyval(self.num, s) / den_value * np.exp(-s * self.dead_time))

    def with_dead_time(self, dead_time: float) -> "TransferFunction":
        return TransferFunction(self.num, self.den, dead_time)

    def scaled(self, gain: float) -> "TransferFunction":
        return TransferFunction(tuple(gain * c for c in self.num), self.den, self.dead_time)


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Controllable-canonical realization (A, B, C, D) plus dead time."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dead_time: float = 0.0

    def __post_init__(self):
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.B.shape[0] != n or self.C.shape[1] != n:
            raise ModelError("State-space matrices have inconsistent dimensions")
        if self.D.shape != (self.C.shape[0], self.B.shape[1]):
            raise ModelError("Feedthrough matrix has inconsistent dimensions")

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def transfer_at(self, s: complex) -> complex:
        """C(sI - A)^-1 B + D at a complex frequency, delay excluded."""
        n = self.order
        if n == 0:
            return complex(self.D[0, 0])
        resolvent = np.linalg.solve(s * np.eye(n) - self.A, self.B)
        return complex((self.C @ resolvent + self.D)[0, 0])


@dataclass(frozen=True)
class DiscreteTransferFunction:
    """
    Discrete-time transfer function num(z)/den(z) · z^(-pure_delay_samples).
    """

    num: Tuple[float, ...]
    den: Tuple[float, ...]
    sample_time: float
    pure_delay_samples: int = 0

    def __post_init__(self):
        num, den = _normalize_pair(self.num, self.den)
        sample_time = float(self.sample_time)
        if not sample_time > 0.0:
            raise NonpositiveSampleTime(f"Sample time must be positive, got {sample_time:.9g}")
        delay = int(self.pure_delay_samples)
        if delay != self.pure_delay_samples or delay < 0:
            raise NegativeDeadTime(f"Delay must be a non-negative integer sample count, got {self.pure_delay_samples}")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "sample_time", sample_time)
        object.__setattr__(self, "pure_delay_samples", delay)

    @property
    def order(self) -> int:
        return len(self.den) - 1

    def poles(self) -> np.ndarray:
        return np.roots(self.den)

    def filter_coefficients(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Coefficients (b, a) in powers of z^-1 for scipy.signal.lfilter,
        with the pure delay folded into b.

        Returns:
            Tuple of numerator and denominator arrays
        """
        b = np.concatenate([np.zeros(self.pure_delay_samples), _padded(self.num, len(self.den))])
        return b, np.asarray(self.den, dtype=float)

    def evaluate(self, z: complex) -> complex:
        den_value = np.polyval(self.den, z)
        if abs(den_value) < POLE_TOLERANCE:
            raise PoleOnAxis(omega=float(np.angle(z)) / self.sample_time)
        return complex(np.polyval(self.num, z) / den_value * z ** (-self.pure_delay_samples))

    def dc_gain(self) -> float:
        return float(np.real(self.evaluate(1.0)))


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled record of time, input and output."""

    t: np.ndarray
    u: np.ndarray
    y: np.ndarray = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        u = np.asarray(self.u, dtype=float)
        y = np.zeros_like(u) if self.y is None else np.asarray(self.y, dtype=float)
        if not (t.ndim == u.ndim == y.ndim == 1) or not (len(t) == len(u) == len(y)):
            raise ModelError("Time series columns t, u, y must be one-dimensional and equally long")
        if len(t) >= 2:
            steps = np.diff(t)
            step = (t[-1] - t[0]) / (len(t) - 1)
            if not step > 0.0 or np.any(steps <= 0.0):
                raise ModelError("Time stamps must be strictly increasing")
            if np.max(np.abs(steps - step)) > UNIFORM_TOLERANCE * max(step, abs(t[-1])):
                raise ModelError("Time stamps are not uniformly sampled")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def sample_time(self) -> float:
        if len(self.t) < 2:
            raise ModelError("Sample time undefined for fewer than two samples")
        return float((self.t[-1] - self.t[0]) / (len(self.t) - 1))

    @classmethod
    def from_input(cls, u: Coefficients, sample_time: float, y: Optional[Coefficients] = None,
                   start: float = 0.0) -> "TimeSeries":
        """Build a series on the grid start + k·sample_time."""
        if not sample_time > 0.0:
            raise NonpositiveSampleTime()
        u = np.asarray(u, dtype=float)
        return cls(start + sample_time * np.arange(len(u)), u, y)

    def with_output(self, y: Coefficients) -> "TimeSeries":
        return TimeSeries(self.t, self.u, y)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "u": self.u, "y": self.y})


def tf_new(num: Coefficients, den: Coefficients, dead_time: float = 0.0) -> TransferFunction:
    """
    Create a validated, normalized continuous transfer function.

    Args:
        num: Numerator coefficients, descending powers of s
        den: Denominator coefficients, descending powers of s
        dead_time: Transport delay in seconds

    Returns:
        TransferFunction with a monic denominator

    Raises:
        ImproperSystem: degree(num) > degree(den)
        ZeroDenominator: empty denominator or zero leading coefficient
        NegativeDeadTime: dead_time < 0
    """
    return TransferFunction(tuple(num), tuple(den), dead_time)


def freq_response(sys: TransferFunction, omega: float) -> FrequencyPoint:
    """
    Evaluate num(jω)/den(jω)·e^(-jωτ).

    The unwrapped phase adds the delay contribution -ωτ to the angle of the
    rational part without folding it back into (-pi, pi].
    """
    if omega < 0.0:
        raise ModelError(f"Frequency must be non-negative, got {omega:.9g}")
    s = 1j * omega
    den_value = np.polyval(sys.den, s)
    if abs(den_value) < POLE_TOLERANCE:
        raise PoleOnAxis(omega=omega)
    rational = complex(np.polyval(sys.num, s) / den_value)
    value = rational * complex(np.exp(-s * sys.dead_time))
    return FrequencyPoint(omega=omega, value=value, phase_unwrapped=float(np.angle(rational)) - omega * sys.dead_time)


def discrete_freq_response(dsys: DiscreteTransferFunction, omega: float) -> FrequencyPoint:
    """Evaluate a discrete system on the unit circle, z = e^(jωT)."""
    if omega < 0.0:
        raise ModelError(f"Frequency must be non-negative, got {omega:.9g}")
    z = complex(np.exp(1j * omega * dsys.sample_time))
    den_value = np.polyval(dsys.den, z)
    if abs(den_value) < POLE_TOLERANCE:
        raise PoleOnAxis(omega=omega)
    rational = complex(np.polyval(dsys.num, z) / den_value)
    delay_phase = -omega * dsys.sample_time * dsys.pure_delay_samples
    return FrequencyPoint(omega=omega, value=rational * complex(np.exp(1j * delay_phase)),
                          phase_unwrapped=float(np.angle(rational)) + delay_phase)


def bode(sys: TransferFunction, omegas: Coefficients) -> pd.DataFrame:
    """
    Tabulate magnitude and phase over a frequency grid.

    Returns:
        DataFrame with columns omega, magnitude, phase, phase_unwrapped
    """
    omegas = np.asarray(omegas, dtype=float)
    points = [freq_response(sys, w) for w in omegas]
    rational_phase = np.unwrap([float(np.angle(p.value)) + w * sys.dead_time for p, w in zip(points, omegas)])
    return pd.DataFrame({
        "omega": omegas,
        "magnitude": [p.magnitude for p in points],
        "phase": [p.phase for p in points],
        "phase_unwrapped": rational_phase - omegas * sys.dead_time,
    })


def series(first: TransferFunction, second: TransferFunction) -> TransferFunction:
    """Series connection: polynomial products, dead times add."""
    return TransferFunction(tuple(np.polymul(first.num, second.num)),
                            tuple(np.polymul(first.den, second.den)),
                            first.dead_time + second.dead_time)


def dc_gain(sys: TransferFunction) -> float:
    """num(0)/den(0); raises PoleOnAxis for a pole at the origin."""
    if abs(sys.den[-1]) < POLE_TOLERANCE:
        raise PoleOnAxis("DC gain undefined: pole at the origin", omega=0.0)
    return sys.num[-1] / sys.den[-1]


def to_state_space(sys: TransferFunction) -> StateSpace:
    """
    Controllable-canonical realization of a proper transfer function.

    Args:
        sys: Proper transfer function (monic denominator)

    Returns:
        StateSpace whose dead_time equals the system's

    Raises:
        ImproperSystem: propagated for improper input
    """
    if len(sys.num) > len(sys.den):
        raise ImproperSystem()
    n = sys.order
    b = sys.padded_num()
    a = np.asarray(sys.den, dtype=float)
    d = b[0]
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), np.array([[d]]), sys.dead_time)

    A = np.zeros((n, n))
    A[0, :] = -a[1:]
    if n > 1:
        A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    C = (b[1:] - d * a[1:]).reshape(1, n)
    D = np.array([[d]])
    return StateSpace(A, B, C, D, sys.dead_time)
