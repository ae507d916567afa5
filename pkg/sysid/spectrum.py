#!/usr/bin/env python3
"""
One-sided power spectrum and the sinusoidal linearity-range scan.

A sine at an exact DFT bin is applied at increasing amplitudes; a linear
system returns all of its AC output power in that bin, so the share left
there (and the harmonic distortion) shows where superposition stops
holding.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from exceptions.control_exceptions import BinMisalignment, IdentificationError, TooShort
from lti_core import DiscreteTransferFunction, TransferFunction, simulate

logger = logging.getLogger(__name__)

MIN_SPECTRUM_LENGTH = 16
TRANSIENT_SHARE = 0.2
DEFAULT_THRESHOLD = 0.95
DEFAULT_CYCLES = 10
HARMONICS = 10
ALIGNMENT_TOLERANCE = 1e-9

SystemUnderTest = Union[TransferFunction, DiscreteTransferFunction, Callable[[np.ndarray, float], np.ndarray]]


@dataclass(frozen=True)
class LinearityRow:
    amplitude: float
    fundamental_power: float
    distortion: float
    verdict: str


@dataclass(frozen=True)
class LinearityReport:
    rows: Tuple[LinearityRow, ...]
    threshold: float
    linear_range: float
    max_distortion: Optional[float] = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.amplitude, r.fundamental_power, r.distortion, r.verdict) for r in self.rows],
            columns=["amplitude", "fundamental_power", "distortion", "verdict"],
        )


def power_spectrum(signal: Sequence[float], sample_time: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    One-sided power spectrum normalized so the bins sum to the mean square.

    Args:
        signal: Uniformly sampled values
        sample_time: Sample period in seconds

    Returns:
        Tuple (frequencies in Hz, power per bin)

    Raises:
        TooShort: fewer than 16 samples
    """
    x = np.asarray(signal, dtype=float)
    n = len(x)
    if n < MIN_SPECTRUM_LENGTH:
        raise TooShort(f"Spectrum needs at least {MIN_SPECTRUM_LENGTH} samples, got {n}")
    power = np.abs(np.fft.rfft(x)) ** 2 / n ** 2
    if n % 2 == 0:
        power[1:-1] *= 2.0
    else:
        power[1:] *= 2.0
    return np.fft.rfftfreq(n, sample_time), power


def harmonic_distortion(power: np.ndarray, fundamental_bin: int, harmonics: int = HARMONICS) -> float:
    """sqrt(sum of harmonic powers 2..n) / sqrt(fundamental power)."""
    if power[fundamental_bin] <= 0.0:
        return 0.0
    bins = [h * fundamental_bin for h in range(2, harmonics + 1) if h * fundamental_bin < len(power)]
    return math.sqrt(float(np.sum(power[bins]))) / math.sqrt(float(power[fundamental_bin]))


def samples_for_cycles(f0: float, sample_time: float, cycles: int = 1) -> int:
    """
    Whole samples spanned by the given number of periods of f0.

    Raises:
        BinMisalignment: cycles/(f0·T) is not an integer
    """
    if not f0 > 0.0 or not sample_time > 0.0:
        raise IdentificationError("Excitation frequency and sample time must be positive")
    exact = cycles / (f0 * sample_time)
    rounded = max(1, int(round(exact)))
    if abs(exact - rounded) > ALIGNMENT_TOLERANCE * exact:
        aligned_f0 = cycles / (rounded * sample_time)
        raise BinMisalignment(
            f"f0={f0:.9g} Hz gives {exact:.9g} samples over {cycles} period(s) at T={sample_time:.9g} s",
            suggestion=f"nearest aligned f0 is {aligned_f0:.9g} Hz, {rounded} samples",
        )
    return rounded


def samples_per_cycle(f0: float, sample_time: float) -> int:
    """Whole samples in one period of f0 (BinMisalignment otherwise)."""
    return samples_for_cycles(f0, sample_time, 1)


def _aligned_discard(f0: float, sample_time: float, cycles: int) -> int:
    """Smallest whole-sample transient of at least 20 % of the cycles."""
    discard = math.ceil(TRANSIENT_SHARE * cycles)
    while discard < cycles:
        try:
            samples_for_cycles(f0, sample_time, discard)
            return discard
        except BinMisalignment:
            discard += 1
    return cycles


def _respond(system: SystemUnderTest, u: np.ndarray, sample_time: float) -> np.ndarray:
    if isinstance(system, (TransferFunction, DiscreteTransferFunction)):
        return simulate(system, u, sample_time).y
    return np.asarray(system(u, sample_time), dtype=float)


def _analyse(system: SystemUnderTest, amplitude: float, f0: float, sample_time: float, total: int, skip: int,
             cycles: int, discard: int, threshold: float,
             max_distortion: Optional[float]) -> LinearityRow:
    k = np.arange(total)
    u = amplitude * np.sin(2.0 * math.pi * f0 * k * sample_time)
    y = _respond(system, u, sample_time)[skip:]

    _, power = power_spectrum(y, sample_time)
    fundamental_bin = cycles - discard
    ac_power = float(np.sum(power[1:]))
    fundamental = float(power[fundamental_bin]) / ac_power if ac_power > 0.0 else 0.0
    fundamental = min(max(fundamental, 0.0), 1.0)
    distortion = harmonic_distortion(power, fundamental_bin)

    linear = fundamental >= threshold and (max_distortion is None or distortion <= max_distortion)
    logger.debug(f"Amplitude {amplitude:.6g}: fundamental share {fundamental:.6f}, distortion {distortion:.3g}")
    return LinearityRow(float(amplitude), fundamental, distortion, "linear" if linear else "nonlinear")


def linearity_scan(system: SystemUnderTest, f0: float, amplitudes: Sequence[float], sample_time: float,
                   cycles: int = DEFAULT_CYCLES, threshold: float = DEFAULT_THRESHOLD,
                   max_distortion: Optional[float] = None, max_workers: Optional[int] = None) -> LinearityReport:
    """
    Sinusoidal linearity scan over a list of amplitudes.

    The first 20 % of the record, rounded up to whole periods that also
    span whole samples, is discarded as transient. Only the record has to
    be bin-aligned; a single period may hold a fractional sample count.
    linear_range is the largest amplitude of the passing run that starts at
    the smallest amplitude (0 when the first one fails).

    Args:
        system: Transfer function or callable mapping (input deviation, T) to output
        f0: Excitation frequency in Hz
        amplitudes: Positive, strictly ascending amplitudes
        sample_time: Sample period in seconds
        cycles: Periods of f0 in each record
        threshold: Minimum share of AC power in the fundamental
        max_distortion: Optional ceiling on harmonic distortion
        max_workers: Thread pool size for the independent amplitude runs

    Raises:
        BinMisalignment: the record of `cycles` periods is not a whole number of samples
    """
    amplitudes = [float(a) for a in amplitudes]
    if not amplitudes or any(a <= 0.0 for a in amplitudes) or any(b <= a for a, b in zip(amplitudes, amplitudes[1:])):
        raise IdentificationError("Amplitudes must be positive and strictly ascending")
    if not 0.0 < threshold <= 1.0:
        raise IdentificationError(f"Threshold must lie in (0, 1], got {threshold}")
    if cycles < 1:
        raise TooShort(f"A scan needs at least one cycle, got {cycles}")
    total = samples_for_cycles(f0, sample_time, cycles)
    discard = _aligned_discard(f0, sample_time, cycles)
    skip = samples_for_cycles(f0, sample_time, discard)
    if cycles - discard < 1 or total - skip < MIN_SPECTRUM_LENGTH:
        raise TooShort(f"{cycles} cycles leave too little record after discarding the transient")

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        rows: List[LinearityRow] = list(executor.map(
            lambda a: _analyse(system, a, f0, sample_time, total, skip, cycles, discard, threshold, max_distortion),
            amplitudes,
        ))

    linear_range = 0.0
    for row in rows:
        if row.verdict != "linear":
            break
        linear_range = row.amplitude
    logger.info(f"Linearity scan at {f0:.6g} Hz: linear range {linear_range:.6g}")
    return LinearityReport(tuple(rows), threshold, linear_range, max_distortion)
