#!/usr/bin/env python3
"""
Continuous-to-discrete conversions and the inverse bilinear (w-plane) map.

ZOH discretization is exact: the rational part goes through the matrix
exponential of the augmented [[A, B], [0, 0]]·T block and dead time becomes
a whole number of samples.
"""

import logging
from typing import Tuple

import numpy as np
from scipy.linalg import expm
from scipy.signal import ss2tf

from exceptions.control_exceptions import (
    BilinearSingularity, FractionalDelay, NonpositiveSampleTime,
)
from lti_core.transfer_function import (
    DiscreteTransferFunction, TransferFunction, to_state_space,
)

logger = logging.getLogger(__name__)

DELAY_TOLERANCE = 1e-2
LEADING_TOLERANCE = 1e-10


def delay_samples(dead_time: float, sample_time: float) -> int:
    """
    Whole number of samples represented by a dead time.

    Raises:
        NonpositiveSampleTime: sample_time <= 0
        FractionalDelay: dead_time/sample_time is more than 1e-2 off an integer
    """
    if not sample_time > 0.0:
        raise NonpositiveSampleTime(f"Sample time must be positive, got {sample_time:.9g}")
    ratio = dead_time / sample_time
    samples = int(round(ratio))
    if abs(ratio - samples) > DELAY_TOLERANCE:
        raise FractionalDelay(
            f"Dead time {dead_time:.9g} s is {ratio:.6g} samples at T={sample_time:.9g} s; "
            f"use a sample time that divides it"
        )
    return samples


def zoh_state_space(sys: TransferFunction, sample_time: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Exact ZOH equivalent of the delay-free rational part.

    Returns:
        Tuple (Ad, Bd, C, D) of the discrete realization
    """
    if not sample_time > 0.0:
        raise NonpositiveSampleTime(f"Sample time must be positive, got {sample_time:.9g}")
    ss = to_state_space(sys)
    n = ss.order
    if n == 0:
        return ss.A, ss.B, ss.C, ss.D

    augmented = np.zeros((n + 1, n + 1))
    augmented[:n, :n] = ss.A * sample_time
    augmented[:n, n:] = ss.B * sample_time
    phi = expm(augmented)
    return phi[:n, :n], phi[:n, n:], ss.C, ss.D


def c2d_zoh(sys: TransferFunction, sample_time: float) -> DiscreteTransferFunction:
    """
    Zero-order-hold equivalent of a continuous system.

    Args:
        sys: Continuous transfer function
        sample_time: Sample period T in seconds

    Returns:
        DiscreteTransferFunction whose step response matches the continuous one
        at every sample instant

    Raises:
        NonpositiveSampleTime: T <= 0
        FractionalDelay: dead time not within 1e-2 samples of an integer
    """
    samples = delay_samples(sys.dead_time, sample_time)
    Ad, Bd, C, D = zoh_state_space(sys, sample_time)
    if Ad.shape[0] == 0:
        return DiscreteTransferFunction((float(D[0, 0]),), (1.0,), sample_time, samples)

    num, den = ss2tf(Ad, Bd, C, D)
    num = np.asarray(num[0], dtype=float)
    if D[0, 0] == 0.0:
        num[0] = 0.0
    logger.debug(f"ZOH at T={sample_time:.9g}: num={num}, den={den}, delay={samples}")
    return DiscreteTransferFunction(tuple(num), tuple(den), sample_time, samples)


def _substitute(coeffs: np.ndarray, degree: int, upper: Tuple[float, float], lower: Tuple[float, float]) -> np.ndarray:
    """
    Substitute x = (upper)/(lower) into a polynomial and clear the fraction.

    upper and lower are first-order polynomials (a, b) meaning a·v + b in
    the new variable v; the result is sum c_k·upper^(degree-k)·lower^k
    where k runs over the padded coefficients.
    """
    padded = np.concatenate([np.zeros(degree + 1 - len(coeffs)), coeffs])
    result = np.zeros(degree + 1)
    for k, c in enumerate(padded):
        if c == 0.0:
            continue
        term = np.array([c])
        for _ in range(degree - k):
            term = np.polymul(term, upper)
        for _ in range(k):
            term = np.polymul(term, lower)
        result = np.polyadd(result, term)
    return np.concatenate([np.zeros(degree + 1 - len(result)), result])


def _trim_small_leading(coeffs: np.ndarray) -> np.ndarray:
    """Drop leading coefficients that are rounding residue relative to the rest."""
    scale = np.max(np.abs(coeffs)) if len(coeffs) else 0.0
    index = 0
    while index < len(coeffs) - 1 and abs(coeffs[index]) <= LEADING_TOLERANCE * scale:
        index += 1
    return coeffs[index:]


def c2d_tustin(sys: TransferFunction, sample_time: float) -> DiscreteTransferFunction:
    """
    Bilinear discretization, s <- (2/T)(z-1)/(z+1).

    Dead time is realized as whole samples exactly as for c2d_zoh.

    Raises:
        NonpositiveSampleTime: T <= 0
        BilinearSingularity: continuous pole at s = 2/T
    """
    samples = delay_samples(sys.dead_time, sample_time)
    k = 2.0 / sample_time
    poles = sys.poles()
    if len(poles) and np.any(np.abs(poles - k) <= 1e-9 * max(1.0, k)):
        raise BilinearSingularity(f"Continuous pole at s = 2/T = {k:.9g}")

    degree = sys.order
    num = _substitute(np.asarray(sys.num), degree, (k, -k), (1.0, 1.0))
    den = _substitute(np.asarray(sys.den), degree, (k, -k), (1.0, 1.0))
    return DiscreteTransferFunction(tuple(_trim_small_leading(num)), tuple(den), sample_time, samples)


def w_transform(dsys: DiscreteTransferFunction) -> TransferFunction:
    """
    Map a discrete system to the w-plane, z <- (1 + wT/2)/(1 - wT/2).

    The result evaluated at w = j(2/T)tan(ωT/2) reproduces the rational part
    of the discrete response at z = e^(jωT). Pure delay samples are carried
    as a dead time of d·T.
    """
    half = dsys.sample_time / 2.0
    degree = dsys.order
    num = _substitute(np.asarray(dsys.num), degree, (half, 1.0), (-half, 1.0))
    den = _substitute(np.asarray(dsys.den), degree, (half, 1.0), (-half, 1.0))
    num, den = _trim_small_leading(num), _trim_small_leading(den)
    return TransferFunction(tuple(num), tuple(den), dsys.pure_delay_samples * dsys.sample_time)


def w_frequency(omega: float, sample_time: float) -> float:
    """w-plane frequency (2/T)·tan(ωT/2) matching physical frequency ω."""
    return 2.0 / sample_time * float(np.tan(omega * sample_time / 2.0))

