"""
Linear time-invariant modelling core: transfer functions with dead time,
discretization, frequency response and simulation.
"""

from lti_core.transfer_function import (
    DiscreteTransferFunction, FrequencyPoint, StateSpace, TimeSeries, TransferFunction,
    bode, dc_gain, discrete_freq_response, freq_response, series, tf_new, to_state_space, wrap_angle,
)
from lti_core.discretize import c2d_tustin, c2d_zoh, delay_samples, w_frequency, w_transform
from lti_core.simulation import StepMetrics, simulate, step_metrics

__all__ = [
    "DiscreteTransferFunction", "FrequencyPoint", "StateSpace", "TimeSeries", "TransferFunction",
    "bode", "dc_gain", "discrete_freq_response", "freq_response", "series", "tf_new",
    "to_state_space", "wrap_angle", "c2d_tustin", "c2d_zoh", "delay_samples", "w_frequency",
    "w_transform", "StepMetrics", "simulate", "step_metrics",
]
