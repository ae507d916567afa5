"""
System identification from sampled experiments and spectral linearity analysis.
"""

from sysid.iv_estimator import (
    IdExperiment, IdentifiedModel, WhitenessSummary, discrete_to_continuous, estimate_delay,
    identify_iv, normalized_fit, prbs, residual_whiteness,
)
from sysid.spectrum import (
    LinearityReport, LinearityRow, harmonic_distortion, linearity_scan, power_spectrum, samples_for_cycles,
    samples_per_cycle,
)

__all__ = [
    "IdExperiment", "IdentifiedModel", "WhitenessSummary", "discrete_to_continuous", "estimate_delay",
    "identify_iv", "normalized_fit", "prbs", "residual_whiteness",
    "LinearityReport", "LinearityRow", "harmonic_distortion", "linearity_scan", "power_spectrum",
    "samples_for_cycles", "samples_per_cycle",
]
