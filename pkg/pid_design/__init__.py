"""
PID synthesis at a gain-crossover frequency and its digital realization.
"""

from pid_design.design import (
    DesignReport, DesignResult, DesignSpec, PidGains, crossover_from_rise_time,
    default_ki, design_from_spec, design_pid, verify_design,
)
from pid_design.digital_pid import DigitalPid, discretize_pid, pid_step

__all__ = [
    "DesignReport", "DesignResult", "DesignSpec", "PidGains", "crossover_from_rise_time",
    "default_ki", "design_from_spec", "design_pid", "verify_design",
    "DigitalPid", "discretize_pid", "pid_step",
]
