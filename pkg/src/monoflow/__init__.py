"""Tikhonov-regularized continuous-time flows for monotone inclusions ``0 in Ax + Bx``."""

from .dynamics import ConfigError, FieldSpec, FieldValue, evaluate
from .integrator import IntegrationError, IntegratorOpts, Trajectory, integrate
from .oracle import OracleError, PathOracle, min_norm_zero, regularized_zero
from .problems import ProblemInstance, get_problem
from .schedules import Schedule, ScheduleSet, check_hypotheses, parse_schedule

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "FieldSpec", "FieldValue", "evaluate",
    "IntegrationError", "IntegratorOpts", "Trajectory", "integrate",
    "OracleError", "PathOracle", "min_norm_zero", "regularized_zero",
    "ProblemInstance", "get_problem",
    "Schedule", "ScheduleSet", "check_hypotheses", "parse_schedule",
]
