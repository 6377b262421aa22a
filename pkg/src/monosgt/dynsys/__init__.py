"""System representation, simulation and sampled monotonicity checks."""

from .expr import (EvaluationError, Expression, ExpressionError, eval_expression,
                   parse_expression)
from .ode import IntegrationError, InvarianceError, solve
from .simulate import (MonotonicityReport, OmegaLimit, Trajectory, check_monotone_sampled,
                       integrate, omega_limit_estimate, run_segments)
from .system import ConfigError, InputSignal, SystemDef, parse_system, parse_systems

__all__ = [
    "ConfigError", "EvaluationError", "Expression", "ExpressionError", "InputSignal",
    "IntegrationError", "InvarianceError", "MonotonicityReport", "OmegaLimit", "SystemDef",
    "Trajectory", "check_monotone_sampled", "eval_expression", "integrate",
    "omega_limit_estimate", "parse_expression", "parse_system", "parse_systems",
    "run_segments", "solve",
]
