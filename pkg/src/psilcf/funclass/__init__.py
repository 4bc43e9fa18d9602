"""Function classes defined by local constancy on a psi-dependent scale."""

from .checks import (
    ConvergenceDiagnostic,
    check_conjugate,
    check_psi_lcf,
    check_upper_power,
    conjugate_gamma,
    conjugate_theta,
    extract_epsilon,
    growth_ratio_trend,
    induced_grid,
    uniform_deviation,
)
from .functions import NonPositiveValueError, PositiveFunction, as_function
from .psi import (
    ConditionAReport,
    PsiSpec,
    PsiSpecError,
    ShiftError,
    check_class_K,
    check_class_K1,
    estimate_condition_A,
    gamma,
    gamma_inverse,
    shift_bound,
    shift_integral,
    solve_shift,
    theta,
    theta_inverse,
)
from .representation import RepresentationError, RepresentationSpec, build_lcf, build_psi_lcf, build_svf
from .verdicts import ClassVerdict, Verdict

__all__ = [name for name in dir() if not name.startswith("_")]
