"""Regularly varying tail models, sampling and deviation-zone machinery."""

from .inverse import BelowRangeWarning, InverseBracketError, generalized_inverse, sigma
from .model import DivergingMeanError, TailModel, TailModelError, centering_mean, local_index
from .sampling import SamplerState, sample, sample_raw, uniform_levels
from .zones import (
    FINITE,
    INFINITE,
    Ap5Report,
    ZoneError,
    ZoneSpec,
    ap5_ratio,
    check_ap5,
    check_left_tail,
    choose_psi,
    regime_of,
    validate_zone,
    zone_flag_sigma,
    zone_flag_xlnn,
)

__all__ = [name for name in dir() if not name.startswith("_")]
