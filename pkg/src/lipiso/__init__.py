"""Exact decision procedures for Lipschitz spaces over finite pointed metric spaces."""

from .compop import (
    BasepointMap,
    check_nonexpansive,
    check_property_m,
    detect_dilation,
    isometry_oracle,
    isometry_via_theorem,
    operator_norm,
    verify_certificate,
)
from .errors import EmptyDomainError, GenerationError, InconsistencyError, InputError
from .lipfunc import LipschitzFunction, construct_peaking, has_peak_property, lip_norm
from .metric import PointedMetricSpace, check_concave, holder_transform, validate

__version__ = "0.1.0"
