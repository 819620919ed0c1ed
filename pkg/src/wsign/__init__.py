"""Depth-weighted spatial-sign methods for robust multivariate analysis."""
from .depth_weights import WeightKind, WeightSpec, pilot_spec, spatial_sign, weights
from .elliptical import EllipticalModel, sample
from .errors import ConvergenceError, ValidationError
from .location import LocationFit, weighted_spatial_median

__version__ = "0.1.0"
