"""Generalized integer autoregressive GINAR(p) models for count time series."""
from .errors import (DomainError, GinarError, InvalidModelError, InvalidParameterError,
                     InvalidSeriesError, NumericalError, UnsupportedMethodError)
from .innovations import InnovationFamily, InnovationSpec
from .model import GinarModel, SeasonalMeanModel, seasonal_mu
from .thinning import ThinningFamily, ThinningSpec

__version__ = "0.1.0"
