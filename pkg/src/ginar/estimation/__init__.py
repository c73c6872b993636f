"""Estimators for GINAR(p) parameters."""
from ._common import FitOptions, FitResult, ModelTemplate
from .cml import (SeasonalTemplate, cml_loglik, cml_score_hessian, fit_cml,
                  fit_cml_seasonal, seasonal_loglik)
from .moments import (fit_cls, fit_cls_sigma2, fit_yw, sample_acf, sample_acvf)
from .pseudo import fit_pseudo, pseudo_loglik
from .saddle import fit_saddlepoint, saddle_loglik
from .whittle import fit_whittle, periodogram, whittle_criterion

METHODS = {
    "cml": fit_cml,
    "yw": lambda series, template, options=None: fit_yw(series, template),
    "cls": lambda series, template, options=None: fit_cls(series, template),
    "pseudo": fit_pseudo,
    "whittle": fit_whittle,
    "saddle": fit_saddlepoint,
}

LIKELIHOOD_METHODS = ("cml", "cml-seasonal", "pseudo", "saddle")


def fit(series, template, method="cml", options=None):
    """Dispatch to one of the estimators in :data:`METHODS`."""
    from ..errors import UnsupportedMethodError
    try:
        fitter = METHODS[method]
    except KeyError:
        raise UnsupportedMethodError(f"unknown method {method!r}") from None
    return fitter(series, template, options)
