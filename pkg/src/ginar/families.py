"""Named model families used by the CLI and the simulation study."""
from .errors import InvalidParameterError, UnsupportedMethodError
from .estimation import ModelTemplate
from .innovations import InnovationFamily, InnovationSpec
from .model import GinarModel
from .thinning import BINOMIAL, NEGBINOMIAL

FAMILIES = {
    "po-inar": (BINOMIAL, InnovationFamily.POISSON),
    "nb-inar": (BINOMIAL, InnovationFamily.NEGBINOMIAL),
    "geom-inar": (NEGBINOMIAL, InnovationFamily.POISSON),
}


def _lookup(family):
    try:
        return FAMILIES[family]
    except KeyError:
        raise InvalidParameterError(
            f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None


def family_template(family, p):
    thinning, innovation = _lookup(family)
    return ModelTemplate(p, innovation, thinning)


def family_model(family, alphas, mu, r=None):
    thinning, innovation = _lookup(family)
    if innovation is InnovationFamily.NEGBINOMIAL and r is None:
        raise InvalidParameterError("nb-inar needs the overdispersion r")
    spec = InnovationSpec(innovation, mu, r if innovation is InnovationFamily.NEGBINOMIAL else None)
    return GinarModel(tuple(alphas), spec, thinning)


def family_name(template):
    for name, (thinning, innovation) in FAMILIES.items():
        if template.thinning == thinning and template.innovation is innovation:
            return name
    raise InvalidParameterError("template does not match a named family")


def check_method(family, method):
    """Reject estimator/family pairs that are not defined (saddlepoint needs binomial thinning)."""
    from .estimation import METHODS
    if method not in METHODS:
        raise UnsupportedMethodError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    thinning, _ = _lookup(family)
    if method == "saddle" and thinning != BINOMIAL:
        raise UnsupportedMethodError("the saddlepoint method needs binomial thinning")
