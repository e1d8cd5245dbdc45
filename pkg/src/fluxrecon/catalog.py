"""Named test flux pairs with their analytic constants."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .flux import AnalyticFlux, FluxPair


def _ones(x):
    return np.ones_like(np.asarray(x, dtype=float))


def linear_flux(domain=(-10.0, 10.0), slope=1.0, name="linear"):
    return AnalyticFlux(
        value=lambda x: slope * np.asarray(x, dtype=float),
        deriv=lambda x: slope * _ones(x),
        second_deriv=lambda x: 0.0 * _ones(x),
        domain=tuple(domain),
        lipschitz_of_deriv=0.0,
        third_deriv_bound=0.0,
        name=name,
        constants=lambda a, b: (0.0, 0.0),
    )


def exp_flux(domain=(-1.0, 2.0)):
    # f = f' = f'' = f''' = exp, all increasing: sup on [a, b] is exp(b)
    return AnalyticFlux(
        value=np.exp,
        deriv=np.exp,
        second_deriv=np.exp,
        domain=tuple(domain),
        lipschitz_of_deriv=float(np.exp(domain[1])),
        third_deriv_bound=float(np.exp(domain[1])),
        name="exp",
        constants=lambda a, b: (float(np.exp(b)), float(np.exp(b))),
    )


def kink_flux(domain=(-2.0, 2.0)):
    """f(x) = x + x|x|/2: f' = 1 + |x| is Lipschitz with L = 1, f'' jumps at 0."""
    return AnalyticFlux(
        value=lambda x: np.asarray(x, dtype=float) * (1.0 + 0.5 * np.abs(x)),
        deriv=lambda x: 1.0 + np.abs(np.asarray(x, dtype=float)),
        second_deriv=lambda x: np.sign(np.asarray(x, dtype=float)),
        domain=tuple(domain),
        lipschitz_of_deriv=1.0,
        third_deriv_bound=None,
        name="kink",
        constants=lambda a, b: (1.0, None),
    )


def linear_pair():
    return FluxPair(linear_flux(), linear_flux(), "linear")


def exp_pair(domain=(-1.0, 2.0)):
    return FluxPair(exp_flux(domain), exp_flux(domain), "exp-pair")


def kink_pair(domain=(-2.0, 2.0)):
    return FluxPair(kink_flux(domain), kink_flux(domain), "c11-kink")


def psystem_pair(gamma=1.4, kappa=1.0):
    from .euler import gamma_law, make_psystem
    return make_psystem(gamma_law(gamma, kappa)).flux_pair


CATALOG = {
    "linear": linear_pair,
    "exp-pair": exp_pair,
    "c11-kink": kink_pair,
    "psystem-gamma": psystem_pair,
}

# default grid boxes; each sits strictly inside the pair's hyperbolicity rectangle
DEFAULT_RECT = {
    "linear": (0.0, 1.0, 0.0, 1.0),
    "exp-pair": (0.0, 1.0, 0.0, 1.0),
    "c11-kink": (-1.0, 1.0, -1.0, 1.0),
    "psystem-gamma": (-0.5, 0.5, 0.8, 2.0),
}


def get_pair(name: str) -> FluxPair:
    try:
        return CATALOG[name]()
    except KeyError:
        raise ConfigError(f"unknown flux {name!r}; choose from {sorted(CATALOG)}", field="flux") from None
