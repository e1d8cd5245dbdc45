"""Pressure-law identification through the p-system.

In Lagrangian variables the isentropic gas obeys v_t - u_x = 0,
u_t + p(v)_x = 0 with v = 1/rho.  Renaming the unknowns this is the coupled
template with f1 = p acting on v and f2(u) = -u.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .catalog import linear_flux
from .errors import HyperbolicityError, ObservationInconsistencyError
from .flux import AnalyticFlux, FluxPair
from .reconstruct import GridSpec, reconstruct_all


@dataclass(frozen=True)
class PressureLaw:
    p: Callable
    p_deriv: Callable
    v_lo: float
    v_hi: float
    gamma: Optional[float] = None
    kappa: Optional[float] = None
    p_second: Optional[Callable] = None
    p_third: Optional[Callable] = None

    def __post_init__(self):
        if not 0 < self.v_lo < self.v_hi:
            raise ValueError("need 0 < v_lo < v_hi")
        v = np.linspace(self.v_lo, self.v_hi, 1001)
        if np.any(~(np.asarray(self.p_deriv(v)) < 0)):
            raise HyperbolicityError("pressure must be strictly decreasing in v")

    def constants(self, a, b):
        """(sup |p''|, sup |p'''|) on [a, b] for the gamma law."""
        if self.gamma is None:
            return None
        # |p''| and |p'''| decrease in v
        return float(abs(self.p_second(a))), float(abs(self.p_third(a)))

    def as_flux(self) -> AnalyticFlux:
        lip, third = self.constants(self.v_lo, self.v_hi) or (None, None)
        if lip is None:
            v = np.linspace(self.v_lo, self.v_hi, 2001)
            lip = float(np.max(np.abs(np.diff(self.p_deriv(v)) / np.diff(v))))
        return AnalyticFlux(
            value=self.p, deriv=self.p_deriv, second_deriv=self.p_second,
            domain=(self.v_lo, self.v_hi), lipschitz_of_deriv=lip, third_deriv_bound=third,
            name="pressure", constants=self.constants if self.gamma is not None else None,
        )


def gamma_law(gamma: float = 1.4, kappa: float = 1.0, v_lo: float = 0.3, v_hi: float = 5.0) -> PressureLaw:
    """p(v) = kappa v^-gamma."""
    g, k = float(gamma), float(kappa)
    if not (g > 0 and k > 0):
        raise ValueError("gamma and kappa must be positive")
    return PressureLaw(
        p=lambda v: k * np.power(v, -g),
        p_deriv=lambda v: -g * k * np.power(v, -g - 1.0),
        p_second=lambda v: g * (g + 1.0) * k * np.power(v, -g - 2.0),
        p_third=lambda v: -g * (g + 1.0) * (g + 2.0) * k * np.power(v, -g - 3.0),
        v_lo=v_lo, v_hi=v_hi, gamma=g, kappa=k,
    )


def linear_law(slope: float = 1.0, v_lo: float = 0.3, v_hi: float = 5.0) -> PressureLaw:
    """p(v) = -slope v, a test law with p'' = 0."""
    return PressureLaw(
        p=lambda v: -slope * np.asarray(v, dtype=float),
        p_deriv=lambda v: -slope * np.ones_like(np.asarray(v, dtype=float)),
        p_second=lambda v: 0.0 * np.asarray(v, dtype=float),
        p_third=lambda v: 0.0 * np.asarray(v, dtype=float),
        v_lo=v_lo, v_hi=v_hi,
    )


@dataclass(frozen=True)
class PSystemTemplate:
    flux_pair: FluxPair
    law: PressureLaw

    @property
    def rect(self):
        return self.flux_pair.rect


def make_psystem(law: PressureLaw, u_range=(-3.0, 3.0)) -> PSystemTemplate:
    f1 = law.as_flux()
    f2 = linear_flux(tuple(u_range), slope=-1.0, name="minus-u")
    return PSystemTemplate(FluxPair(f1, f2, "psystem"), law)


@dataclass
class PressureRecovery:
    p_m: object
    report: object
    f2_residual: float
    L_p: float
    err_value: Optional[float] = None
    err_deriv: Optional[float] = None


def recover_pressure(law: PressureLaw, v_range=(0.8, 2.0), u_range=(-0.5, 0.5), m: int = 4,
                     T: float = 1.0, anchors="known", template_u_range=(-3.0, 3.0),
                     f2_tol: float = 1e-6) -> PressureRecovery:
    """Reconstruct p on a dyadic v-grid; the known f2 = -u serves as a check.

    ``anchors`` is "known" (use p(v_lo) and -u_lo), "unknown", or a pair.
    """
    tpl = make_psystem(law, template_u_range)
    grid = GridSpec(float(u_range[0]), float(u_range[1]), float(v_range[0]), float(v_range[1]), int(m))
    if isinstance(anchors, str) and anchors.lower() == "known":
        anchors = (float(law.p(grid.v_star)), -grid.u_star)
    report = reconstruct_all(tpl.flux_pair, grid, T, anchors)

    # f2 increments must equal -du; the absolute level depends on the anchor
    du = np.diff(grid.u_nodes)
    res = float(np.max(np.abs(report.increments[1] + du)))
    if report.anchor_mode == "Known":
        res = max(res, float(np.max(np.abs(report.nodal_f2 + grid.u_nodes))))
    if res > f2_tol:
        raise ObservationInconsistencyError(f"recovered f2 deviates from -u by {res:.3e}")

    sub = tpl.flux_pair.f1.restrict(grid.v_star, grid.v_sup)
    return PressureRecovery(report.interpolants[0], report, res, sub.lipschitz_of_deriv)


def euler_eigen(law, rho: float, u_vel: float = 0.0, dp_drho: Optional[Callable] = None):
    """Acoustic speeds u -/+ sqrt(p'(rho)).

    ``law`` is a PressureLaw in specific volume, or a callable p(rho); for a
    callable without ``dp_drho`` the derivative is a central difference.
    """
    if isinstance(law, PressureLaw):
        dp = eulerian_derivative(law, rho)
    elif dp_drho is not None:
        dp = dp_drho(rho)
    else:
        h = 1e-6 * max(1.0, abs(rho))
        dp = (law(rho + h) - law(rho - h)) / (2 * h)
    dp = float(dp)
    if not dp > 0:
        raise HyperbolicityError(f"p'(rho) = {dp} is not positive at rho = {rho}")
    c = float(np.sqrt(dp))
    return u_vel - c, u_vel + c


def eulerian_derivative(law: PressureLaw, rho):
    """dp/drho from the Lagrangian law: -p_v'(1/rho) / rho^2."""
    rho = np.asarray(rho, dtype=float)
    return -law.p_deriv(1.0 / rho) / (rho * rho)


def pressure_in_density(p_m, rho):
    """Recovered pressure resampled as a function of density."""
    return p_m.eval(1.0 / np.asarray(rho, dtype=float))
