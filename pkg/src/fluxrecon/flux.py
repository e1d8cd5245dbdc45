"""Flux functions: analytic ground truth, piecewise-quadratic C1 interpolants,
and the sup-norm errors between them."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainMismatchError, InvalidGridError, OutOfDomainError

ConstantsFn = Callable[[float, float], "tuple[float, Optional[float]]"]


@dataclass(frozen=True)
class AnalyticFlux:
    """A scalar flux with known derivative and regularity constants.

    ``lipschitz_of_deriv`` (L) and ``third_deriv_bound`` refer to ``domain``.
    ``constants`` optionally maps a sub-interval ``(a, b)`` to the pair
    ``(L, sup|f'''|)`` on it; ``restrict`` uses it to tighten the constants.
    """

    value: Callable
    deriv: Callable
    domain: tuple
    lipschitz_of_deriv: float
    second_deriv: Optional[Callable] = None
    third_deriv_bound: Optional[float] = None
    name: str = ""
    constants: Optional[ConstantsFn] = field(default=None, compare=False)

    def __post_init__(self):
        a, b = self.domain
        if not a < b:
            raise ValueError(f"empty flux domain {self.domain}")
        if self.lipschitz_of_deriv < 0:
            raise ValueError("lipschitz_of_deriv must be nonnegative")

    def restrict(self, a: float, b: float) -> "AnalyticFlux":
        lo, hi = self.domain
        if a < lo or b > hi or not a < b:
            raise DomainMismatchError(f"[{a}, {b}] is not inside {self.domain}")
        if self.constants is None:
            return replace(self, domain=(a, b))
        lip, third = self.constants(a, b)
        return replace(self, domain=(a, b), lipschitz_of_deriv=lip, third_deriv_bound=third)


@dataclass(frozen=True)
class FluxPair:
    """The coupled flux (f1 of v, f2 of u).

    The hyperbolicity rectangle is read off the component domains:
    ``u`` ranges over ``f2.domain`` and ``v`` over ``f1.domain``.
    """

    f1: object
    f2: object
    name: str = ""

    @property
    def rect(self):
        (u_lo, u_hi), (v_lo, v_hi) = self.f2.domain, self.f1.domain
        return (u_lo, u_hi, v_lo, v_hi)


class FluxGrid:
    """Uniform nodes with nodal flux values.

    ``increments`` may be supplied when the values were produced by
    accumulation; derivative data of the interpolant is then built from the
    increments themselves, so it does not depend on the anchor.
    """

    def __init__(self, nodes, values, anchor=None, increments=None):
        nodes = np.array(nodes, dtype=float)
        values = np.array(values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidGridError("a grid needs at least two nodes")
        if values.shape != nodes.shape:
            raise InvalidGridError("values and nodes differ in length")
        steps = np.diff(nodes)
        if np.any(steps <= 0):
            raise InvalidGridError("nodes must be strictly increasing")
        h = (nodes[-1] - nodes[0]) / (nodes.size - 1)
        if np.max(np.abs(steps - h)) > 1e-12 * max(abs(h), np.max(np.abs(nodes))):
            raise InvalidGridError("nodes are not uniformly spaced")
        if anchor is None:
            anchor = values[0]
        if values[0] != anchor:
            raise InvalidGridError(f"values[0]={values[0]!r} differs from anchor {anchor!r}")
        if increments is None:
            increments = np.diff(values)
        else:
            increments = np.array(increments, dtype=float)
            if increments.shape != (nodes.size - 1,):
                raise InvalidGridError("need one increment per interval")
        for arr in (nodes, values, increments):
            arr.setflags(write=False)
        self.nodes = nodes
        self.values = values
        self.anchor = float(anchor)
        self.increments = increments
        self.spacing = float(h)

    @property
    def domain(self):
        return (float(self.nodes[0]), float(self.nodes[-1]))


class QuadC1Interpolant:
    """Piecewise-quadratic C1 interpolant from the derivative recurrence.

    On ``[x_h, x_{h+1}]`` the piece is
    ``(d_{h+1} - d_h)/(2 h) (x - x_h)^2 + d_h (x - x_h) + f_h`` with
    ``d_0 = (f_1 - f_0)/h`` and ``d_{h+1} = 2 (f_{h+1} - f_h)/h - d_h``.
    """

    def __init__(self, grid: FluxGrid, nodal_derivs):
        self.grid = grid
        d = np.array(nodal_derivs, dtype=float)
        d.setflags(write=False)
        self.nodal_derivs = d

    @property
    def nodes(self):
        return self.grid.nodes

    @property
    def values(self):
        return self.grid.values

    @property
    def domain(self):
        return self.grid.domain

    @property
    def slopes(self):
        """Average slopes A_h over each interval."""
        return self.grid.increments / self.grid.spacing

    @property
    def deviations(self):
        """Derivative deviations d_h - A_h, h = 0..N-1."""
        return self.nodal_derivs[:-1] - self.slopes

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        nodes = self.grid.nodes
        lo, hi = nodes[0], nodes[-1]
        if x.size and not (x.min() >= lo and x.max() <= hi):
            bad = np.ravel(x)[~((np.ravel(x) >= lo) & (np.ravel(x) <= hi))]
            raise OutOfDomainError(f"x={bad[0]!r} outside [{lo}, {hi}]")
        n = nodes.size - 1
        k = np.searchsorted(nodes, x, side="right") - 1
        last = k >= n
        k = np.minimum(k, n - 1)
        return x, k, x - nodes[k], last

    def eval(self, x):
        x, k, s, last = self._locate(x)
        d, h = self.nodal_derivs, self.grid.spacing
        out = (d[k + 1] - d[k]) / (2.0 * h) * s * s + d[k] * s + self.grid.values[k]
        out = np.where(last, self.grid.values[-1], out)
        return out if out.ndim else float(out)

    def eval_deriv(self, x):
        x, k, s, _ = self._locate(x)
        d, h = self.nodal_derivs, self.grid.spacing
        out = (d[k + 1] - d[k]) / h * s + d[k]
        return out if out.ndim else float(out)

    # flux protocol shared with AnalyticFlux
    value = eval
    deriv = eval_deriv

    def to_json(self):
        return {
            "nodes": self.grid.nodes.tolist(),
            "values": self.grid.values.tolist(),
            "derivs": self.nodal_derivs.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        grid = FluxGrid(obj["nodes"], obj["values"])
        return cls(grid, obj["derivs"])


def build_interpolant(grid: FluxGrid) -> QuadC1Interpolant:
    if not isinstance(grid, FluxGrid):
        raise InvalidGridError("expected a FluxGrid")
    h = grid.spacing
    inc = grid.increments
    d = np.empty(inc.size + 1)
    d[0] = inc[0] / h
    for k in range(inc.size):
        d[k + 1] = 2.0 / h * inc[k] - d[k]
    return QuadC1Interpolant(grid, d)


def sample_points(lo: float, hi: float, intervals: int, per_interval: int) -> np.ndarray:
    """Uniform sample grid with ``per_interval`` subdivisions of every interval."""
    return np.linspace(lo, hi, intervals * per_interval + 1)


def linf_errors(interp: QuadC1Interpolant, truth: AnalyticFlux, samples: int = 1000):
    """Sup-norm value and derivative errors on a uniform sample grid.

    ``samples`` is the number of subdivisions per grid interval; the grid
    nodes are included exactly.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    lo, hi = interp.domain
    tlo, thi = truth.domain
    if lo < tlo or hi > thi:
        raise DomainMismatchError(f"interpolant domain {interp.domain} not inside {truth.domain}")
    n = interp.nodes.size - 1
    x = sample_points(lo, hi, n, samples)
    x[::samples] = interp.nodes
    err_value = np.max(np.abs(truth.value(x) - interp.eval(x)))
    err_deriv = np.max(np.abs(truth.deriv(x) - interp.eval_deriv(x)))
    return float(err_value), float(err_deriv)
