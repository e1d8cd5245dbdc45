"""Convergence tables for reconstructed fluxes and the L1 stability experiment."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (ConfigError, DomainExitError, FluxReconError, HyperbolicityError,
                     InconclusiveMeasurementError, StepFailure)
from .flux import FluxPair, linf_errors
from .reconstruct import GridSpec, reconstruct_all
from .riemann import State, middle_states

ORDER_FLOOR = 1e-14


def _order(a, b):
    if a is None or b is None or a <= ORDER_FLOOR or b <= ORDER_FLOOR:
        return None
    return math.log2(a / b)


@dataclass
class ConvergenceRow:
    m: int
    delta: float
    eta: float
    err_f1: float
    err_f1_deriv: float
    err_f2: float
    err_f2_deriv: float
    order_f1: Optional[float] = None
    order_f1_deriv: Optional[float] = None
    order_f2: Optional[float] = None
    order_f2_deriv: Optional[float] = None


ERR_FIELDS = ("err_f1", "err_f1_deriv", "err_f2", "err_f2_deriv")
ORDER_FIELDS = ("order_f1", "order_f1_deriv", "order_f2", "order_f2_deriv")


@dataclass
class ConvergenceTable:
    rows: list
    reports: list = field(default_factory=list, repr=False)

    def column(self, name):
        return [getattr(r, name) for r in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "delta", "eta", "log2_delta", "log2_eta", *ERR_FIELDS,
                    *("log2_" + f for f in ERR_FIELDS), *ORDER_FIELDS])
        for r in self.rows:
            errs = [getattr(r, f) for f in ERR_FIELDS]
            logs = [repr(math.log2(e)) if e > 0 else "" for e in errs]
            orders = ["" if getattr(r, f) is None else repr(getattr(r, f)) for f in ORDER_FIELDS]
            w.writerow([r.m, repr(r.delta), repr(r.eta), repr(math.log2(r.delta)), repr(math.log2(r.eta)),
                        *map(repr, errs), *logs, *orders])
        return buf.getvalue()


def run_convergence(truth, rect, T: float = 1.0, m_list=(3, 4, 5, 6), source=None,
                    samples: int = 1000) -> ConvergenceTable:
    """Reconstruct at every m and tabulate sup-norm errors and log2 orders.

    ``truth`` is the (f1, f2) pair used both as oracle and, unless ``source``
    is given, as the forward model.
    """
    m_list = list(m_list)
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ConfigError("m_list must be strictly increasing", field="m")
    f1, f2 = truth
    src = source if source is not None else FluxPair(f1, f2)
    rows, reports = [], []
    for m in m_list:
        grid = GridSpec.from_rect(rect, m)
        anchors = (float(f1.value(grid.v_star)), float(f2.value(grid.u_star)))
        try:
            rep = reconstruct_all(src, grid, T, anchors)
        except StepFailure as exc:
            raise StepFailure(exc.step, FluxReconError(f"m={m}: {exc.cause}")) from exc
        e1, d1 = linf_errors(rep.interpolants[0], f1, samples)
        e2, d2 = linf_errors(rep.interpolants[1], f2, samples)
        rows.append(ConvergenceRow(m, grid.delta, grid.eta, e1, d1, e2, d2))
        reports.append(rep)
    for prev, row in zip(rows, rows[1:]):
        for ef, of in zip(ERR_FIELDS, ORDER_FIELDS):
            setattr(row, of, _order(getattr(prev, ef), getattr(row, ef)))
    return ConvergenceTable(rows, reports)


# finite-volume evolution

@dataclass(frozen=True)
class StepData:
    """Piecewise-constant data: states[k] on (breaks[k-1], breaks[k])."""

    breaks: tuple
    states: tuple

    def __post_init__(self):
        if len(self.states) != len(self.breaks) + 1:
            raise ValueError("need one more state than breakpoints")
        if any(b <= a for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must increase")

    def cell_averages(self, edges):
        """Exact cell averages on the partition ``edges``."""
        edges = np.asarray(edges, dtype=float)
        lo, hi = edges[:-1], edges[1:]
        cuts = np.concatenate(([-np.inf], np.asarray(self.breaks, dtype=float), [np.inf]))
        u = np.zeros(lo.size)
        v = np.zeros(lo.size)
        for k, st in enumerate(self.states):
            w = np.clip(np.minimum(hi, cuts[k + 1]) - np.maximum(lo, cuts[k]), 0.0, None)
            u += w * st[0]
            v += w * st[1]
        dx = hi - lo
        return u / dx, v / dx


@dataclass
class FVSolution:
    edges: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t: float
    steps: int

    @property
    def dx(self):
        return np.diff(self.edges)


def godunov_flux(fp, uL, vL, uR, vR, n_ode=4):
    """Interface flux (f1(v), f2(u)) at the middle state, which sits at x/t = 0."""
    um = np.array(uL, dtype=float, copy=True)
    vm = np.array(vL, dtype=float, copy=True)
    jump = (uL != uR) | (vL != vR)
    if np.any(jump):
        um[jump], vm[jump] = middle_states(fp, uL[jump], vL[jump], uR[jump], vR[jump], n_ode=n_ode)
    return fp.f1.value(vm), fp.f2.value(um)


def _max_speed(fp, u, v):
    prod = fp.f1.deriv(v) * fp.f2.deriv(u)
    if np.any(~(prod > 0)):
        k = int(np.argmax(~(prod > 0)))
        st = State(float(u[k]), float(v[k]))
        raise HyperbolicityError(f"lost hyperbolicity at {st}", state=st)
    return float(np.sqrt(np.max(prod)))


def evolve_fv(fp, initial, T: float, cells: int, cfl: float = 0.9, x_range=(-2.5, 2.5),
              n_ode: int = 4) -> FVSolution:
    """First-order Godunov scheme with transmissive boundaries."""
    if not 0 < cfl < 1:
        raise ConfigError("cfl must lie in (0, 1)", field="cfl")
    if not T > 0 or cells < 1:
        raise ConfigError("need T > 0 and cells >= 1")
    edges = np.linspace(x_range[0], x_range[1], cells + 1)
    dx = (x_range[1] - x_range[0]) / cells
    if isinstance(initial, StepData):
        u, v = initial.cell_averages(edges)
    else:
        mids = 0.5 * (edges[:-1] + edges[1:])
        u, v = (np.asarray(a, dtype=float) for a in initial(mids))
    u_lo, u_hi, v_lo, v_hi = fp.rect
    t, n = 0.0, 0
    while t < T:
        dt = min(cfl * dx / _max_speed(fp, u, v), T - t)
        ue = np.concatenate(([u[0]], u, [u[-1]]))
        ve = np.concatenate(([v[0]], v, [v[-1]]))
        F1, F2 = godunov_flux(fp, ue[:-1], ve[:-1], ue[1:], ve[1:], n_ode)
        # u_t + f1(v)_x = 0, v_t + f2(u)_x = 0
        u = u - dt / dx * np.diff(F1)
        v = v - dt / dx * np.diff(F2)
        if np.any((u < u_lo) | (u > u_hi) | (v < v_lo) | (v > v_hi)):
            raise DomainExitError(f"solution left the hyperbolicity rectangle at t={t + dt:.6g}")
        t = T if dt == T - t else t + dt
        n += 1
    return FVSolution(edges, u, v, t, n)


def l1_distance(a: FVSolution, b: FVSolution) -> float:
    if a.edges.shape != b.edges.shape or np.any(a.edges != b.edges):
        raise ValueError("solutions live on different meshes")
    return float(np.sum(a.dx * (np.abs(a.u - b.u) + np.abs(a.v - b.v))))


@dataclass
class StabilityResult:
    m: int
    L1_distance: float
    bound_rhs: float
    empirical_C: float
    cells: int
    history: list = field(default_factory=list)

    def to_json(self):
        return {"m": self.m, "L1_distance": self.L1_distance, "bound_rhs": self.bound_rhs,
                "empirical_C": self.empirical_C, "cells": self.cells,
                "history": [list(h) for h in self.history]}


DEFAULT_INITIAL = StepData((-0.4, 0.4), ((0.55, 0.35), (0.75, 0.45), (0.5, 0.3)))


def stability_experiment(truth, rect, T: float = 1.0, m: int = 3, initial: StepData = DEFAULT_INITIAL,
                         cells0: int = 200, cfl: float = 0.9, max_levels: int = 6, rel_change: float = 0.05,
                         x_range=(-2.5, 2.5), report=None) -> StabilityResult:
    """L1 distance at time T between evolutions under the true and reconstructed fluxes.

    The mesh is doubled from ``cells0`` until the distance changes by less
    than ``rel_change`` of itself.
    """
    f1, f2 = truth
    grid = GridSpec.from_rect(rect, m)
    if report is None:
        anchors = (float(f1.value(grid.v_star)), float(f2.value(grid.u_star)))
        report = reconstruct_all(FluxPair(f1, f2), grid, T, anchors)
    fp_true = FluxPair(f1, f2)
    fp_rec = FluxPair(*report.interpolants)
    L1 = f1.restrict(grid.v_star, grid.v_sup).lipschitz_of_deriv
    L2 = f2.restrict(grid.u_star, grid.u_sup).lipschitz_of_deriv
    rhs = L1 * grid.eta + L2 * grid.delta

    history = []
    prev = None
    cells = cells0
    for _ in range(max_levels):
        a = evolve_fv(fp_true, initial, T, cells, cfl, x_range)
        b = evolve_fv(fp_rec, initial, T, cells, cfl, x_range)
        d = l1_distance(a, b)
        history.append((cells, d))
        if prev is not None and abs(d - prev) < rel_change * d:
            C = d / (T * rhs) if rhs > 0 else 0.0
            return StabilityResult(m, d, rhs, C, cells, history)
        if prev is not None and d == 0.0 and prev == 0.0:
            return StabilityResult(m, 0.0, rhs, 0.0, cells, history)
        prev = d
        cells *= 2
    raise InconclusiveMeasurementError(f"L1 distance did not settle under mesh refinement: {history}")
