"""Exact Riemann solver for u_t + f1(v)_x = 0, v_t + f2(u)_x = 0.

Wave curves are parameterized by the v-jump (family 2) or the u-jump
(family 1).  Shock branches come from a fixed-point solve of the
Rankine-Hugoniot conditions written with secant slopes; rarefaction branches
integrate the integral curve with fixed-step RK4.  The middle state is found
by a one-dimensional root search in the 1-wave parameter.

Left and right always refer to position in x: the datum is ``left`` on x < 0
and ``right`` on x > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import (
    CompositeWaveError,
    ConvergenceError,
    DomainExitError,
    FluxReconError,
    HyperbolicityError,
    InadmissibleBranchError,
    InternalConsistencyError,
    NoLocusPointError,
    NoSolutionError,
)

SHOCK = "shock"
RAREFACTION = "rarefaction"

N_ODE = 256
RICHARDSON_TOL = 1e-8
ZERO_WAVE = 1e-12
CONTACT_TOL = 1e-13


class State(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class Wave:
    kind: str
    family: int
    left: State
    right: State
    strength: float
    shock_speed: Optional[float] = None
    xi_span: Optional[tuple] = None
    contact: bool = False
    # integral-curve path: independent coordinate, dependent coordinate, slope
    path: Optional[tuple] = field(default=None, repr=False, compare=False)

    @property
    def speed_range(self):
        if self.kind == SHOCK:
            return (self.shock_speed, self.shock_speed)
        return self.xi_span

    @property
    def fan(self):
        """(xi, State) samples along the integral curve, ordered from ``left``."""
        if self.kind != RAREFACTION or self.path is None:
            return []
        x, y, _, xi = self.path
        u, v = (y, x) if self.family == 2 else (x, y)
        out = [(float(a), State(float(b), float(c))) for a, b, c in zip(xi, u, v)]
        out[0] = (out[0][0], self.left)
        out[-1] = (out[-1][0], self.right)
        return out


@dataclass(frozen=True)
class RiemannSolution:
    left: State
    middle: State
    right: State
    waves: tuple
    flux_pair: object = field(repr=False, compare=False)
    residual: float = 0.0

    def wave(self, family):
        for w in self.waves:
            if w.family == family:
                return w
        return None

    def to_json(self):
        out = {
            "left": list(self.left),
            "middle": list(self.middle),
            "right": list(self.right),
            "residual": self.residual,
            "waves": [],
        }
        for w in self.waves:
            d = {"kind": w.kind, "family": w.family, "left": list(w.left),
                 "right": list(w.right), "strength": w.strength}
            if w.kind == SHOCK:
                d["speed"] = w.shock_speed
                d["contact"] = w.contact
            else:
                d["xi_span"] = list(w.xi_span)
                d["fan"] = [[xi, s.u, s.v] for xi, s in w.fan]
            out["waves"].append(d)
        return out


# characteristic structure

def _derivs(fp, u, v):
    a = fp.f1.deriv(v)
    b = fp.f2.deriv(u)
    return a, b, a * b


def _check_hyperbolic(prod, u, v):
    if np.all(prod > 0):
        return
    bad = ~(np.asarray(prod) > 0)
    uu = np.broadcast_to(u, bad.shape)[bad] if bad.ndim else u
    vv = np.broadcast_to(v, bad.shape)[bad] if bad.ndim else v
    st = State(float(np.ravel(uu)[0]), float(np.ravel(vv)[0]))
    raise HyperbolicityError(f"f1'(v) f2'(u) <= 0 at {st}", state=st)


def _lam(fp, family, u, v):
    _, _, prod = _derivs(fp, u, v)
    _check_hyperbolic(prod, u, v)
    c = np.sqrt(prod)
    return -c if family == 1 else c


def eigenvalues(fp, s: State):
    _, _, prod = _derivs(fp, s[0], s[1])
    _check_hyperbolic(prod, s[0], s[1])
    c = float(np.sqrt(prod))
    return -c, c


def _rect(fp, rect):
    return fp.rect if rect is None else tuple(rect)


def _inside(rect, u, v):
    u_lo, u_hi, v_lo, v_hi = rect
    tu = 1e-12 * (u_hi - u_lo)
    tv = 1e-12 * (v_hi - v_lo)
    return (u >= u_lo - tu) & (u <= u_hi + tu) & (v >= v_lo - tv) & (v <= v_hi + tv)


def _require_inside(rect, s: State, what="state"):
    if not _inside(rect, s.u, s.v):
        raise DomainExitError(f"{what} {tuple(s)} outside the hyperbolicity rectangle {rect}", state=s)


# integral curves

def _rhs(fp, family, x, y):
    """Slope of the dependent coordinate along the family's integral curve."""
    if family == 2:
        u, v = y, x
    else:
        u, v = x, y
    a, b, prod = _derivs(fp, u, v)
    _check_hyperbolic(prod, u, v)
    c = np.sqrt(prod)
    return a / c if family == 2 else -b / c


def _split(family, u, v):
    return (v, u) if family == 2 else (u, v)


def _join(family, x, y):
    return (y, x) if family == 2 else (x, y)


def _integrate(fp, family, u0, v0, sigma, n, keep_path=False):
    """RK4 along the integral curve, ``n`` equal steps over the jump ``sigma``."""
    x, y = _split(family, u0, v0)
    h = sigma / n
    if keep_path:
        xs, ys, dys = [x], [y], []
    for _ in range(n):
        k1 = _rhs(fp, family, x, y)
        k2 = _rhs(fp, family, x + 0.5 * h, y + 0.5 * h * k1)
        k3 = _rhs(fp, family, x + 0.5 * h, y + 0.5 * h * k2)
        k4 = _rhs(fp, family, x + h, y + h * k3)
        y = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        x = x + h
        if keep_path:
            dys.append(k1)
            xs.append(x)
            ys.append(y)
    if keep_path:
        dys.append(_rhs(fp, family, x, y))
        return _join(family, x, y), (np.array(xs), np.array(ys), np.array(dys))
    return _join(family, x, y)


# Hugoniot locus

def _slope(f, x0, dx):
    small = np.abs(dx) < 1e-7 * (1.0 + np.abs(x0))
    safe = np.where(small, 1.0, dx)
    sec = (f.value(x0 + dx) - f.value(x0)) / safe
    return np.where(small, f.deriv(x0 + 0.5 * dx), sec)


def _hugoniot(fp, family, u0, v0, sigma, max_iter=200):
    """Point on the family's Hugoniot locus at jump ``sigma``.

    Returns (u1, v1, s, converged).  With secant slopes a1 of f1 and a2 of f2
    the jump conditions read a1 dv = s du and a2 du = s dv, so s^2 = a1 a2.
    """
    if family == 2:
        fk, fu, x0, y0, sgn = fp.f1, fp.f2, v0, u0, 1.0
    else:
        fk, fu, x0, y0, sgn = fp.f2, fp.f1, u0, v0, -1.0
    ak = _slope(fk, x0, sigma)
    au = fu.deriv(y0)
    prod = ak * au
    if not np.all(prod > 0):
        raise NoLocusPointError("jump conditions have no real speed on this branch")
    dy = ak * sigma / (sgn * np.sqrt(prod))
    converged = np.zeros(np.shape(dy), dtype=bool)
    for _ in range(max_iter):
        au = _slope(fu, y0, dy)
        prod = ak * au
        if not np.all(prod > 0):
            raise NoLocusPointError("jump conditions have no real speed on this branch")
        new = ak * sigma / (sgn * np.sqrt(prod))
        converged = np.abs(new - dy) <= 1e-15 * (1.0 + np.abs(y0) + np.abs(dy))
        dy = new
        if np.all(converged):
            break
    au = _slope(fu, y0, dy)
    s = sgn * np.sqrt(ak * au)
    u1, v1 = _join(family, x0 + sigma, y0 + dy)
    return u1, v1, s, converged


# wave curves

def _wave_end(fp, family, u0, v0, sigma, n):
    """End state of the admissible wave curve (vectorized, no path)."""
    ur, vr = _integrate(fp, family, u0, v0, sigma, n)
    grow = _lam(fp, family, ur, vr) - _lam(fp, family, u0, v0)
    us, vs, _, _ = _hugoniot(fp, family, u0, v0, sigma)
    rare = grow > 0
    return np.where(rare, ur, us), np.where(rare, vr, vs)


def _contact_scale(lam0):
    return CONTACT_TOL * (1.0 + abs(lam0))


def rarefaction_branch(fp, start: State, family: int, strength: float, n_ode: int = N_ODE,
                       rect=None, check=True, admissible=True):
    """Integrate the integral curve from ``start`` over the jump ``strength``.

    Returns (to, fan) where fan is a list of (xi, State) with xi = lambda(state).
    With ``admissible`` the characteristic speed must grow along the curve;
    switching it off returns the bare integral curve in either direction.
    """
    rect = _rect(fp, rect)
    start = State(float(start[0]), float(start[1]))
    if strength == 0:
        return start, []
    wave = _rarefaction(fp, start, family, float(strength), n_ode, rect, check, admissible)
    return wave.right, wave.fan


def _rarefaction(fp, start, family, sigma, n, rect, check=True, admissible=True):
    _require_inside(rect, start, "start")
    (u1, v1), path = _integrate(fp, family, start.u, start.v, sigma, n, keep_path=True)
    u_path, v_path = _join(family, path[0], path[1])
    out = ~_inside(rect, u_path, v_path)
    if np.any(out):
        k = int(np.argmax(out))
        st = State(float(u_path[k]), float(v_path[k]))
        raise DomainExitError(f"integral curve leaves the rectangle at {tuple(st)}", state=st)
    if check:
        u2, v2 = _integrate(fp, family, start.u, start.v, sigma, 2 * n)
        scale = 1.0 + abs(u1) + abs(v1)
        if max(abs(u2 - u1), abs(v2 - v1)) > RICHARDSON_TOL * scale:
            raise ConvergenceError("integral curve failed the step-halving check")
    lam = _lam(fp, family, u_path, v_path)
    tol = _contact_scale(lam[0])
    if admissible and np.any(np.diff(lam) < -tol):
        if lam[-1] > lam[0]:
            raise CompositeWaveError(f"family-{family} speed is not monotone along the branch")
        raise InadmissibleBranchError(f"family-{family} speed decreases along this branch")
    if not admissible and lam[-1] < lam[0]:
        return Wave(RAREFACTION, family, start, State(float(u1), float(v1)), sigma,
                    xi_span=(float(lam[-1]), float(lam[0])), path=path + (lam,))
    return Wave(RAREFACTION, family, start, State(float(u1), float(v1)), sigma,
                xi_span=(float(lam[0]), float(lam[-1])), path=path + (lam,))


def _lax_ok(lam_l, lam_r, s, contact, scale):
    if contact:
        tol = _contact_scale(scale)
        return lam_r <= s + tol and s <= lam_l + tol
    return lam_r < s < lam_l


def shock_branch(fp, start: State, family: int, strength: float, rect=None):
    """Hugoniot-locus point at jump ``strength``; returns (to, speed).

    The admissible half satisfies lambda_k(to) < s < lambda_k(start) with
    ``start`` on the left of the discontinuity.
    """
    rect = _rect(fp, rect)
    start = State(float(start[0]), float(start[1]))
    _require_inside(rect, start, "start")
    if strength == 0:
        return start, float(_lam(fp, family, start.u, start.v))
    wave = _shock(fp, start, family, float(strength), rect)
    return wave.right, wave.shock_speed


def _shock(fp, start, family, sigma, rect, contact=None):
    u1, v1, s, conv = _hugoniot(fp, family, start.u, start.v, sigma)
    if not np.all(conv):
        raise ConvergenceError("Hugoniot fixed-point iteration did not converge")
    to = State(float(u1), float(v1))
    _require_inside(rect, to, "shock state")
    s = float(s)
    lam_l = float(_lam(fp, family, *start))
    lam_r = float(_lam(fp, family, *to))
    if contact is None:
        contact = abs(lam_r - lam_l) <= _contact_scale(lam_l)
    if not _lax_ok(lam_l, lam_r, s, contact, lam_l):
        ur, vr = _integrate(fp, family, start.u, start.v, sigma, 64)
        if float(_lam(fp, family, ur, vr)) > lam_l:
            raise InadmissibleBranchError(f"family-{family} shock violates the entropy condition")
        raise CompositeWaveError(f"family-{family} shock violates the entropy condition")
    return Wave(SHOCK, family, start, to, sigma, shock_speed=s, contact=bool(contact))


def _wave(fp, start, family, sigma, n, rect, check=True):
    """Admissible wave from ``start``: rarefaction if lambda grows along the curve."""
    ur, vr = _integrate(fp, family, start.u, start.v, sigma, n)
    lam0 = float(_lam(fp, family, *start))
    grow = float(_lam(fp, family, ur, vr)) - lam0
    if grow > _contact_scale(lam0):
        return _rarefaction(fp, start, family, sigma, n, rect, check)
    return _shock(fp, start, family, sigma, rect, contact=abs(grow) <= _contact_scale(lam0))


def rh_residuals(fp, w: Wave):
    du = w.right.u - w.left.u
    dv = w.right.v - w.left.v
    s = w.shock_speed
    r1 = float(fp.f1.value(w.right.v) - fp.f1.value(w.left.v) - s * du)
    r2 = float(fp.f2.value(w.right.u) - fp.f2.value(w.left.u) - s * dv)
    return r1, r2


# middle state

def _initial_sigma1(fp, uL, vL, uR, vR):
    ua, va = 0.5 * (uL + uR), 0.5 * (vL + vR)
    a, _, prod = _derivs(fp, ua, va)
    _check_hyperbolic(prod, ua, va)
    return 0.5 * ((uR - uL) - (vR - vL) * a / np.sqrt(prod))


def _mismatch(fp, uL, vL, uR, vR, s1, n):
    um, vm = _wave_end(fp, 1, uL, vL, s1, n)
    ue, _ = _wave_end(fp, 2, um, vm, vR - vm, n)
    return ue - uR, um, vm


def _secant(fp, uL, vL, uR, vR, n, ftol, max_iter=40):
    """Vectorized secant iteration on the 1-wave jump.  Returns (s1, F, done)."""
    x0 = _initial_sigma1(fp, uL, vL, uR, vR)
    f0, _, _ = _mismatch(fp, uL, vL, uR, vR, x0, n)
    done = np.abs(f0) <= ftol
    jump = np.abs(uR - uL) + np.abs(vR - vL)
    x1 = np.where(done, x0, x0 + np.maximum(1e-3 * np.abs(x0), 1e-4 * jump) + 1e-14)
    f1, _, _ = _mismatch(fp, uL, vL, uR, vR, x1, n)
    x1 = np.where(done, x0, x1)
    f1 = np.where(done, f0, f1)
    for _ in range(max_iter):
        done = done | (np.abs(f1) <= ftol)
        if np.all(done):
            break
        den = f1 - f0
        stuck = den == 0
        step = np.where(done | stuck, 0.0, f1 * (x1 - x0) / np.where(stuck, 1.0, den))
        x0, f0 = x1, f1
        x1 = x1 - step
        f1, _, _ = _mismatch(fp, uL, vL, uR, vR, x1, n)
        tiny = np.abs(step) <= 1e-16 * (1.0 + np.abs(x1))
        done = done | stuck | tiny
    return x1, f1, np.abs(f1) <= ftol


def middle_states(fp, uL, vL, uR, vR, n_ode=16, ftol=1e-12):
    """Middle states for many Riemann data at once.

    No admissibility validation is done here; composite configurations return
    the intersection of the selected branches.
    """
    uL, vL, uR, vR = (np.asarray(a, dtype=float) for a in (uL, vL, uR, vR))
    scale = 1.0 + np.abs(uL) + np.abs(vL) + np.abs(uR) + np.abs(vR)
    s1, _, ok = _secant(fp, uL, vL, uR, vR, n_ode, ftol * scale)
    if not np.all(ok):
        bad = np.flatnonzero(~np.ravel(ok))
        s1 = np.array(s1, dtype=float, copy=True)
        flat = s1.reshape(-1)
        for k in bad:
            i = np.unravel_index(k, np.shape(ok))
            flat[k] = _bracket_root(fp, uL[i], vL[i], uR[i], vR[i], n_ode, flat[k])
    um, vm = _wave_end(fp, 1, uL, vL, s1, n_ode)
    return um, vm


def _bracket_root(fp, uL, vL, uR, vR, n, guess, tol=1e-15):
    def g(s):
        return float(_mismatch(fp, uL, vL, uR, vR, s, n)[0])

    jump = abs(uR - uL) + abs(vR - vL)
    width = max(abs(guess), jump, 1e-8)
    errors = (FluxReconError, FloatingPointError)
    try:
        g0 = g(guess)
    except errors as exc:
        raise NoSolutionError(f"wave curves leave the domain near the initial guess: {exc}") from exc
    if g0 == 0:
        return guess
    for _ in range(40):
        for cand in (guess - width, guess + width):
            try:
                gc = g(cand)
            except errors:
                continue
            if np.sign(gc) != np.sign(g0):
                lo, hi = sorted((guess, cand))
                return brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
        width *= 1.6
    raise NoSolutionError("no intersection of the wave curves inside the domain")


def solve_riemann(fp, left, right, tol: float = 1e-10, n_ode: int = N_ODE, rect=None):
    """Solve the Riemann problem with ``left`` on x < 0 and ``right`` on x > 0."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    rect = _rect(fp, rect)
    L = State(float(left[0]), float(left[1]))
    R = State(float(right[0]), float(right[1]))
    for s, name in ((L, "left"), (R, "right")):
        if not (np.isfinite(s.u) and np.isfinite(s.v)):
            raise NoSolutionError(f"{name} state is not finite")
        _require_inside(rect, s, name)
    eigenvalues(fp, L)
    eigenvalues(fp, R)
    if L == R:
        return RiemannSolution(L, L, R, (), fp, 0.0)

    scale = 1.0 + abs(L.u) + abs(L.v) + abs(R.u) + abs(R.v)
    ftol = 1e-3 * tol * scale
    try:
        s1, f1, ok = _secant(fp, *L, *R, n_ode, ftol)
        s1, ok = float(s1), bool(ok)
    except (FluxReconError, FloatingPointError):
        ok = False
    if not ok:
        s1 = float(_bracket_root(fp, *L, *R, n_ode, float(_initial_sigma1(fp, *L, *R))))

    if abs(s1) < ZERO_WAVE * scale:
        s1 = 0.0
    waves = []
    if s1 == 0.0:
        M = L
    else:
        w1 = _wave(fp, L, 1, s1, n_ode, rect)
        M = w1.right
        waves.append(w1)
    s2 = R.v - M.v
    if abs(s2) >= ZERO_WAVE * scale:
        w2 = _wave(fp, M, 2, s2, n_ode, rect)
        end = w2.right
        waves.append(replace(w2, right=R))
    else:
        end = M
        if waves:
            waves[-1] = replace(waves[-1], right=R)
        M = R
    residual = float(max(abs(end.u - R.u), abs(end.v - R.v)))
    if residual > tol * scale:
        raise ConvergenceError(f"middle-state residual {residual:.3e} exceeds tol")
    for w in waves:
        if w.kind == SHOCK:
            r1, r2 = rh_residuals(fp, w)
            sc = 1.0 + abs(w.shock_speed) + abs(w.right.u - w.left.u) + abs(w.right.v - w.left.v)
            if max(abs(r1), abs(r2)) > 1e-10 * sc:
                raise ConvergenceError(f"family-{w.family} shock misses the jump conditions")
    if len(waves) == 2 and not waves[0].speed_range[1] < waves[1].speed_range[0]:
        raise InternalConsistencyError("the two waves overlap")
    return RiemannSolution(L, M, R, tuple(waves), fp, residual)


# regions and sampling

def classify_region(fp, left, right, sol: Optional[RiemannSolution] = None):
    """Region tag from the wave kinds: I (S,S), II (S,R), III (R,R), IV (R,S).

    A missing wave counts as a rarefaction, so left == right gives III.
    """
    if sol is None:
        sol = solve_riemann(fp, left, right)
    kinds = []
    for fam in (1, 2):
        w = sol.wave(fam)
        kinds.append("S" if w is not None and w.kind == SHOCK else "R")
    return {("S", "S"): "I", ("S", "R"): "II", ("R", "R"): "III", ("R", "S"): "IV"}[tuple(kinds)]


def _spline(w: Wave):
    x, y, dy, _ = w.path
    t = (x - x[0]) / (x[-1] - x[0])
    t[0], t[-1] = 0.0, 1.0
    keep = np.concatenate(([True], np.diff(t) > 0))
    return CubicHermiteSpline(t[keep], y[keep], dy[keep] * (x[-1] - x[0])), x[0], x[-1] - x[0]


def fan_states(fp, w: Wave, xi):
    """States inside a rarefaction at similarity coordinates ``xi`` (vectorized)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    lo, hi = w.xi_span
    spl, x0, span = _spline(w)
    t_lo = np.zeros_like(xi)
    t_hi = np.ones_like(xi)
    for _ in range(60):
        t = 0.5 * (t_lo + t_hi)
        u, v = _join(w.family, x0 + t * span, spl(t))
        below = _lam(fp, w.family, u, v) < xi
        t_lo = np.where(below, t, t_lo)
        t_hi = np.where(below, t_hi, t)
    t = 0.5 * (t_lo + t_hi)
    u, v = _join(w.family, x0 + t * span, spl(t))
    u = np.where(xi <= lo, w.left.u, np.where(xi >= hi, w.right.u, u))
    v = np.where(xi <= lo, w.left.v, np.where(xi >= hi, w.right.v, v))
    return u, v


def sample_at_time(sol: RiemannSolution, T: float, x):
    """State at (x, T).  Scalar ``x`` gives a State; arrays give (u, v) arrays."""
    if not T > 0:
        raise ValueError("T must be positive")
    scalar = np.ndim(x) == 0
    xi = np.atleast_1d(np.asarray(x, dtype=float)) / T
    u = np.full(xi.shape, sol.left.u)
    v = np.full(xi.shape, sol.left.v)
    for w in sol.waves:
        past = xi >= w.speed_range[0]
        u = np.where(past, w.right.u, u)
        v = np.where(past, w.right.v, v)
    for w in sol.waves:
        if w.kind != RAREFACTION:
            continue
        lo, hi = w.xi_span
        inside = (xi > lo) & (xi < hi)
        if np.any(inside):
            u[inside], v[inside] = fan_states(sol.flux_pair, w, xi[inside])
        u = np.where(xi == lo, w.left.u, u)
        v = np.where(xi == lo, w.left.v, v)
    if scalar:
        return State(float(u[0]), float(v[0]))
    return u, v
