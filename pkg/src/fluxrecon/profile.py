"""Observed profiles at a fixed time, wave detection and equivalent shocks.

Everything downstream of ``observe`` reads only the sampled profile.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.integrate import trapezoid

from .errors import InternalConsistencyError, ProfileParseError
from .riemann import RAREFACTION, SHOCK, State, fan_states


@dataclass(frozen=True)
class Constant:
    x_lo: float
    x_hi: float
    state: State


@dataclass(frozen=True, eq=False)
class Fan:
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for a in (self.x, self.u, self.v):
            a.setflags(write=False)

    @property
    def x_lo(self):
        return float(self.x[0])

    @property
    def x_hi(self):
        return float(self.x[-1])

    @property
    def left(self):
        return State(float(self.u[0]), float(self.v[0]))

    @property
    def right(self):
        return State(float(self.u[-1]), float(self.v[-1]))

    def __eq__(self, other):
        return (isinstance(other, Fan) and np.array_equal(self.x, other.x)
                and np.array_equal(self.u, other.u) and np.array_equal(self.v, other.v))


Segment = Union[Constant, Fan]


@dataclass(frozen=True)
class ObservedProfile:
    T: float
    segments: tuple

    @property
    def domain(self):
        return (self.segments[0].x_lo, self.segments[-1].x_hi)

    @property
    def fans(self):
        return [s for s in self.segments if isinstance(s, Fan)]

    def validate(self):
        segs = self.segments
        if not segs or not isinstance(segs[0], Constant) or not isinstance(segs[-1], Constant):
            raise ProfileParseError("a profile must start and end with constant segments")
        for a, b in zip(segs[:-1], segs[1:]):
            if a.x_hi != b.x_lo:
                raise ProfileParseError(f"segments do not tile: {a.x_hi!r} != {b.x_lo!r}")
            if isinstance(a, Fan) and isinstance(b, Fan):
                raise ProfileParseError("adjacent fan segments")
        for s in segs:
            if isinstance(s, Constant):
                if not s.x_lo <= s.x_hi:
                    raise ProfileParseError("constant segment with x_lo > x_hi")
            else:
                if s.x.size < 2 or np.any(np.diff(s.x) <= 0):
                    raise ProfileParseError("fan samples must have strictly increasing x")
                for comp in (s.u, s.v):
                    d = np.diff(comp)
                    if np.any(d > 0) and np.any(d < 0):
                        raise ProfileParseError("fan component is not monotone")
        return self

    # serialization

    def to_json(self):
        segs = []
        for s in self.segments:
            if isinstance(s, Constant):
                segs.append({"kind": "constant", "x_lo": s.x_lo, "x_hi": s.x_hi,
                             "u": s.state.u, "v": s.state.v})
            else:
                segs.append({"kind": "fan", "x": s.x.tolist(), "u": s.u.tolist(), "v": s.v.tolist()})
        return {"T": self.T, "segments": segs}

    @classmethod
    def from_json(cls, obj):
        try:
            segs = []
            for s in obj["segments"]:
                if s["kind"] == "constant":
                    segs.append(Constant(float(s["x_lo"]), float(s["x_hi"]),
                                         State(float(s["u"]), float(s["v"]))))
                elif s["kind"] == "fan":
                    segs.append(Fan(np.array(s["x"], dtype=float), np.array(s["u"], dtype=float),
                                    np.array(s["v"], dtype=float)))
                else:
                    raise ProfileParseError(f"unknown segment kind {s['kind']!r}")
            return cls(float(obj["T"]), tuple(segs)).validate()
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ProfileParseError):
                raise
            raise ProfileParseError(f"malformed profile: {exc}") from exc

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "u", "v", "segment_kind", "segment_id"])
        for k, s in enumerate(self.segments):
            if isinstance(s, Constant):
                for x in (s.x_lo, s.x_hi):
                    w.writerow([repr(x), repr(s.state.u), repr(s.state.v), "constant", k])
            else:
                for x, u, v in zip(s.x.tolist(), s.u.tolist(), s.v.tolist()):
                    w.writerow([repr(x), repr(u), repr(v), "fan", k])
        return buf.getvalue()


def observe(sol, T: float, samples_per_fan: int = 512, margin: float = 0.5) -> ObservedProfile:
    """Sample ``sol`` at time ``T``; fans are sampled uniformly in x/T."""
    if not T > 0:
        raise ValueError("T must be positive")
    if samples_per_fan < 2 or not margin > 0:
        raise ValueError("need samples_per_fan >= 2 and margin > 0")
    if not sol.waves:
        return ObservedProfile(float(T), (Constant(-margin, margin, sol.left),))
    lo = sol.waves[0].speed_range[0] * T
    hi = sol.waves[-1].speed_range[1] * T
    x_min, x_max = lo - margin, hi + margin

    segs = []
    cursor, state = x_min, sol.left
    for w in sol.waves:
        if w.kind == SHOCK:
            x = w.shock_speed * T
            segs.append(Constant(cursor, x, state))
            cursor, state = x, w.right
            continue
        xi = np.linspace(w.xi_span[0], w.xi_span[1], samples_per_fan)
        x = xi * T
        keep = np.concatenate(([True], np.diff(x) > 0))
        x, xi = x[keep], xi[keep]
        if x.size < 2:
            # fan narrower than float resolution: observed as a jump
            segs.append(Constant(cursor, float(x[0]), state))
            cursor, state = float(x[0]), w.right
            continue
        u, v = fan_states(sol.flux_pair, w, xi)
        u[0], v[0] = w.left
        u[-1], v[-1] = w.right
        segs.append(Constant(cursor, float(x[0]), state))
        segs.append(Fan(x, u, v))
        cursor, state = float(x[-1]), w.right
    segs.append(Constant(cursor, x_max, state))
    return ObservedProfile(float(T), tuple(segs))


@dataclass(frozen=True)
class DetectedWave:
    kind: str
    x_lo: float
    x_hi: float
    left: State
    right: State
    segment: Optional[int] = None

    @property
    def interval(self):
        return (self.x_lo, self.x_hi)


@dataclass(frozen=True)
class DetectedWaves:
    waves: tuple
    warnings: tuple = ()

    @property
    def shock_positions(self):
        return np.array([w.x_lo for w in self.waves if w.kind == SHOCK])

    @property
    def fan_intervals(self):
        return [w.interval for w in self.waves if w.kind == RAREFACTION]

    @property
    def M1(self):
        return sum(w.kind == SHOCK for w in self.waves)

    @property
    def M2(self):
        return sum(w.kind == RAREFACTION for w in self.waves)

    @property
    def M(self):
        return len(self.waves)


def _state_scale(p: ObservedProfile):
    s = 0.0
    for seg in p.segments:
        if isinstance(seg, Constant):
            s = max(s, abs(seg.state.u), abs(seg.state.v))
        else:
            s = max(s, float(np.max(np.abs(seg.u))), float(np.max(np.abs(seg.v))))
    return 1.0 + s


def detect_waves(p: ObservedProfile, jump_tol: Optional[float] = None) -> DetectedWaves:
    if jump_tol is None:
        jump_tol = 1e-8 * _state_scale(p)
    found, warnings = [], []
    segs = p.segments
    for k, seg in enumerate(segs):
        if isinstance(seg, Fan):
            found.append(DetectedWave(RAREFACTION, seg.x_lo, seg.x_hi, seg.left, seg.right, k))
            continue
        if k + 1 == len(segs):
            break
        nxt = segs[k + 1]
        if isinstance(nxt, Fan):
            left, right = seg.state, nxt.left
        else:
            left, right = seg.state, nxt.state
        jump = max(abs(right.u - left.u), abs(right.v - left.v))
        if 0.1 * jump_tol <= jump <= 10 * jump_tol:
            warnings.append(f"ambiguous jump {jump:.3e} at x={seg.x_hi!r} (tolerance {jump_tol:.3e})")
        if jump > jump_tol:
            found.append(DetectedWave(SHOCK, seg.x_hi, seg.x_hi, left, right, None))
    return DetectedWaves(tuple(found), tuple(warnings))


@dataclass(frozen=True)
class EquivalentShock:
    interval: tuple
    xi_u: float
    xi_v: float
    s_u: float
    s_v: float
    jumps: tuple
    # s_u * du and s_v * dv computed without dividing by the jumps
    flux_u: float = 0.0
    flux_v: float = 0.0
    degenerate_u: bool = False
    degenerate_v: bool = False


def _find_fan(p: ObservedProfile, fan) -> Fan:
    if isinstance(fan, Fan):
        return fan
    if isinstance(fan, DetectedWave):
        if fan.segment is not None:
            return p.segments[fan.segment]
        fan = fan.interval
    lo, hi = fan
    for s in p.segments:
        if isinstance(s, Fan) and s.x_lo == lo and s.x_hi == hi:
            return s
    raise InternalConsistencyError(f"no fan segment on [{lo}, {hi}]")


def _centroid(x, comp, T):
    """Returns (xi, increment, degenerate) with increment = xi * jump / T."""
    lo, hi = x[0], x[-1]
    jump = comp[-1] - comp[0]
    if jump == 0:
        return 0.5 * (lo + hi), 0.0, True
    moment = hi * jump - trapezoid(comp - comp[0], x)
    return moment / jump, moment / T, False


def equivalent_shock(p: ObservedProfile, fan) -> EquivalentShock:
    """Centroid positions of the fan from the profile alone.

    xi * du = x_hi du - int (u(x) - u_lo) dx, the integration-by-parts form
    of the centroid of the inverse profile.
    """
    seg = _find_fan(p, fan)
    T = p.T
    xi_u, inc_u, deg_u = _centroid(seg.x, seg.u, T)
    xi_v, inc_v, deg_v = _centroid(seg.x, seg.v, T)
    return EquivalentShock(
        interval=(seg.x_lo, seg.x_hi),
        xi_u=float(xi_u), xi_v=float(xi_v),
        s_u=float(xi_u / T), s_v=float(xi_v / T),
        jumps=(float(seg.u[-1] - seg.u[0]), float(seg.v[-1] - seg.v[0])),
        flux_u=float(inc_u), flux_v=float(inc_v),
        degenerate_u=deg_u, degenerate_v=deg_v,
    )


def discontinuities(p: ObservedProfile, waves: DetectedWaves):
    """Merged list of (speed_u, du, speed_v, dv, increment_u, increment_v)."""
    out = []
    prev_hi = -np.inf
    for w in waves.waves:
        if w.x_lo < prev_hi or w.x_hi < w.x_lo:
            raise InternalConsistencyError("detected waves overlap or are out of order")
        prev_hi = w.x_hi
        if w.kind == SHOCK:
            s = w.x_lo / p.T
            du, dv = w.right.u - w.left.u, w.right.v - w.left.v
            out.append((s, du, s, dv, s * du, s * dv))
        else:
            es = equivalent_shock(p, w)
            out.append((es.s_u, es.jumps[0], es.s_v, es.jumps[1], es.flux_u, es.flux_v))
    return out


def nodal_flux_increments(p: ObservedProfile, waves: DetectedWaves):
    """(f1 change, f2 change) across the whole profile: sum of speed times jump."""
    d1 = d2 = 0.0
    for _, _, _, _, i1, i2 in discontinuities(p, waves):
        d1 += i1
        d2 += i2
    return d1, d2
