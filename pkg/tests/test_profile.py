import json
import math

import numpy as np
import pytest

from fluxrecon.errors import InternalConsistencyError, ProfileParseError
from fluxrecon.profile import (Constant, Fan, ObservedProfile, detect_waves, discontinuities,
                               equivalent_shock, nodal_flux_increments, observe)
from fluxrecon.riemann import RAREFACTION, SHOCK, State, solve_riemann


def linear_fan_profile():
    # u rises linearly from 0 to 1 on [0, 1]
    x = np.linspace(0.0, 1.0, 11)
    return ObservedProfile(1.0, (Constant(-1.0, 0.0, State(0.0, 0.0)), Fan(x, x.copy(), np.zeros(11)),
                                 Constant(1.0, 2.0, State(1.0, 0.0))))


def test_centroid_of_linear_ramp():
    es = equivalent_shock(linear_fan_profile(), (0.0, 1.0))
    assert es.xi_u == pytest.approx(0.5, abs=1e-15)
    assert es.degenerate_v and not es.degenerate_u
    assert es.flux_v == 0.0


def test_centroid_of_step_profile():
    # a steep ramp concentrated near x = 0.3 has its centroid there
    x = np.linspace(0.0, 1.0, 2001)
    u = np.clip((x - 0.299) / 0.002, 0, 1)
    p = ObservedProfile(2.0, (Constant(-1, 0, State(0, 0)), Fan(x, u, np.zeros_like(x)),
                              Constant(1, 2, State(1, 0))))
    es = equivalent_shock(p, p.fans[0])
    assert es.xi_u == pytest.approx(0.3, abs=1e-9)
    assert es.s_u == pytest.approx(0.15, abs=1e-9)


def test_fan_identities_exp(exp_fp):
    sol = solve_riemann(exp_fp, (0.0, 0.0), (0.3, 0.3))
    p = observe(sol, 1.0, samples_per_fan=2048)
    es = equivalent_shock(p, p.fans[0])
    L, R = sol.wave(2).left, sol.wave(2).right
    # s_u du = f1(v_R) - f1(v_L) and s_v dv = f2(u_R) - f2(u_L)
    assert es.flux_u == pytest.approx(math.exp(R.v) - math.exp(L.v), abs=1e-6)
    assert es.flux_v == pytest.approx(math.exp(R.u) - math.exp(L.u), abs=1e-6)


def test_observe_structure(exp_fp):
    sol = solve_riemann(exp_fp, (0.3, 0.3), (0.2, 0.35))
    p = observe(sol, 2.0)
    p.validate()
    kinds = [type(s).__name__ for s in p.segments]
    assert kinds == ["Constant", "Fan", "Constant", "Constant"]
    assert p.segments[0].state == sol.left and p.segments[-1].state == sol.right
    dw = detect_waves(p)
    assert [w.kind for w in dw.waves] == [RAREFACTION, SHOCK]
    assert dw.M1 == 1 and dw.M2 == 1 and dw.M == 2
    assert dw.shock_positions[0] == pytest.approx(2.0 * sol.wave(2).shock_speed)


def test_increments_match_truth(exp_fp):
    L, R = State(0.3, 0.3), State(0.2, 0.35)
    sol = solve_riemann(exp_fp, L, R)
    p = observe(sol, 1.0)
    d1, d2 = nodal_flux_increments(p, detect_waves(p))
    assert d1 == pytest.approx(math.exp(R.v) - math.exp(L.v), abs=1e-8)
    assert d2 == pytest.approx(math.exp(R.u) - math.exp(L.u), abs=1e-8)


def test_no_waves():
    p = ObservedProfile(1.0, (Constant(-1, 1, State(0.2, 0.2)),))
    assert detect_waves(p).M == 0


def test_near_threshold_warning():
    p = ObservedProfile(1.0, (Constant(-1, 0, State(0, 0)), Constant(0, 1, State(2e-8, 0))))
    dw = detect_waves(p, jump_tol=1e-8)
    assert dw.M == 1 and dw.warnings


def test_validate_rejects_gap():
    with pytest.raises(ProfileParseError):
        ObservedProfile(1.0, (Constant(-1, 0, State(0, 0)), Constant(0.1, 1, State(1, 0)))).validate()


def test_validate_rejects_non_monotone_fan():
    x = np.linspace(0, 1, 5)
    p = ObservedProfile(1.0, (Constant(-1, 0, State(0, 0)), Fan(x, np.array([0, .5, .3, .8, 1.0]), np.zeros(5)),
                              Constant(1, 2, State(1, 0))))
    with pytest.raises(ProfileParseError):
        p.validate()


def test_fan_arrays_are_read_only():
    f = linear_fan_profile().fans[0]
    with pytest.raises(ValueError):
        f.u[0] = 3.0


def test_json_round_trip_bitwise(exp_fp):
    p = observe(solve_riemann(exp_fp, (0.0, 0.0), (0.3, 0.3)), 1.0)
    back = ObservedProfile.from_json(json.loads(json.dumps(p.to_json())))
    assert back == p


def test_from_json_malformed():
    with pytest.raises(ProfileParseError):
        ObservedProfile.from_json({"T": 1.0})
    with pytest.raises(ProfileParseError):
        ObservedProfile.from_json({"T": 1.0, "segments": [{"kind": "wedge"}]})


def test_csv_columns():
    text = linear_fan_profile().to_csv().splitlines()
    assert text[0] == "x,u,v,segment_kind,segment_id"
    assert len(text) == 1 + 2 + 11 + 2


def test_unknown_fan_interval():
    with pytest.raises(InternalConsistencyError):
        equivalent_shock(linear_fan_profile(), (0.0, 0.5))


def test_overlap_detected():
    from fluxrecon.profile import DetectedWave, DetectedWaves
    p = linear_fan_profile()
    bad = DetectedWaves((DetectedWave(SHOCK, 0.5, 0.5, State(0, 0), State(1, 0)),
                         DetectedWave(SHOCK, 0.2, 0.2, State(1, 0), State(0, 0))))
    with pytest.raises(InternalConsistencyError):
        discontinuities(p, bad)


def test_quadrature_refinement(exp_fp):
    sol = solve_riemann(exp_fp, (0.0, 0.0), (0.3, 0.3))
    xs = []
    for n in (64, 128, 256, 4096):
        p = observe(sol, 1.0, samples_per_fan=n)
        xs.append(equivalent_shock(p, p.fans[0]).xi_u)
    e = [abs(x - xs[-1]) for x in xs[:3]]
    assert e[1] <= e[0] / 3.5 and e[2] <= e[1] / 3.5
