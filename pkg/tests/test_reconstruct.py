import json

import numpy as np
import pytest

from fluxrecon.catalog import DEFAULT_RECT
from fluxrecon.errors import (ConfigError, DegenerateObservationError, DomainMismatchError,
                              ObservationInconsistencyError, StepFailure)
from fluxrecon.profile import Constant, ObservedProfile, detect_waves
from fluxrecon.reconstruct import (ForwardObserver, GridSpec, case_formula, reconstruct_all,
                                   reconstruct_step, reference_shift_check)
from fluxrecon.riemann import State


def truth_nodes(fp, grid):
    return fp.f1.value(grid.v_nodes), fp.f2.value(grid.u_nodes)


def test_grid_geometry():
    g = GridSpec(0.0, 1.0, -1.0, 1.0, 3)
    assert g.n == 8 and g.delta == 0.125 and g.eta == 0.25
    assert g.node(8) == State(1.0, 1.0)


@pytest.mark.parametrize("args,field", [((1.0, 0.0, 0.0, 1.0, 2), "rect.u"), ((0.0, 1.0, 1.0, 1.0, 2), "rect.v"),
                                        ((0.0, 1.0, 0.0, 1.0, -1), "m"), ((0.0, 1.0, 0.0, 1.0, 1.5), "m")])
def test_grid_invalid(args, field):
    with pytest.raises(ConfigError) as exc:
        GridSpec(*args)
    assert exc.value.field == field


def test_linear_pair_exact(lin_fp):
    grid = GridSpec(0.0, 1.0, 0.0, 1.0, 3)
    rep = reconstruct_all(lin_fp, grid, anchors=(0.0, 0.0))
    t1, t2 = truth_nodes(lin_fp, grid)
    assert np.max(np.abs(rep.nodal_f1 - t1)) < 1e-12
    assert np.max(np.abs(rep.nodal_f2 - t2)) < 1e-12
    # equal jumps in u and v excite only the 2-contact
    assert {s.case_tag for s in rep.steps} == {"General"}


def test_exp_diagonal_grid(exp_fp):
    grid = GridSpec.from_rect(DEFAULT_RECT["exp-pair"], 3)
    rep = reconstruct_all(exp_fp, grid, anchors=(1.0, 1.0))
    t1, t2 = truth_nodes(exp_fp, grid)
    assert np.max(np.abs(rep.nodal_f1 - t1)) < 1e-7
    assert np.max(np.abs(rep.nodal_f2 - t2)) < 1e-7
    # the diagonal is a single 2-rarefaction
    assert {s.case_tag for s in rep.steps} == {"General"}
    assert rep.steps[0].intermediate is None


def test_exp_two_wave_cases(exp_fp):
    grid = GridSpec(0.5, 1.0, 0.0, 1.0, 3)
    rep = reconstruct_all(exp_fp, grid, anchors=(1.0, np.exp(0.5)))
    t1, t2 = truth_nodes(exp_fp, grid)
    assert np.max(np.abs(rep.nodal_f1 - t1)) < 1e-7
    assert np.max(np.abs(rep.nodal_f2 - t2)) < 1e-7
    for k, s in enumerate(rep.steps):
        assert s.case_tag in ("SS", "SR", "RS", "RR")
        f = case_formula(s, grid.node(k), grid.node(k + 1), (rep.nodal_f1[k], rep.nodal_f2[k]))
        assert f == pytest.approx((rep.nodal_f1[k + 1], rep.nodal_f2[k + 1]), abs=1e-12)


def test_sr_speed_keys(exp_fp):
    grid = GridSpec(0.5, 1.0, 0.0, 1.0, 2)
    rep = reconstruct_all(exp_fp, grid)
    s = rep.steps[0]
    assert s.case_tag == "SR"
    assert set(s.speeds) == {"s1", "s_u", "s_v"}


def test_unknown_anchors_shift(exp_fp):
    grid = GridSpec(0.0, 1.0, 0.0, 1.0, 3)
    rep = reconstruct_all(exp_fp, grid)
    assert rep.anchor_mode == "Unknown" and rep.nodal_f1[0] == 0.0
    c1, c2, sp1, sp2 = reference_shift_check(rep, (exp_fp.f1, exp_fp.f2))
    assert c1 == pytest.approx(1.0, abs=1e-7) and c2 == pytest.approx(1.0, abs=1e-7)
    assert sp1 < 1e-7 and sp2 < 1e-7


def test_rect_must_contain_grid(exp_fp):
    with pytest.raises(DomainMismatchError):
        reconstruct_all(exp_fp, GridSpec(-1.0, 0.5, 0.0, 1.0, 2))


class FixedSource:
    def __init__(self, profile):
        self.profile = profile

    def observe_step(self, h, left, right):
        return self.profile


def test_wrong_far_field_wraps_step():
    p = ObservedProfile(1.0, (Constant(-1, 1, State(5.0, 5.0)),))
    with pytest.raises(StepFailure) as exc:
        reconstruct_all(FixedSource(p), GridSpec(0, 1, 0, 1, 1))
    assert exc.value.step == 0
    assert isinstance(exc.value.cause, ObservationInconsistencyError)


def test_degenerate_observation():
    p = ObservedProfile(1.0, (Constant(-1, 0, State(0.0, 0.0)), Constant(0, 1, State(1e-12, 0.0))))
    with pytest.raises(DegenerateObservationError):
        reconstruct_step(p, detect_waves(p, jump_tol=1e-6), State(0.0, 0.0), State(1e-12, 0.0), (0.0, 0.0))


def test_report_json_and_csv(exp_fp):
    rep = reconstruct_all(exp_fp, GridSpec(0.5, 1.0, 0.0, 1.0, 2))
    obj = json.loads(json.dumps(rep.to_json()))
    assert len(obj["steps"]) == 4 and obj["grid"]["m"] == 2
    lines = rep.nodal_csv().splitlines()
    assert lines[0] == "alpha,u,v,f1,f2" and len(lines) == 6


def test_observer_custom_time(exp_fp):
    grid = GridSpec(0.5, 1.0, 0.0, 1.0, 2)
    a = reconstruct_all(ForwardObserver(exp_fp, T=0.5), grid, T=0.5)
    b = reconstruct_all(exp_fp, grid, T=2.0)
    assert np.allclose(a.nodal_f1, b.nodal_f1, atol=1e-8)
