import math

import numpy as np
import pytest

import oracles
from fluxrecon.errors import (CompositeWaveError, DomainExitError, HyperbolicityError,
                              InadmissibleBranchError)
from fluxrecon.flux import FluxPair
from fluxrecon.catalog import linear_flux
from fluxrecon.riemann import (RAREFACTION, SHOCK, State, classify_region, eigenvalues, fan_states,
                               middle_states, rarefaction_branch, rh_residuals, sample_at_time,
                               shock_branch, solve_riemann)


def test_eigenvalues_exp(exp_fp):
    l1, l2 = eigenvalues(exp_fp, State(0.2, 0.4))
    assert l1 == pytest.approx(-math.exp(0.3))
    assert l2 == pytest.approx(math.exp(0.3))


def test_loss_of_hyperbolicity():
    fp = FluxPair(linear_flux(slope=-1.0), linear_flux())
    with pytest.raises(HyperbolicityError) as exc:
        eigenvalues(fp, State(0.0, 0.0))
    assert exc.value.state == State(0.0, 0.0)


def test_linear_contacts(lin_fp):
    sol = solve_riemann(lin_fp, (0.0, 0.0), (0.2, 0.0))
    assert sol.middle == pytest.approx((0.1, -0.1), abs=1e-12)
    assert [w.kind for w in sol.waves] == [SHOCK, SHOCK]
    assert all(w.contact for w in sol.waves)
    assert [w.shock_speed for w in sol.waves] == pytest.approx([-1.0, 1.0], abs=1e-12)


def test_trivial_problem(exp_fp):
    sol = solve_riemann(exp_fp, (0.3, 0.3), (0.3, 0.3))
    assert sol.waves == () and sol.middle == State(0.3, 0.3)


def test_shock_example_against_scan(exp_fp):
    to, s = shock_branch(exp_fp, State(0.0, 0.0), 2, -0.2)
    v_ref, s_ref = oracles.shock_locus_scan(to.u)
    assert to.v == pytest.approx(-0.2, abs=1e-14)
    assert to.v == pytest.approx(v_ref, abs=1e-10)
    assert s == pytest.approx(s_ref, abs=1e-10)
    # Lax: lambda2(right) < s < lambda2(left)
    assert oracles.lam2(*to) < s < oracles.lam2(0.0, 0.0)


def test_shock_residuals(exp_fp):
    sol = solve_riemann(exp_fp, (0.5, 0.5), (0.3, 0.3))
    for w in sol.waves:
        if w.kind == SHOCK:
            assert max(map(abs, rh_residuals(exp_fp, w))) <= 1e-12


def test_wrong_shock_branch(exp_fp):
    with pytest.raises(InadmissibleBranchError):
        shock_branch(exp_fp, State(0.0, 0.0), 2, 0.2)


def test_rarefaction_example_reversed_orientation(exp_fp):
    # with v dropping by 0.2, lambda2 falls along the curve, so the fan is
    # inadmissible with left-to-right order and only the bare curve exists
    with pytest.raises(InadmissibleBranchError):
        rarefaction_branch(exp_fp, State(0.0, 0.0), 2, -0.2)
    to, fan = rarefaction_branch(exp_fp, State(0.0, 0.0), 2, -0.2, admissible=False)
    exact_u = 2 * math.log(math.exp(-0.1))
    assert to.v == pytest.approx(-0.2, abs=1e-14)
    assert to.u == pytest.approx(exact_u, abs=1e-10)
    for xi, st in fan:
        assert xi == pytest.approx(oracles.lam2(*st), abs=1e-12)
        assert math.exp(st.u / 2) - math.exp(st.v / 2) == pytest.approx(0.0, abs=1e-10)


def test_rarefaction_admissible_fan(exp_fp):
    to, fan = rarefaction_branch(exp_fp, State(0.0, 0.0), 2, 0.2)
    xs = np.array([xi for xi, _ in fan])
    assert np.all(np.diff(xs) > 0)
    assert fan[0][1] == State(0.0, 0.0) and fan[-1][1] == to
    assert to.u == pytest.approx(0.2, abs=1e-10)


def test_family1_invariant(exp_fp):
    # away from the diagonal u = v, so lambda1 grows as u increases
    to, fan = rarefaction_branch(exp_fp, State(0.6, 0.2), 1, 0.3)
    c = math.exp(0.3) + math.exp(0.1)
    for _, st in fan:
        assert math.exp(st.u / 2) + math.exp(st.v / 2) == pytest.approx(c, abs=1e-10)


def test_rarefaction_leaves_domain(exp_fp):
    with pytest.raises(DomainExitError):
        rarefaction_branch(exp_fp, State(1.8, 1.8), 2, 0.5)


def test_state_outside_rect(exp_fp):
    with pytest.raises(DomainExitError):
        solve_riemann(exp_fp, (5.0, 0.0), (0.0, 0.0))


@pytest.mark.parametrize("L,R", [((0.5, 0.5), (0.3, 0.3)), ((0.3, 0.3), (0.2, 0.35)),
                                 ((0.0, 0.0), (0.1, 0.1)), ((0.4, 0.1), (0.3, 0.2))])
def test_middle_state_matches_oracle(exp_fp, L, R):
    sol = solve_riemann(exp_fp, L, R)
    ref = oracles.middle_state(L, R)
    assert sol.middle == pytest.approx(ref, abs=1e-8)


def test_vectorized_middle_states(exp_fp):
    uL = np.array([0.3, 0.5, 0.4])
    vL = np.array([0.3, 0.5, 0.1])
    uR = np.array([0.2, 0.3, 0.3])
    vR = np.array([0.35, 0.3, 0.2])
    um, vm = middle_states(exp_fp, uL, vL, uR, vR, n_ode=64)
    for k in range(3):
        sol = solve_riemann(exp_fp, (uL[k], vL[k]), (uR[k], vR[k]))
        assert (um[k], vm[k]) == pytest.approx(sol.middle, abs=1e-9)


def test_region_tags(exp_fp):
    # diagonal increase: single 2-rarefaction, missing 1-wave counts as R
    assert classify_region(exp_fp, (0.0, 0.0), (0.1, 0.1)) == "III"
    assert classify_region(exp_fp, (0.1, 0.1), (0.0, 0.0)) in ("I", "IV")


def test_sample_at_time(exp_fp):
    sol = solve_riemann(exp_fp, (0.0, 0.0), (0.2, 0.2))
    w = sol.wave(2)
    assert w.kind == RAREFACTION
    lo, hi = w.xi_span
    assert sample_at_time(sol, 1.0, lo - 1e-3) == sol.middle
    assert sample_at_time(sol, 1.0, hi + 1e-3) == sol.right
    xi = np.linspace(lo, hi, 9)[1:-1]
    u, v = sample_at_time(sol, 2.0, 2 * xi)
    assert np.allclose(oracles.lam2(u, v), xi, atol=1e-10)
    assert sample_at_time(sol, 1.0, -5.0) == sol.left


def test_fan_states_clamp(exp_fp):
    sol = solve_riemann(exp_fp, (0.0, 0.0), (0.2, 0.2))
    w = sol.wave(2)
    u, v = fan_states(exp_fp, w, [w.xi_span[0] - 1, w.xi_span[1] + 1])
    assert (u[0], v[0]) == tuple(w.left) and (u[1], v[1]) == tuple(w.right)


def test_solution_json(exp_fp):
    sol = solve_riemann(exp_fp, (0.0, 0.0), (0.2, 0.2))
    obj = sol.to_json()
    assert obj["waves"][0]["kind"] == RAREFACTION
    assert obj["waves"][0]["fan"][0][1:] == [0.0, 0.0]


def test_composite_detected(exp_fp):
    with pytest.raises(CompositeWaveError):
        solve_riemann(exp_fp, (0.1, 0.2), (0.25, 0.1))


def test_linear_integral_curve(lin_fp):
    to, fan = rarefaction_branch(lin_fp, State(0.0, 0.0), 2, -0.3)
    assert to == pytest.approx((-0.3, -0.3), abs=1e-14)
    assert all(xi == pytest.approx(1.0) for xi, _ in fan)


def test_richardson_cross_check(exp_fp):
    a, _ = rarefaction_branch(exp_fp, State(0.0, 0.0), 2, -0.2, n_ode=256, admissible=False)
    b, _ = rarefaction_branch(exp_fp, State(0.0, 0.0), 2, -0.2, n_ode=512, admissible=False)
    assert a == pytest.approx(b, abs=1e-8)
