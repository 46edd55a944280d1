from dataclasses import replace

import numpy as np
import pytest

from snsqkd.bounds import decoy_bounds, decoy_coefficients
from snsqkd.channel import ChannelParams, simulate_observables
from snsqkd.errors import ValidityError
from snsqkd.fock import class_yields, oracle_observables, oracle_untagged_truth
from snsqkd.lp import LPBudget, build_problem, lp_s1_lower, solve_lp
from snsqkd.params import ObservedRates, ProtocolParams

P4 = ProtocolParams(4, 0.001, 0.002, 0.1, 0.05)


def _truth_assignment(p, ch):
    """Exact class yields from the oracle, in LP variable order and unscaled."""
    vx, xv = class_yields(p.mu_x, p.N, ch)
    vy, yv = class_yields(p.mu_y, p.N, ch)
    truth = oracle_untagged_truth(p, ch)
    return np.array(vx + vy + xv + yv + [truth.s01, truth.s10]), truth


@pytest.mark.parametrize("N, L", [(4, 50.0), (6, 100.0), (8, 200.0)])
def test_true_yields_are_feasible(N, L):
    p = ProtocolParams(N, 0.01, 0.05, 0.2, 0.05)
    ch = ChannelParams(L_km=L)
    obs = oracle_observables(p, ch)
    prob = build_problem(obs, p)
    x, truth = _truth_assignment(p, ch)
    x = x / prob.scale
    assert np.all(prob.A_ub @ x <= prob.b_ub + 1e-9)
    assert np.allclose(prob.A_eq @ x, prob.b_eq, rtol=1e-9, atol=1e-12)
    assert lp_s1_lower(obs, p) <= truth.s1


def test_zero_observations():
    c = decoy_coefficients(P4)
    value = lp_s1_lower(ObservedRates(*([0.0] * 11)), P4)
    assert 0.0 <= value <= c.td_signal + 1e-12


def test_inconsistent_observations_are_infeasible():
    obs = replace(ObservedRates(*([0.0] * 11)), S_ox=1.0)
    with pytest.raises(ValidityError):
        lp_s1_lower(obs, P4)


@pytest.mark.parametrize("N", [4, 6, 8, 12])
@pytest.mark.parametrize("L", [0.0, 100.0, 250.0])
def test_analytic_bound_never_beats_lp(N, L):
    p = ProtocolParams(N, 0.001, 0.002, 0.1, 0.05)
    obs = simulate_observables(p, ChannelParams(L_km=L))
    b = decoy_bounds(obs, p)
    assert b.s1_L <= lp_s1_lower(obs, p) + 1e-9


def test_solver_variants_agree():
    obs = oracle_observables(P4, ChannelParams(L_km=100))
    a = lp_s1_lower(obs, P4, budget=LPBudget("highs-ds"))
    b = lp_s1_lower(obs, P4, budget=LPBudget("highs-ipm"))
    assert a == pytest.approx(b, rel=1e-8)


def test_optimum_is_certified_by_its_dual():
    # strong duality with sign-feasible multipliers proves optimality
    obs = oracle_observables(P4, ChannelParams(L_km=100))
    sol = solve_lp(obs, P4)
    prob = sol.problem
    lo = np.array([b[0] for b in prob.bounds])
    hi = np.array([b[1] for b in prob.bounds])
    assert np.all(prob.A_ub @ sol.x <= prob.b_ub + 1e-9)
    assert np.allclose(prob.A_eq @ sol.x, prob.b_eq, atol=1e-12)
    assert np.all(sol.x >= lo - 1e-12) and np.all(sol.x <= hi + 1e-12)
    assert np.all(sol.ub_marginals <= 1e-12)
    assert np.all(sol.lower_marginals >= -1e-12)
    assert np.all(sol.upper_marginals <= 1e-12)
    reduced = (
        prob.c
        - prob.A_eq.T @ sol.eq_marginals
        - prob.A_ub.T @ sol.ub_marginals
        - sol.lower_marginals
        - sol.upper_marginals
    )
    assert np.allclose(reduced, 0.0, atol=1e-9)
    dual = (
        prob.b_eq @ sol.eq_marginals
        + prob.b_ub @ sol.ub_marginals
        + lo @ sol.lower_marginals
        + hi @ sol.upper_marginals
    )
    assert dual == pytest.approx(prob.c @ sol.x, rel=1e-8, abs=1e-12)
