"""Linear-programming lower bound on the untagged yield.

A verification path for the closed-form bound in :mod:`snsqkd.bounds`.
Variables are the class yields ``Y_vj`` (Bob sends class ``j``, Alice
vacuum) and ``Y_jv`` for both decoy intensities, plus ``s01`` and ``s10``;
consecutive intensities are tied together by trace-distance slack.

The problem is handed to HiGHS through :func:`scipy.optimize.linprog`.
Yields are rescaled by the largest observed rate so the solver works with
order-one numbers even at long distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .bounds import decoy_coefficients
from .errors import NumericError, ValidityError
from .params import ObservedRates, ProtocolParams
from .series import DEFAULT_POLICY, SeriesPolicy

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class LPBudget:
    """Solver effort; ``method`` is any HiGHS variant accepted by ``linprog``."""

    method: str = "highs-ds"
    time_limit: float = 60.0


@dataclass(frozen=True)
class LPProblem:
    """Dense standard form ``min c.x`` s.t. ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``bounds``."""

    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    bounds: list[tuple[float, float]]
    scale: float


@dataclass(frozen=True)
class LPSolution:
    s1: float
    s01: float
    s10: float
    x: np.ndarray
    problem: LPProblem
    eq_marginals: np.ndarray
    ub_marginals: np.ndarray
    lower_marginals: np.ndarray
    upper_marginals: np.ndarray


def build_problem(
    obs: ObservedRates, p: ProtocolParams, policy: SeriesPolicy = DEFAULT_POLICY
) -> LPProblem:
    """Assemble the LP with variables ``[Y_v.^x, Y_v.^y, Y_.v^x, Y_.v^y, s01, s10]``."""
    c = decoy_coefficients(p, policy)
    N = p.N
    n_var = 4 * N + 2
    vx, vy, xv, yv = (np.arange(N) + k * N for k in range(4))
    i01, i10 = 4 * N, 4 * N + 1

    scale = max(obs.S_ox, obs.S_oy, obs.S_xo, obs.S_yo, obs.S_oo)
    if not scale > 0.0:
        scale = 1.0

    A_eq = np.zeros((4, n_var))
    A_eq[0, vx] = c.p_x
    A_eq[1, vy] = c.p_y
    A_eq[2, xv] = c.p_x
    A_eq[3, yv] = c.p_y
    b_eq = np.array([obs.S_ox, obs.S_oy, obs.S_xo, obs.S_yo]) / scale

    rows: list[np.ndarray] = []
    rhs: list[float] = []

    def two_sided(a: int, b: int | None, centre: float, width: float) -> None:
        # |x_a - x_b - centre| <= width, with x_b absent when b is None
        row = np.zeros(n_var)
        row[a] = 1.0
        if b is not None:
            row[b] = -1.0
        rows.extend([row, -row])
        rhs.extend([(centre + width) / scale, (width - centre) / scale])

    two_sided(vy[0], None, obs.S_oo, c.td_vac_y)
    two_sided(yv[0], None, obs.S_oo, c.td_vac_y)
    for j in range(N):
        two_sided(vx[j], vy[j], 0.0, c.td_xy[j])
        two_sided(xv[j], yv[j], 0.0, c.td_xy[j])
    two_sided(i01, vy[1], 0.0, c.td_signal)
    two_sided(i10, yv[1], 0.0, c.td_signal)

    cost = np.zeros(n_var)
    cost[[i01, i10]] = 0.5
    return LPProblem(
        c=cost,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=[(0.0, 1.0 / scale)] * n_var,
        scale=scale,
    )


def solve_lp(
    obs: ObservedRates,
    p: ProtocolParams,
    policy: SeriesPolicy = DEFAULT_POLICY,
    budget: LPBudget = LPBudget(),
) -> LPSolution:
    """Solve the yield LP; raises :class:`ValidityError` if it is infeasible."""
    prob = build_problem(obs, p, policy)
    res = linprog(
        prob.c,
        A_ub=prob.A_ub,
        b_ub=prob.b_ub,
        A_eq=prob.A_eq,
        b_eq=prob.b_eq,
        bounds=prob.bounds,
        method=budget.method,
        options={**_HIGHS_OPTIONS, "time_limit": budget.time_limit},
    )
    if res.status == 2:
        raise ValidityError("yield LP is infeasible: observations are inconsistent with the source model")
    if res.status != 0:
        raise NumericError(f"yield LP solver failed: {res.message}")
    x = res.x
    n = len(x)
    return LPSolution(
        s1=float(res.fun) * prob.scale,
        s01=float(x[n - 2]) * prob.scale,
        s10=float(x[n - 1]) * prob.scale,
        x=x,
        problem=prob,
        eq_marginals=np.asarray(res.eqlin.marginals),
        ub_marginals=np.asarray(res.ineqlin.marginals),
        lower_marginals=np.asarray(res.lower.marginals),
        upper_marginals=np.asarray(res.upper.marginals),
    )


def lp_s1_lower(
    obs: ObservedRates,
    p: ProtocolParams,
    policy: SeriesPolicy = DEFAULT_POLICY,
    budget: LPBudget = LPBudget(),
) -> float:
    """Minimum of ``(s01 + s10)/2`` over every yield assignment consistent with ``obs``."""
    return solve_lp(obs, p, policy, budget).s1
