"""Analytic decoy-state bounds and the asymptotic key rate.

All intensity-dependent constants (class weights, trace-distance penalties,
the decoy determinant) are gathered once per ``(N, mu_x, mu_y, mu_z)`` in
:func:`decoy_coefficients` and cached; the bound formulas themselves are
cheap arithmetic on the observed rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import ValidityError
from .params import DecoyBounds, ObservedRates, ProtocolParams
from .series import (
    DEFAULT_POLICY,
    SeriesPolicy,
    binary_entropy,
    check_ratio_condition,
    delta_upper,
    p_j,
    px_j,
    trace_distance_f11,
    trace_distance_lambda,
)


@dataclass(frozen=True)
class DecoyCoefficients:
    """Observation-independent constants of the bound formulas.

    ``td_*`` are trace distances ``sqrt(1 - F**2)``: ``td_vac_y`` between
    the class-0 state of ``mu_y`` and vacuum, ``td_signal`` between the
    class-1 states of ``mu_y`` and ``mu_z``, ``td_vac_pair`` between the
    matched class-0 pair and the vacuum pair, ``td_chi0``/``td_chi1`` between
    the class-1 X-window pair states and ``chi_0``/``chi_1``.
    """

    N: int
    p_x: tuple[float, ...]
    p_y: tuple[float, ...]
    td_xy: tuple[float, ...]
    p1_z: float
    px0: float
    px1: float
    td_vac_y: float
    td_signal: float
    td_vac_pair: float
    td_chi0: float
    td_chi1: float
    delta_U: float
    condition: bool

    @property
    def determinant(self) -> float:
        return self.p_x[1] * self.p_y[2] - self.p_y[1] * self.p_x[2]

    @property
    def vacuum_weight(self) -> float:
        return self.p_x[0] * self.p_y[2] - self.p_y[0] * self.p_x[2]


@lru_cache(maxsize=16384)
def _coefficients(
    N: int, mu_x: float, mu_y: float, mu_z: float, policy: SeriesPolicy
) -> DecoyCoefficients:
    p_x = tuple(p_j(mu_x, N, j, policy) for j in range(N))
    p_y = tuple(p_j(mu_y, N, j, policy) for j in range(N))
    td_xy = tuple(trace_distance_lambda(mu_x, mu_y, N, j, policy) for j in range(N))
    return DecoyCoefficients(
        N=N,
        p_x=p_x,
        p_y=p_y,
        td_xy=td_xy,
        p1_z=p_j(mu_z, N, 1, policy),
        px0=px_j(mu_x, N, 0, policy),
        px1=px_j(mu_x, N, 1, policy),
        td_vac_y=trace_distance_lambda(0.0, mu_y, N, 0, policy),
        td_signal=trace_distance_lambda(mu_y, mu_z, N, 1, policy),
        td_vac_pair=trace_distance_lambda(0.0, 2.0 * mu_x, N, 0, policy),
        td_chi0=trace_distance_f11(mu_x, mu_z, N, 0, "plus", policy),
        td_chi1=trace_distance_f11(mu_x, mu_z, N, N // 2, "minus", policy),
        delta_U=delta_upper(mu_x, mu_y, N, policy),
        condition=check_ratio_condition(mu_x, mu_y, N, policy),
    )


def decoy_coefficients(
    p: ProtocolParams, policy: SeriesPolicy = DEFAULT_POLICY
) -> DecoyCoefficients:
    return _coefficients(p.N, float(p.mu_x), float(p.mu_y), float(p.mu_z), policy)


def _valid_coefficients(p: ProtocolParams, policy: SeriesPolicy) -> DecoyCoefficients:
    c = decoy_coefficients(p, policy)
    if not c.condition:
        raise ValidityError(
            f"class-ratio condition fails for mu_x={p.mu_x}, mu_y={p.mu_y}, N={p.N}"
        )
    if not c.determinant > 0.0:
        raise ValidityError(
            f"decoy determinant P1(mu_x)P2(mu_y) - P1(mu_y)P2(mu_x) = {c.determinant} is not positive"
        )
    return c


def _single_photon_lower(
    S_vx: float, S_vy: float, S_vv: float, c: DecoyCoefficients
) -> float:
    numerator = (
        c.p_y[2] * S_vx
        - c.p_x[2] * S_vy
        - c.vacuum_weight * (S_vv + c.td_vac_y)
        - c.p_y[2] * c.delta_U
    )
    return min(1.0, max(0.0, numerator / c.determinant - c.td_signal))


def s01_lower(
    obs: ObservedRates, p: ProtocolParams, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """Lower bound on the yield of ``|0, lambda_1>`` (Bob sends the class-1 state)."""
    c = _valid_coefficients(p, policy)
    return _single_photon_lower(obs.S_ox, obs.S_oy, obs.S_oo, c)


def s10_lower(
    obs: ObservedRates, p: ProtocolParams, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """Lower bound on the yield of ``|lambda_1, 0>`` (Alice sends)."""
    c = _valid_coefficients(p, policy)
    return _single_photon_lower(obs.S_xo, obs.S_yo, obs.S_oo, c)


def _wrong_click_upper(
    T_x: float, T_vac: float, td_pair_state: float, c: DecoyCoefficients
) -> float:
    value = (T_x - c.px0 * (T_vac - c.td_vac_pair)) / c.px1 + td_pair_state
    return min(1.0, max(0.0, value))


def t0r_upper(
    obs: ObservedRates, p: ProtocolParams, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """Upper bound on the right-click probability of ``chi_0``."""
    c = decoy_coefficients(p, policy)
    return _wrong_click_upper(obs.T_plus_R, obs.T_00, c.td_chi0, c)


def t1l_upper(
    obs: ObservedRates, p: ProtocolParams, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """Upper bound on the left-click probability of ``chi_1``."""
    c = decoy_coefficients(p, policy)
    return _wrong_click_upper(obs.T_minus_L, obs.T_00p, c.td_chi1, c)


def ephase_upper(s01_L: float, s10_L: float, t0r_U: float, t1l_U: float) -> float:
    """Phase-flip error rate bound, saturating at 1/2 when no key is possible."""
    denominator = s01_L + s10_L
    if not denominator > 0.0:
        return 0.5
    return min(0.5, (t0r_U + t1l_U) / denominator)


def decoy_bounds(
    obs: ObservedRates, p: ProtocolParams, policy: SeriesPolicy = DEFAULT_POLICY
) -> DecoyBounds:
    """Every bound needed for the key rate; raises :class:`ValidityError` if invalid."""
    s01 = s01_lower(obs, p, policy)
    s10 = s10_lower(obs, p, policy)
    t0r = t0r_upper(obs, p, policy)
    t1l = t1l_upper(obs, p, policy)
    return DecoyBounds(s01, s10, t0r, t1l, ephase_upper(s01, s10, t0r, t1l))


def raw_key_rate(
    p: ProtocolParams,
    obs: ObservedRates,
    bounds: DecoyBounds,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> float:
    """Key rate before clipping at zero; negative values mean no key."""
    eps = p.epsilon
    privacy = 2.0 * eps * (1.0 - eps) * p_j(p.mu_z, p.N, 1, policy) * bounds.s1_L
    privacy *= 1.0 - binary_entropy(bounds.eph_U)
    return privacy - obs.S_z * p.f * binary_entropy(obs.E_z)


def key_rate(
    p: ProtocolParams,
    obs: ObservedRates,
    bounds: DecoyBounds,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> float:
    """Secure bits per signal-window pulse pair."""
    return max(0.0, raw_key_rate(p, obs, bounds, policy))
