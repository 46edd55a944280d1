"""Truncated Fock-space model of Charlie's measurement.

This is the slow, exact path used to certify the analytic bounds.  Two-mode
pure states are stored as amplitude matrices ``psi[n_A, n_B]``.  Detection
applies photon-number loss Kraus operators to each arm, the balanced
beamsplitter sector by sector (it conserves total photon number), a
misalignment channel, and finally threshold detectors with dark counts.

The beamsplitter maps ``a -> (c_L + c_R)/sqrt(2)`` and
``b -> (c_L - c_R)/sqrt(2)``, so in-phase pulses exit at the left port.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .channel import ChannelParams, ClickOutcome, arm_transmittance, z_window_rates
from .errors import DomainError, TruncationError
from .params import ObservedRates, ProtocolParams
from .series import DEFAULT_POLICY, SeriesPolicy, log_p_j

TAIL_TOL = 1e-10
DEFAULT_N_MAX = 30

Misalignment = Literal["photon", "swap"]


@dataclass(frozen=True)
class FockState2:
    """Normalised two-mode pure state truncated at ``n_max`` photons per mode.

    ``tail`` is the norm that the truncation discarded.
    """

    amplitudes: np.ndarray
    tail: float = 0.0

    def __post_init__(self) -> None:
        a = self.amplitudes
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"amplitudes must be a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("amplitudes must be finite")
        if abs(self.norm - 1.0) > TAIL_TOL:
            raise DomainError(f"state norm {self.norm} differs from 1 by more than {TAIL_TOL}")
        if self.tail > TAIL_TOL:
            raise TruncationError(f"truncated tail weight {self.tail:.3e} exceeds {TAIL_TOL}")

    @property
    def n_max(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def photon_distribution(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _coherent_mode(mu: float, phase: float, n_max: int) -> tuple[np.ndarray, float]:
    if mu == 0.0:
        amp = np.zeros(n_max + 1, dtype=complex)
        amp[0] = 1.0
        return amp, 0.0
    n = np.arange(n_max + 1)
    weights = np.exp(-mu + n * math.log(mu) - np.array([math.lgamma(k + 1) for k in n]))
    tail = max(0.0, 1.0 - math.fsum(weights))
    amp = np.sqrt(weights) * np.exp(1j * phase * n)
    return amp / np.linalg.norm(amp), tail


def coherent_pair(
    mu_a: float, mu_b: float, theta: float = 0.0, n_max: int = DEFAULT_N_MAX
) -> FockState2:
    """``|sqrt(mu_a) e^{i theta}> (x) |sqrt(mu_b)>``."""
    if mu_a < 0 or mu_b < 0:
        raise DomainError("intensities must be non-negative")
    a, ta = _coherent_mode(mu_a, theta, n_max)
    b, tb = _coherent_mode(mu_b, 0.0, n_max)
    return FockState2(np.outer(a, b), tail=ta + tb)


def class_mode(
    mu: float, N: int, j: int, n_max: int = DEFAULT_N_MAX, policy: SeriesPolicy = DEFAULT_POLICY
) -> tuple[np.ndarray, float]:
    """Normalised single-mode class state ``|lambda_j>`` and its truncation tail."""
    if mu <= 0:
        raise DomainError(f"class states need mu > 0, got {mu}")
    n = np.arange(j, n_max + 1, N)
    log_w = n * math.log(mu) - np.array([math.lgamma(k + 1) for k in n]) - mu
    kept = math.fsum(np.exp(log_w - log_p_j(mu, N, j, policy)))
    amp = np.zeros(n_max + 1, dtype=complex)
    amp[n] = np.exp(0.5 * log_w)
    return amp / np.linalg.norm(amp), max(0.0, 1.0 - kept)


def single_sender_states(
    mu: float, N: int, n_max: int = DEFAULT_N_MAX, policy: SeriesPolicy = DEFAULT_POLICY
) -> dict[str, FockState2]:
    """``|0, lambda_1>``, ``|lambda_1, 0>`` and their symmetric/antisymmetric sums ``chi_0``, ``chi_1``."""
    lam, tail = class_mode(mu, N, 1, n_max, policy)
    vac = np.zeros(n_max + 1)
    vac[0] = 1.0
    zero_lam = np.outer(vac, lam)
    lam_zero = np.outer(lam, vac)
    return {
        "0l": FockState2(zero_lam, tail),
        "l0": FockState2(lam_zero, tail),
        "chi0": FockState2((zero_lam + lam_zero) / math.sqrt(2.0), tail),
        "chi1": FockState2((zero_lam - lam_zero) / math.sqrt(2.0), tail),
    }


def _poly_coefficients(k: int, n: int) -> list[int]:
    """Integer coefficients of ``(x + 1)**k * (x - 1)**(n - k)``, lowest power first."""
    coef = [1]
    for factor in [1] * k + [-1] * (n - k):
        nxt = [0] * (len(coef) + 1)
        for i, c in enumerate(coef):
            nxt[i] += c * factor
            nxt[i + 1] += c
        coef = nxt
    return coef


@lru_cache(maxsize=None)
def beamsplitter_sector(n: int) -> np.ndarray:
    """Unitary on the ``n``-photon sector: ``U[m, k]`` takes ``|k, n-k>`` to ``|m, n-m>``.

    Output index ``m`` counts photons at the left port.
    """
    u = np.empty((n + 1, n + 1))
    for k in range(n + 1):
        coef = _poly_coefficients(k, n)
        for m in range(n + 1):
            log_scale = 0.5 * (
                math.lgamma(m + 1) + math.lgamma(n - m + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
            ) - 0.5 * n * math.log(2.0)
            u[m, k] = coef[m] * math.exp(log_scale)
    return u


@lru_cache(maxsize=64)
def _loss_kraus(eta: float, n_max: int) -> np.ndarray:
    """Stack ``K[l, n, n + l] = sqrt(C(n + l, l) eta^n (1 - eta)^l)`` of pure-loss Kraus operators."""
    d = n_max + 1
    k = np.zeros((d, d, d))
    for lost in range(d):
        for n in range(d - lost):
            if eta == 1.0:
                w = 1.0 if lost == 0 else 0.0
            elif eta == 0.0:
                w = 1.0 if n == 0 else 0.0
            else:
                w = math.exp(
                    math.lgamma(n + lost + 1) - math.lgamma(n + 1) - math.lgamma(lost + 1)
                    + n * math.log(eta) + lost * math.log1p(-eta)
                )
            k[lost, n, n + lost] = math.sqrt(w)
    return k


def output_distribution(state: FockState2, eta: float) -> np.ndarray:
    """Joint photon-number distribution ``P[m_L, m_R]`` at the beamsplitter outputs after loss ``eta`` per arm."""
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"transmittance must lie in [0, 1], got {eta}")
    n_max = state.n_max
    kraus = _loss_kraus(eta, n_max)
    # every (lost_A, lost_B) branch is an incoherent component
    branches = np.einsum("aij,jk,blk->abil", kraus, state.amplitudes, kraus, optimize=True)
    branches = branches.reshape(-1, n_max + 1, n_max + 1)
    out = np.zeros((2 * n_max + 1, 2 * n_max + 1))
    for n in range(2 * n_max + 1):
        k = np.arange(max(0, n - n_max), min(n, n_max) + 1)
        sector = branches[:, k, n - k]
        u = beamsplitter_sector(n)[:, k]
        probs = np.sum(np.abs(sector @ u.T) ** 2, axis=0)
        m = np.arange(n + 1)
        out[m, n - m] += probs
    return out


def oracle_detect(
    state: FockState2, ch: ChannelParams, misalignment: Misalignment = "photon"
) -> ClickOutcome:
    """Exactly-one-click probabilities for ``state`` sent through the symmetric channel.

    ``misalignment="photon"`` reroutes each photon to the other detector
    with probability ``e_d``; ``"swap"`` exchanges the two output ports
    with probability ``e_d``.
    """
    dist = output_distribution(state, arm_transmittance(ch))
    m = np.arange(dist.shape[0])
    keep = 1.0 - ch.p_d
    if misalignment == "photon":
        e = ch.e_d
        no_left = keep * float(np.sum(dist * np.outer(e**m, (1.0 - e) ** m)))
        no_right = keep * float(np.sum(dist * np.outer((1.0 - e) ** m, e**m)))
        both_dark = keep**2 * float(dist[0, 0])
        return ClickOutcome(no_right - both_dark, no_left - both_dark)
    if misalignment == "swap":
        only_left_light = float(np.sum(dist[1:, 0]))
        only_right_light = float(np.sum(dist[0, 1:]))
        none = float(dist[0, 0])
        dark = ch.p_d * keep
        left = only_left_light * keep + none * dark
        right = only_right_light * keep + none * dark
        return ClickOutcome(
            (1.0 - ch.e_d) * left + ch.e_d * right, (1.0 - ch.e_d) * right + ch.e_d * left
        )
    raise DomainError(f"unknown misalignment model {misalignment!r}")


def oracle_click_coherent(
    x: float, y: float, theta: float, ch: ChannelParams, n_max: int = DEFAULT_N_MAX,
    misalignment: Misalignment = "photon",
) -> ClickOutcome:
    """Oracle counterpart of :func:`click_probs_coherent`; ``x``, ``y`` are sent intensities."""
    return oracle_detect(coherent_pair(x, y, theta, n_max), ch, misalignment)


def oracle_observables(
    p: ProtocolParams, ch: ChannelParams, n_max: int = DEFAULT_N_MAX,
    misalignment: Misalignment = "photon",
) -> ObservedRates:
    """Every observed rate, with the decoy windows evaluated in the truncated Fock model.

    Signal-window rates only enter the error-correction term and come from
    the analytic model.
    """
    def detect(x: float, y: float, theta: float = 0.0) -> ClickOutcome:
        return oracle_click_coherent(x, y, theta, ch, n_max, misalignment)

    vac = detect(0.0, 0.0)
    matched = detect(p.mu_x, p.mu_x, 0.0)
    opposed = detect(p.mu_x, p.mu_x, math.pi)
    S_z, E_z = z_window_rates(p.mu_z, p.epsilon, p.N, ch)
    return ObservedRates(
        S_oo=vac.total,
        S_ox=detect(0.0, p.mu_x).total,
        S_oy=detect(0.0, p.mu_y).total,
        S_xo=detect(p.mu_x, 0.0).total,
        S_yo=detect(p.mu_y, 0.0).total,
        T_plus_R=matched.p_right_only,
        T_minus_L=opposed.p_left_only,
        T_00=vac.p_right_only,
        T_00p=vac.p_left_only,
        S_z=S_z,
        E_z=E_z,
    )


@dataclass(frozen=True)
class UntaggedTruth:
    s01: float
    s10: float
    t0r: float
    t1l: float
    eph: float

    @property
    def s1(self) -> float:
        return 0.5 * (self.s01 + self.s10)


def oracle_untagged_truth(
    p: ProtocolParams, ch: ChannelParams, n_max: int = DEFAULT_N_MAX,
    misalignment: Misalignment = "photon", policy: SeriesPolicy = DEFAULT_POLICY,
) -> UntaggedTruth:
    """Exact yields and wrong-detector rates of the class-1 signal states at ``mu_z``."""
    states = single_sender_states(p.mu_z, p.N, n_max, policy)
    s01 = oracle_detect(states["0l"], ch, misalignment).total
    s10 = oracle_detect(states["l0"], ch, misalignment).total
    t0r = oracle_detect(states["chi0"], ch, misalignment).p_right_only
    t1l = oracle_detect(states["chi1"], ch, misalignment).p_left_only
    denom = s01 + s10
    eph = (t0r + t1l) / denom if denom > 0.0 else 0.5
    return UntaggedTruth(s01, s10, t0r, t1l, eph)


def class_yields(
    mu: float, N: int, ch: ChannelParams, n_max: int = DEFAULT_N_MAX,
    misalignment: Misalignment = "photon", policy: SeriesPolicy = DEFAULT_POLICY,
) -> tuple[list[float], list[float]]:
    """True yields of ``|0, lambda_j>`` and ``|lambda_j, 0>`` for every class ``j``.

    Classes with no support below ``n_max`` are reported as ``nan``.
    """
    vac = np.zeros(n_max + 1)
    vac[0] = 1.0
    right, left = [], []
    for j in range(N):
        if j > n_max:
            right.append(math.nan)
            left.append(math.nan)
            continue
        lam, tail = class_mode(mu, N, j, n_max, policy)
        right.append(oracle_detect(FockState2(np.outer(vac, lam), tail), ch, misalignment).total)
        left.append(oracle_detect(FockState2(np.outer(lam, vac), tail), ch, misalignment).total)
    return right, left
