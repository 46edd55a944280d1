"""Symmetric linear-loss channel model and the PLOB benchmark.

Charlie sits halfway between Alice and Bob.  Each arm attenuates by
``10**(-alpha * L/2 / 10)`` and the detector efficiency ``eta_d`` is folded
into the arm transmittance.  Charlie's two threshold detectors see the
interference of the received coherent fields, with misalignment ``e_d``
reducing the visibility to ``1 - 2 e_d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .params import ObservedRates, ProtocolParams


@dataclass(frozen=True)
class ChannelParams:
    L_km: float = 0.0
    alpha_db_per_km: float = 0.2
    eta_d: float = 0.30
    p_d: float = 1e-8
    e_d: float = 0.03

    def __post_init__(self) -> None:
        if not (math.isfinite(self.L_km) and self.L_km >= 0.0):
            raise DomainError(f"L_km must be finite and >= 0, got {self.L_km}")
        if not (math.isfinite(self.alpha_db_per_km) and self.alpha_db_per_km >= 0.0):
            raise DomainError(f"alpha_db_per_km must be >= 0, got {self.alpha_db_per_km}")
        if not (0.0 < self.eta_d <= 1.0):
            raise DomainError(f"eta_d must lie in (0, 1], got {self.eta_d}")
        if not (0.0 <= self.p_d < 1.0):
            raise DomainError(f"p_d must lie in [0, 1), got {self.p_d}")
        if not (0.0 <= self.e_d < 0.5):
            raise DomainError(f"e_d must lie in [0, 0.5), got {self.e_d}")


@dataclass(frozen=True)
class ClickOutcome:
    p_left_only: float
    p_right_only: float

    @property
    def total(self) -> float:
        return self.p_left_only + self.p_right_only


def arm_transmittance(ch: ChannelParams) -> float:
    """Alice-to-Charlie transmittance including detector efficiency."""
    return ch.eta_d * 10.0 ** (-ch.alpha_db_per_km * (ch.L_km / 2.0) / 10.0)


def total_transmittance(ch: ChannelParams, include_detector: bool = False) -> float:
    """Alice-to-Bob fiber transmittance, optionally times ``eta_d``."""
    eta = 10.0 ** (-ch.alpha_db_per_km * ch.L_km / 10.0)
    return eta * ch.eta_d if include_detector else eta


def plob_bound(ch: ChannelParams, include_detector: bool = False) -> float:
    """Repeaterless secret-key capacity ``-log2(1 - eta)`` in bits per pulse."""
    eta = total_transmittance(ch, include_detector)
    if eta >= 1.0:
        return math.inf
    return -math.log1p(-eta) / math.log(2.0)


def _click(intensity: float, p_d: float) -> float:
    # 1 - (1 - p_d) exp(-I), kept accurate when both are tiny
    return -math.expm1(math.log1p(-p_d) - intensity)


def click_probs_coherent(
    x: float, y: float, theta: float, ch: ChannelParams
) -> ClickOutcome:
    """Exactly-one-click probabilities for received intensities ``x`` (Alice) and ``y`` (Bob).

    ``theta`` is Alice's phase relative to Bob's; ``theta = 0`` interferes
    constructively on the left detector.
    """
    mean = 0.5 * (x + y)
    fringe = (1.0 - 2.0 * ch.e_d) * math.sqrt(x * y) * math.cos(theta)
    p_left = _click(max(0.0, mean + fringe), ch.p_d)
    p_right = _click(max(0.0, mean - fringe), ch.p_d)
    return ClickOutcome(p_left * (1.0 - p_right), p_right * (1.0 - p_left))


def _phase_average(intensity: float, N: int, ch: ChannelParams) -> float:
    return math.fsum(
        click_probs_coherent(intensity, intensity, 2.0 * math.pi * d / N, ch).total
        for d in range(N)
    ) / N


def z_window_rates(mu_z: float, epsilon: float, N: int, ch: ChannelParams) -> tuple[float, float]:
    """``(S_z, E_z)`` for signal windows where each side sends with probability ``epsilon``.

    Only single-sender heralds carry the right bit; both-send and
    neither-send heralds are errors.  The both-send relative phase is averaged
    over the ``N`` discrete values.
    """
    z = arm_transmittance(ch) * mu_z
    neither = (1.0 - epsilon) ** 2 * click_probs_coherent(0.0, 0.0, 0.0, ch).total
    single = epsilon * (1.0 - epsilon) * (
        click_probs_coherent(z, 0.0, 0.0, ch).total + click_probs_coherent(0.0, z, 0.0, ch).total
    )
    both = epsilon**2 * _phase_average(z, N, ch)
    S_z = neither + single + both
    return S_z, ((neither + both) / S_z if S_z > 0.0 else 0.0)


def simulate_observables(p: ProtocolParams, ch: ChannelParams) -> ObservedRates:
    """All rates the decoy analysis consumes, from the analytic coherent-state model."""
    eta = arm_transmittance(ch)
    x, y = eta * p.mu_x, eta * p.mu_y

    vac = click_probs_coherent(0.0, 0.0, 0.0, ch)
    matched = click_probs_coherent(x, x, 0.0, ch)
    opposed = click_probs_coherent(x, x, math.pi, ch)
    S_z, E_z = z_window_rates(p.mu_z, p.epsilon, p.N, ch)

    return ObservedRates(
        S_oo=vac.total,
        S_ox=click_probs_coherent(0.0, x, 0.0, ch).total,
        S_oy=click_probs_coherent(0.0, y, 0.0, ch).total,
        S_xo=click_probs_coherent(x, 0.0, 0.0, ch).total,
        S_yo=click_probs_coherent(y, 0.0, 0.0, ch).total,
        T_plus_R=matched.p_right_only,
        T_minus_L=opposed.p_left_only,
        T_00=vac.p_right_only,
        T_00p=vac.p_left_only,
        S_z=S_z,
        E_z=E_z,
    )
