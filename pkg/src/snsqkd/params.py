"""Parameter and result records passed between the simulation stages."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import DomainError

MU_X_MIN = 0.001
MU_Y_MIN = 0.002


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


@dataclass(frozen=True)
class ProtocolParams:
    """Knobs Alice and Bob control.

    ``mu_x < mu_y`` are the decoy intensities, ``mu_z`` the signal-window
    intensity sent with probability ``epsilon``, ``N`` the number of discrete
    phase values and ``f`` the error-correction inefficiency.
    """

    N: int
    mu_x: float
    mu_y: float
    mu_z: float
    epsilon: float
    f: float = 1.1

    def __post_init__(self) -> None:
        _require(
            isinstance(self.N, int) and not isinstance(self.N, bool) and self.N >= 4 and self.N % 2 == 0,
            f"N must be an even integer >= 4, got {self.N!r}",
        )
        for name in ("mu_x", "mu_y", "mu_z", "epsilon", "f"):
            _require(math.isfinite(getattr(self, name)), f"{name} must be finite")
        _require(self.mu_x >= MU_X_MIN, f"mu_x must be >= {MU_X_MIN}, got {self.mu_x}")
        _require(self.mu_y > self.mu_x, f"mu_x < mu_y required, got mu_x={self.mu_x}, mu_y={self.mu_y}")
        _require(self.mu_z > 0.0, f"mu_z must be positive, got {self.mu_z}")
        _require(0.0 < self.epsilon < 1.0, f"epsilon must lie in (0, 1), got {self.epsilon}")
        _require(self.f >= 1.0, f"f must be >= 1, got {self.f}")


@dataclass(frozen=True)
class ObservedRates:
    """Per-pulse-pair heralding rates Alice and Bob would observe.

    ``S_ab`` are one-detector yields for source pair ``ab`` (o: vacuum,
    x/y: decoys).  ``T_plus_R`` and ``T_minus_L`` are the right/left click
    rates of phase-matched and anti-phase ``mu_x`` pairs, ``T_00``/``T_00p``
    the right/left click rates of the vacuum pair.  ``S_z``/``E_z`` describe
    the signal windows.
    """

    S_oo: float
    S_ox: float
    S_oy: float
    S_xo: float
    S_yo: float
    T_plus_R: float
    T_minus_L: float
    T_00: float
    T_00p: float
    S_z: float
    E_z: float

    def __post_init__(self) -> None:
        for fld in fields(self):
            value = getattr(self, fld.name)
            _require(0.0 <= value <= 1.0, f"{fld.name} must lie in [0, 1], got {value}")

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class DecoyBounds:
    s01_L: float
    s10_L: float
    t0r_U: float
    t1l_U: float
    eph_U: float

    @property
    def s1_L(self) -> float:
        return 0.5 * (self.s01_L + self.s10_L)

    def as_dict(self) -> dict[str, float]:
        out = asdict(self)
        out["s1_L"] = self.s1_L
        return out
