"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored.  List-valued keys take
comma-separated values; ``distances`` also accepts ``start:stop:step``
(stop inclusive).  Unknown keys are rejected so typos cannot silently
fall back to defaults.

Keys and defaults::

    alpha_db_per_km = 0.2        eta_d = 0.30
    p_d = 1e-8                   e_d = 0.03
    f = 1.1                      plob_include_detector = false
    phases = 12                  modes = 4int
    distances = 0:400:50
    mu_x, mu_y, mu_z, epsilon    (only for the rate command)
    grid = 5,6,9,8               refine_depth = 14
    rel_tol = 1e-3               n_starts = 3
    series_rel_tol = 1e-16       series_k_max = 64
    n_max = 30                   misalignment = photon
    verify_distances = 50,100,200
    verify_phases = 4,8,12
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .channel import ChannelParams
from .errors import DomainError
from .optimize import OptimizationSpec
from .series import SeriesPolicy

MODE_NAMES = {"4int": "four_intensity", "3int": "three_intensity"}


@dataclass(frozen=True)
class RunConfig:
    alpha_db_per_km: float = 0.2
    eta_d: float = 0.30
    p_d: float = 1e-8
    e_d: float = 0.03
    f: float = 1.1
    plob_include_detector: bool = False
    phases: tuple[int, ...] = (12,)
    modes: tuple[str, ...] = ("4int",)
    distances: tuple[float, ...] = tuple(float(d) for d in range(0, 401, 50))
    mu_x: float | None = None
    mu_y: float | None = None
    mu_z: float | None = None
    epsilon: float | None = None
    grid: tuple[int, ...] = (5, 6, 9, 8)
    refine_depth: int = 14
    rel_tol: float = 1e-3
    n_starts: int = 3
    series_rel_tol: float = 1e-16
    series_k_max: int = 64
    n_max: int = 30
    misalignment: str = "photon"
    verify_distances: tuple[float, ...] = (50.0, 100.0, 200.0)
    verify_phases: tuple[int, ...] = (4, 8, 12)

    def __post_init__(self) -> None:
        for mode in self.modes:
            if mode not in MODE_NAMES:
                raise DomainError(f"mode must be one of {sorted(MODE_NAMES)}, got {mode!r}")
        if not self.distances:
            raise DomainError("distance list must not be empty")
        if any(not (math.isfinite(d) and d >= 0.0) for d in self.distances):
            raise DomainError("distances must be finite and non-negative")
        if list(self.distances) != sorted(self.distances):
            raise DomainError("distances must be sorted in increasing order")
        if not self.phases or not self.modes:
            raise DomainError("phases and modes must not be empty")
        if len(self.grid) != 4:
            raise DomainError(f"grid needs four sizes (mu_x, mu_y, mu_z, epsilon), got {self.grid}")
        if self.misalignment not in ("photon", "swap"):
            raise DomainError(f"misalignment must be 'photon' or 'swap', got {self.misalignment!r}")
        if self.n_max < 10:
            raise DomainError(f"n_max must be at least 10, got {self.n_max}")
        # delegate the remaining checks to the component types
        self.channel()
        self.policy()
        for N in set(self.phases) | set(self.verify_phases):
            for mode in self.modes:
                self.spec(N, mode)

    def channel(self, L_km: float = 0.0) -> ChannelParams:
        return ChannelParams(L_km, self.alpha_db_per_km, self.eta_d, self.p_d, self.e_d)

    def policy(self) -> SeriesPolicy:
        return SeriesPolicy(self.series_rel_tol, self.series_k_max)

    def spec(self, N: int, mode: str) -> OptimizationSpec:
        return OptimizationSpec(
            N=N,
            mode=MODE_NAMES[mode],
            f=self.f,
            grid=tuple(self.grid),
            refine_depth=self.refine_depth,
            rel_tol=self.rel_tol,
            n_starts=self.n_starts,
            policy=self.policy(),
        )

    def with_overrides(self, **overrides) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise DomainError(f"not a boolean: {text!r}")


def parse_distances(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = [float(t) for t in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise DomainError(f"range must be start:stop:step with step > 0, got {text!r}")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(max(count, 0)))
    return tuple(float(t) for t in text.split(","))


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


_PARSERS = {
    "plob_include_detector": _parse_bool,
    "phases": _int_list,
    "verify_phases": _int_list,
    "grid": _int_list,
    "modes": _str_list,
    "distances": parse_distances,
    "verify_distances": parse_distances,
    "refine_depth": int,
    "n_starts": int,
    "series_k_max": int,
    "n_max": int,
    "misalignment": str.strip,
}


def parse_config(text: str) -> dict[str, object]:
    """Parse config text into typed overrides for :class:`RunConfig`."""
    known = {f.name for f in fields(RunConfig)}
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise DomainError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS.get(key, float)(value)
        except ValueError as exc:
            raise DomainError(f"line {lineno}: bad value for {key}: {exc}") from None
    return values


def load_config(path: str | Path | None) -> RunConfig:
    """Defaults, updated from ``path`` when given (raises ``OSError`` if unreadable)."""
    if path is None:
        return RunConfig()
    return RunConfig(**parse_config(Path(path).read_text()))
