"""Deterministic key-rate maximisation over the protocol intensities.

The search runs in log coordinates: a coarse tensor grid, then a
coordinate pattern search with halving steps started from the best grid
points (and, for the four-intensity protocol, from the three-intensity
optimum, which is a feasible point of the larger search space).  The
objective is the unclipped key rate so that the search keeps a slope to
follow where the clipped rate is flat at zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .bounds import decoy_bounds, raw_key_rate
from .channel import ChannelParams, plob_bound, simulate_observables
from .errors import DomainError, NumericError, ValidityError
from .params import MU_X_MIN, MU_Y_MIN, DecoyBounds, ObservedRates, ProtocolParams
from .series import DEFAULT_POLICY, SeriesPolicy

Mode = Literal["four_intensity", "three_intensity"]
MODES = ("four_intensity", "three_intensity")

# halvings performed before the relative-tolerance stop may trigger
_MIN_LEVELS = 6


@dataclass(frozen=True)
class OptimizationSpec:
    """Search space and effort for :func:`optimize_rate`.

    Each ``*_range`` is ``(low, high)``; ``grid`` gives the coarse points per
    parameter in the order ``(mu_x, mu_y, mu_z, epsilon)``.
    """

    N: int
    mode: Mode = "four_intensity"
    f: float = 1.1
    mu_x_range: tuple[float, float] = (MU_X_MIN, 0.3)
    mu_y_range: tuple[float, float] = (MU_Y_MIN, 0.8)
    mu_z_range: tuple[float, float] = (MU_Y_MIN, 1.0)
    epsilon_range: tuple[float, float] = (0.002, 0.5)
    grid: tuple[int, int, int, int] = (5, 6, 9, 8)
    refine_depth: int = 14
    rel_tol: float = 1e-3
    n_starts: int = 3
    policy: SeriesPolicy = DEFAULT_POLICY

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name, (lo, hi) in (
            ("mu_x_range", self.mu_x_range),
            ("mu_y_range", self.mu_y_range),
            ("mu_z_range", self.mu_z_range),
            ("epsilon_range", self.epsilon_range),
        ):
            if not (0.0 < lo <= hi):
                raise DomainError(f"{name} must satisfy 0 < low <= high, got {(lo, hi)}")
        if self.mu_x_range[0] < MU_X_MIN or self.mu_y_range[0] < MU_Y_MIN:
            raise DomainError(f"decoy intensities must respect mu_x >= {MU_X_MIN}, mu_y >= {MU_Y_MIN}")
        if self.mu_z_range[1] > 1.0:
            raise DomainError("mu_z must not exceed 1")
        if self.epsilon_range[1] > 0.5:
            raise DomainError("epsilon must not exceed 0.5")
        if min(self.grid) < 1 or self.refine_depth < 0 or self.n_starts < 1:
            raise DomainError("grid sizes, refine_depth and n_starts must be positive")
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        # ProtocolParams carries the remaining N and f checks
        ProtocolParams(self.N, MU_X_MIN, 2 * MU_X_MIN, 0.1, 0.1, self.f)


@dataclass(frozen=True)
class Evaluation:
    params: ProtocolParams
    observed: ObservedRates
    bounds: DecoyBounds
    raw_rate: float

    @property
    def rate(self) -> float:
        return max(0.0, self.raw_rate)


@dataclass(frozen=True)
class OptimizationResult:
    """Best point found; ``best`` is ``None`` when nothing in the space was valid."""

    best: Evaluation | None
    evaluations: int
    message: str = ""

    @property
    def rate(self) -> float:
        return self.best.rate if self.best is not None else 0.0

    @property
    def params(self) -> ProtocolParams | None:
        return self.best.params if self.best is not None else None


def evaluate(
    p: ProtocolParams, ch: ChannelParams, policy: SeriesPolicy = DEFAULT_POLICY
) -> Evaluation:
    """Simulate, bound and rate a single parameter point.

    Raises :class:`ValidityError` when the analytic bounds do not apply.
    """
    obs = simulate_observables(p, ch)
    bounds = decoy_bounds(obs, p, policy)
    return Evaluation(p, obs, bounds, raw_key_rate(p, obs, bounds, policy))


class _Search:
    """Objective bookkeeping for one (channel, spec) pair."""

    def __init__(self, ch: ChannelParams, spec: OptimizationSpec) -> None:
        self.ch = ch
        self.spec = spec
        self.three = spec.mode == "three_intensity"
        self.lo = np.log([spec.mu_x_range[0], spec.mu_y_range[0], spec.mu_z_range[0], spec.epsilon_range[0]])
        self.hi = np.log([spec.mu_x_range[1], spec.mu_y_range[1], spec.mu_z_range[1], spec.epsilon_range[1]])
        if self.three:
            # mu_z is tied to mu_y, so mu_y inherits the signal range too
            self.lo[1] = max(self.lo[1], self.lo[2])
            self.hi[1] = min(self.hi[1], self.hi[2])
        self.cache: dict[tuple[float, ...], Evaluation | None] = {}
        self.count = 0

    def params_of(self, u: Sequence[float]) -> ProtocolParams | None:
        v = np.clip(np.asarray(u, dtype=float), self.lo, self.hi)
        mu_x, mu_y, mu_z, eps = (float(t) for t in np.exp(v))
        if self.three:
            mu_z = mu_y
        if not mu_x < mu_y:
            return None
        return ProtocolParams(self.spec.N, mu_x, mu_y, mu_z, eps, self.spec.f)

    def key(self, u: Sequence[float]) -> tuple[float, ...]:
        v = np.clip(np.asarray(u, dtype=float), self.lo, self.hi)
        if self.three:
            v[2] = v[1]
        return tuple(float(t) for t in v)

    def __call__(self, u: Sequence[float]) -> Evaluation | None:
        k = self.key(u)
        if k in self.cache:
            return self.cache[k]
        self.count += 1
        p = self.params_of(k)
        result = None
        if p is not None:
            try:
                result = evaluate(p, self.ch, self.spec.policy)
            except (ValidityError, NumericError):
                result = None
        self.cache[k] = result
        return result


def _better(a: Evaluation | None, ka: tuple, b: Evaluation | None, kb: tuple) -> bool:
    """Is candidate ``a`` strictly preferred to incumbent ``b``?"""
    if a is None:
        return False
    if b is None:
        return True
    if a.raw_rate != b.raw_rate:
        return a.raw_rate > b.raw_rate
    return ka < kb


def _grid_axes(search: _Search) -> list[np.ndarray]:
    spec = search.spec
    return [np.linspace(search.lo[i], search.hi[i], n) for i, n in enumerate(spec.grid)]


def _pattern_search(
    search: _Search, start: tuple[float, ...], steps: np.ndarray
) -> tuple[tuple[float, ...], Evaluation | None]:
    free = [0, 1, 3] if search.three else [0, 1, 2, 3]
    best_k, best = start, search(start)
    steps = steps.copy()
    for level in range(search.spec.refine_depth + 1):
        level_start = best.raw_rate if best is not None else -math.inf
        improved = True
        while improved:
            improved = False
            for i in free:
                for direction in (-1.0, 1.0):
                    trial = list(best_k)
                    trial[i] += direction * steps[i]
                    k = search.key(trial)
                    cand = search(k)
                    if _better(cand, k, best, best_k):
                        best_k, best = k, cand
                        improved = True
        steps *= 0.5
        if level >= _MIN_LEVELS and best is not None and level_start > 0.0:
            if best.raw_rate - level_start <= search.spec.rel_tol * abs(best.raw_rate):
                break
    return best_k, best


def optimize_rate(
    ch: ChannelParams,
    spec: OptimizationSpec,
    seeds: Sequence[ProtocolParams] = (),
) -> OptimizationResult:
    """Maximise the key rate at one channel setting.

    ``seeds`` are extra starting points for the local refinement (for
    instance the optimum at a neighbouring distance).  The returned point
    always satisfies the ratio condition and the ranges in ``spec``.
    """
    search = _Search(ch, spec)
    axes = _grid_axes(search)
    if search.three:
        axes[2] = np.array([0.0])

    ranked: list[tuple[tuple[float, ...], Evaluation]] = []
    for combo in itertools.product(*axes):
        k = search.key(combo)
        ev = search(k)
        if ev is not None:
            ranked.append((k, ev))
    ranked.sort(key=lambda item: (-item[1].raw_rate, item[0]))

    starts = [k for k, _ in ranked[: spec.n_starts]]
    for seed in seeds:
        u = [math.log(seed.mu_x), math.log(seed.mu_y), math.log(seed.mu_z), math.log(seed.epsilon)]
        starts.append(search.key(u))
    if spec.mode == "four_intensity":
        sub = optimize_rate(ch, replace(spec, mode="three_intensity"))
        if sub.best is not None:
            p = sub.best.params
            starts.append(search.key([math.log(p.mu_x), math.log(p.mu_y), math.log(p.mu_z), math.log(p.epsilon)]))
        search.count += sub.evaluations

    if not starts:
        return OptimizationResult(None, search.count, "no parameter point satisfies the decoy-bound conditions")

    spacing = np.array(
        [(search.hi[i] - search.lo[i]) / max(n - 1, 1) for i, n in enumerate(spec.grid)]
    )
    best_k: tuple[float, ...] | None = None
    best: Evaluation | None = None
    for start in dict.fromkeys(starts):
        k, ev = _pattern_search(search, start, spacing)
        if _better(ev, k, best, best_k if best_k is not None else ()):
            best_k, best = k, ev
    if best is None:
        return OptimizationResult(None, search.count, "no parameter point satisfies the decoy-bound conditions")
    message = "" if best.raw_rate > 0.0 else "no positive key rate in the search space"
    return OptimizationResult(best, search.count, message)


@dataclass(frozen=True)
class ScanRecord:
    L_km: float
    N: int
    mode: Mode
    result: OptimizationResult
    plob: float

    @property
    def rate(self) -> float:
        return self.result.rate


@dataclass
class ScanResult:
    records: list[ScanRecord] = field(default_factory=list)

    def rates(self) -> list[float]:
        return [r.rate for r in self.records]

    def distances(self) -> list[float]:
        return [r.L_km for r in self.records]


def scan_distances(
    ch: ChannelParams,
    spec: OptimizationSpec,
    distances: Sequence[float],
    plob_include_detector: bool = False,
) -> ScanResult:
    """Optimised rate at each distance, warm-starting from the previous optimum."""
    if len(distances) == 0:
        raise DomainError("distance list must not be empty")
    if list(distances) != sorted(distances):
        raise DomainError("distances must be sorted")
    out = ScanResult()
    previous: ProtocolParams | None = None
    for L in distances:
        here = replace(ch, L_km=float(L))
        result = optimize_rate(here, spec, seeds=(previous,) if previous else ())
        if result.best is not None and result.best.raw_rate > 0.0:
            previous = result.best.params
        out.records.append(
            ScanRecord(float(L), spec.N, spec.mode, result, plob_bound(here, plob_include_detector))
        )
    return out
