"""Truncated modular-Poisson series, class-state fidelities and entropy.

Discrete phase randomisation over ``N`` values splits a coherent state of
mean photon number ``mu`` into ``N`` photon-number classes ``n = kN + j``.
Everything here reduces to partial sums of ``mu**n / n!`` over one class,
evaluated in log space so that large ``n`` and tiny ``mu`` never overflow
or underflow.

Trace distances between the class states are computed from a
Lagrange-identity form of ``1 - F**2`` rather than from ``F`` itself.  The
deficits involved are routinely ``1e-20`` or smaller; subtracting a rounded
``F**2`` from one would leave only rounding noise of order ``1e-16`` whose
square root (``1e-8``) swamps the physical penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

from .errors import DomainError, NumericError

Sign = Literal["plus", "minus"]

_LOG_ZERO = -math.inf


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation rule for every class series.

    A series over ``k`` stops once the next term falls below
    ``rel_tol`` times the running sum, or raises :class:`NumericError` if
    ``k_max`` terms were not enough.
    """

    rel_tol: float = 1e-16
    k_max: int = 64

    def __post_init__(self) -> None:
        if not (0.0 < self.rel_tol <= 1e-10):
            raise DomainError(f"rel_tol must lie in (0, 1e-10], got {self.rel_tol}")
        if self.k_max < 10:
            raise DomainError(f"k_max must be >= 10, got {self.k_max}")


DEFAULT_POLICY = SeriesPolicy()


def _check_phase_count(N: int) -> None:
    if isinstance(N, bool) or not isinstance(N, int) or N < 2 or N % 2:
        raise DomainError(f"phase count N must be an even integer >= 2, got {N!r}")


def _check_class(N: int, j: int) -> None:
    _check_phase_count(N)
    if not (0 <= j < N):
        raise DomainError(f"class index j must satisfy 0 <= j < {N}, got {j}")


def _check_intensity(mu: float, name: str = "mu") -> None:
    if not (math.isfinite(mu) and mu >= 0.0):
        raise DomainError(f"{name} must be finite and non-negative, got {mu}")


def _log_factorial(n: int) -> float:
    if n <= 20:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1.0)


def _logsumexp(values) -> float:
    values = [v for v in values if v != _LOG_ZERO]
    if not values:
        return _LOG_ZERO
    top = max(values)
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


@lru_cache(maxsize=65536)
def _class_log_terms(
    mu: float, N: int, j: int, policy: SeriesPolicy
) -> tuple[float, ...]:
    """Log of ``mu**n / n!`` for ``n = kN + j``, k = 0, 1, ... until converged."""
    if mu == 0.0:
        return (0.0,) if j == 0 else ()
    log_mu = math.log(mu)
    log_tol = math.log(policy.rel_tol)
    terms: list[float] = []
    running = _LOG_ZERO
    for k in range(policy.k_max):
        n = k * N + j
        t = n * log_mu - _log_factorial(n)
        # terms are log-concave in n, so once past the mode they only shrink
        if terms and n > mu and t < running + log_tol:
            return tuple(terms)
        terms.append(t)
        running = _logsumexp((running, t))
    raise NumericError(
        f"class series (mu={mu}, N={N}, j={j}) not converged after k_max={policy.k_max} terms"
    )


def log_class_sum(
    mu: float, N: int, j: int, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """``log(sum_k mu**(kN+j) / (kN+j)!)``; ``-inf`` when the sum is zero."""
    _check_class(N, j)
    _check_intensity(mu)
    return _logsumexp(_class_log_terms(float(mu), N, j, policy))


def log_p_j(mu: float, N: int, j: int, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    return log_class_sum(mu, N, j, policy) - mu


def p_j(mu: float, N: int, j: int, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Probability that a discretely phase-randomised pulse falls in class ``j``.

    Returns ``sum_k mu**(kN+j) exp(-mu) / (kN+j)!``.
    """
    return min(1.0, math.exp(log_p_j(mu, N, j, policy)))


def px_j(mu_x: float, N: int, j: int, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Class-``j`` weight of a phase-matched pulse pair, each of intensity ``mu_x``."""
    _check_intensity(mu_x, "mu_x")
    return p_j(2.0 * mu_x, N, j, policy)


def fidelity_lambda(
    mu_a: float, mu_b: float, N: int, j: int, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """Fidelity between the class-``j`` states of intensities ``mu_a`` and ``mu_b``."""
    _check_class(N, j)
    _check_intensity(mu_a, "mu_a")
    _check_intensity(mu_b, "mu_b")
    log_b = log_class_sum(mu_a, N, j, policy)
    log_c = log_class_sum(mu_b, N, j, policy)
    if log_b == _LOG_ZERO or log_c == _LOG_ZERO:
        raise DomainError(
            f"class-{j} state undefined for zero intensity (mu_a={mu_a}, mu_b={mu_b})"
        )
    if mu_a == mu_b:
        return 1.0
    log_a = log_class_sum(math.sqrt(mu_a * mu_b), N, j, policy)
    return min(1.0, max(0.0, math.exp(log_a - 0.5 * (log_b + log_c))))


def _log_abs_power_gap(a: float, b: float, m: float) -> float:
    """``log|b**m - a**m|`` for non-negative ``a``, ``b`` and ``m > 0``."""
    hi, lo = max(a, b), min(a, b)
    if hi == lo:
        return _LOG_ZERO
    if lo == 0.0:
        return m * math.log(hi)
    return m * math.log(hi) + math.log(-math.expm1(m * (math.log(lo) - math.log(hi))))


@lru_cache(maxsize=65536)
def _log_lagrange_gap(
    a: float, b: float, N: int, j: int, policy: SeriesPolicy
) -> float:
    """``log(B*C - A**2)`` for the class-``j`` series of ``a`` and ``b``.

    With ``A = sum sqrt(ab)**n/n!``, ``B = sum a**n/n!`` and ``C = sum
    b**n/n!`` the gap is ``sum_{k<l} (ab)**n_k (b**m - a**m)**2 / (n_k! n_l!)``
    with ``m = (n_l - n_k)/2``; every term is non-negative.  Columns ``l``
    are added until one contributes less than ``rel_tol`` of the total.
    """
    if a == b:
        return _LOG_ZERO
    log_g2 = math.log(a * b) if a > 0.0 and b > 0.0 else _LOG_ZERO

    def head(k: int) -> float:
        nk = k * N + j
        if nk == 0:
            return 0.0
        if log_g2 == _LOG_ZERO:
            return _LOG_ZERO
        return nk * log_g2 - _log_factorial(nk)

    def column(l: int) -> float:
        nl = l * N + j
        return _logsumexp(
            head(k) + 2.0 * _log_abs_power_gap(a, b, 0.5 * (nl - k * N - j)) - _log_factorial(nl)
            for k in range(l)
            if head(k) != _LOG_ZERO
        )

    return _converged_shells(column, max(a, b), N, j, policy)


def _converged_shells(shell, mu_max: float, N: int, j: int, policy: SeriesPolicy) -> float:
    """Log-sum of ``shell(1), shell(2), ...`` stopped by the policy rule."""
    log_tol = math.log(policy.rel_tol)
    running = _LOG_ZERO
    for l in range(1, policy.k_max):
        t = shell(l)
        if l >= 2 and l * N + j > mu_max and (t == _LOG_ZERO or t < running + log_tol):
            return running
        running = _logsumexp((running, t))
    raise NumericError(f"double series (N={N}, j={j}) not converged within k_max={policy.k_max}")


def class_infidelity(
    mu_a: float, mu_b: float, N: int, j: int, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """``1 - F**2`` for the class-``j`` states, accurate to relative precision."""
    _check_class(N, j)
    _check_intensity(mu_a, "mu_a")
    _check_intensity(mu_b, "mu_b")
    log_b = log_class_sum(mu_a, N, j, policy)
    log_c = log_class_sum(mu_b, N, j, policy)
    if log_b == _LOG_ZERO or log_c == _LOG_ZERO:
        raise DomainError(
            f"class-{j} state undefined for zero intensity (mu_a={mu_a}, mu_b={mu_b})"
        )
    gap = _log_lagrange_gap(float(mu_a), float(mu_b), N, j, policy)
    return min(1.0, math.exp(gap - log_b - log_c))


def trace_distance_lambda(
    mu_a: float, mu_b: float, N: int, j: int, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """``sqrt(1 - F**2)`` between the class-``j`` states of two intensities."""
    return math.sqrt(class_infidelity(mu_a, mu_b, N, j, policy))


def fidelity_f0(mu_y: float, N: int, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Overlap of the class-0 state of ``mu_y`` with vacuum."""
    return fidelity_lambda(0.0, mu_y, N, 0, policy)


def fidelity_f1(
    mu_y: float, mu_z: float, N: int, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """Fidelity between the class-1 states of the decoy ``mu_y`` and signal ``mu_z``."""
    return fidelity_lambda(mu_y, mu_z, N, 1, policy)


def fidelity_f00(mu_x: float, N: int, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Overlap of the matched-phase class-0 pair state with the vacuum pair."""
    _check_intensity(mu_x, "mu_x")
    return fidelity_lambda(0.0, 2.0 * mu_x, N, 0, policy)


def _shift_cos_sin(q: int, N: int) -> tuple[float, float]:
    # cos/sin of 2*pi*q*(kN+1)/N, independent of k; exact on the quarter turns
    r = q % N
    if r == 0:
        return 1.0, 0.0
    if 2 * r == N:
        return -1.0, 0.0
    if 4 * r == N:
        return 0.0, 1.0
    if 4 * r == 3 * N:
        return 0.0, -1.0
    angle = 2.0 * math.pi * r / N
    return math.cos(angle), math.sin(angle)


def _check_f11_args(mu_x: float, mu_z: float, N: int, q: int, sign: str) -> None:
    _check_phase_count(N)
    if not (0 <= q < N):
        raise DomainError(f"phase shift q must satisfy 0 <= q < {N}, got {q}")
    if sign not in ("plus", "minus"):
        raise DomainError(f"sign must be 'plus' or 'minus', got {sign!r}")
    for name, mu in (("mu_x", mu_x), ("mu_z", mu_z)):
        _check_intensity(mu, name)
        if mu == 0.0:
            raise DomainError(f"{name} must be positive")


def fidelity_f11(
    mu_x: float,
    mu_z: float,
    N: int,
    q: int,
    sign: Sign,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> float:
    """Fidelity between the class-1 X-window pair state and ``chi_0`` / ``chi_1``.

    ``sign="plus"`` compares against the symmetric single-photon-class state
    ``chi_0``, ``sign="minus"`` against the antisymmetric ``chi_1``; ``q`` is
    the phase offset between the two pulses in units of ``2*pi/N``.
    """
    _check_f11_args(mu_x, mu_z, N, q, sign)
    c, s = _shift_cos_sin(q, N)
    shared = math.exp(log_class_sum(math.sqrt(mu_x * mu_z), N, 1, policy))
    re = (1.0 + c if sign == "plus" else 1.0 - c) * shared / math.sqrt(2.0)
    im = s * shared / math.sqrt(2.0)
    log_norm = log_class_sum(2.0 * mu_x, N, 1, policy) + log_class_sum(mu_z, N, 1, policy)
    return min(1.0, max(0.0, math.hypot(re, im) / math.exp(0.5 * log_norm)))


def f11_infidelity(
    mu_x: float,
    mu_z: float,
    N: int,
    q: int,
    sign: Sign,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> float:
    """``1 - F11**2`` without cancellation.

    Writing ``B = sum (2 mu_x)**n/n!``, ``C = sum mu_z**n/n!`` and ``A = sum
    (mu_x mu_z)**(n/2)/n!``, the squared overlap is ``(1 +/- cos) A**2``, so

        B*C - (1 +/- cos) A**2
            = [B*C - sum G**s/(n_k! n_l!)]                 (Lagrange gap)
            + sum G**s (1 - 2**(1 - s/2)) / (n_k! n_l!)    (s = n_k + n_l)
            + (1 -/+ cos) A**2

    with ``G**2 = 2 mu_x mu_z``.  All three pieces are non-negative.
    """
    _check_f11_args(mu_x, mu_z, N, q, sign)
    c, _ = _shift_cos_sin(q, N)
    a, b = 2.0 * mu_x, float(mu_z)
    log_b = log_class_sum(a, N, 1, policy)
    log_c = log_class_sum(b, N, 1, policy)
    pieces = [_log_lagrange_gap(a, b, N, 1, policy)]

    log_g = 0.5 * math.log(a * b)

    def cross(k: int, l: int) -> float:
        s_tot = (k * N + 1) + (l * N + 1)
        weight = math.log(-math.expm1((1.0 - 0.5 * s_tot) * math.log(2.0)))
        return s_tot * log_g + weight - _log_factorial(k * N + 1) - _log_factorial(l * N + 1)

    def shell(m: int) -> float:
        # all (k, l) with max(k, l) == m
        return _logsumexp([cross(m, m)] + [cross(k, m) + math.log(2.0) for k in range(m)])

    pieces.append(_converged_shells(shell, max(a, b), N, 1, policy))

    residual = 1.0 - c if sign == "plus" else 1.0 + c
    if residual > 0.0:
        log_a = log_class_sum(math.sqrt(mu_x * mu_z), N, 1, policy)
        pieces.append(math.log(residual) + 2.0 * log_a)
    return min(1.0, math.exp(_logsumexp(pieces) - log_b - log_c))


def trace_distance_f11(
    mu_x: float,
    mu_z: float,
    N: int,
    q: int,
    sign: Sign,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> float:
    return math.sqrt(f11_infidelity(mu_x, mu_z, N, q, sign, policy))


def check_ratio_condition(
    mu_x: float, mu_y: float, N: int, policy: SeriesPolicy = DEFAULT_POLICY
) -> bool:
    """True iff ``P1x/P1y >= P2x/P2y >= Pjx/Pjy`` for every ``j = 3..N-1``.

    Ratios are compared in log space; for ``N = 2`` there is no class 2 and
    the condition cannot be formed, so the result is ``False``.
    """
    _check_phase_count(N)
    _check_intensity(mu_x, "mu_x")
    _check_intensity(mu_y, "mu_y")
    if N < 4:
        return False
    if mu_x == mu_y:
        return True
    if mu_x == 0.0 or mu_y == 0.0:
        return False
    log_ratio = [
        log_class_sum(mu_x, N, j, policy) - log_class_sum(mu_y, N, j, policy)
        for j in range(N)
    ]
    if log_ratio[1] < log_ratio[2]:
        return False
    return all(log_ratio[2] >= r for r in log_ratio[3:])


def delta_upper(
    mu_x: float, mu_y: float, N: int, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """Upper bound on the decoy yield shift, ``sum_j P_j(mu_x) sqrt(1 - F_j**2)``."""
    _check_phase_count(N)
    _check_intensity(mu_x, "mu_x")
    _check_intensity(mu_y, "mu_y")
    if mu_x > mu_y:
        raise DomainError(f"delta_upper requires mu_x <= mu_y, got {mu_x} > {mu_y}")
    if mu_x == mu_y:
        return 0.0
    total = 0.0
    for j in range(N):
        weight = p_j(mu_x, N, j, policy)
        if weight > 0.0:
            total += weight * trace_distance_lambda(mu_x, mu_y, N, j, policy)
    return total


def binary_entropy(x: float) -> float:
    """Shannon entropy of a biased coin, in bits."""
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"binary entropy needs 0 <= x <= 1, got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)
