"""Separation probabilities of the uniform occupancy model and the accuracy map.

The model: N points land independently and uniformly in S cells.  The
probability that all N points occupy distinct cells ("complete
separation") is

    P_c = S! / ((S - N)! * S^N),

computed here as the mathematically identical product
prod_{i<N} (1 - i/S) in the log domain, which survives S as large as
b*N^2 ~ 1e12 without cancellation.  With the scaling S = b*N^2 the
large-N limit of P_c is exp(-1/(2b)), and the fraction gamma of points
that sit alone in their cell (the separation ratio) acquires the limiting
distribution

    P(gamma = 1)           = exp(-1/(2b))                      (point mass)
    P(gamma) for gamma < 1 = (1 - gamma)/b * exp(gamma(gamma-2)/(2b))

whose mean leads to the accuracy map

    alpha(b) = 1/2 + sqrt(2 pi b)/4 * erfi(1/sqrt(2b)) * exp(-1/(2b)),

a strictly increasing bijection from b in (0, inf) onto (1/2, 1).  The map
and its numerical inverse are the workhorses of the whole package: every
accuracy estimate goes through ``expected_accuracy`` and every measured
accuracy is pulled back through ``invert_expected_accuracy``.

b is called the separation index throughout.  ``math.inf`` is the
saturation marker for "measured accuracy exactly 1".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import erfi_scaled

__all__ = [
    "SATURATED_INDEX",
    "ProblemSpec",
    "p_complete_exact",
    "p_complete_stirling",
    "p_complete_limit",
    "p_incomplete_exact",
    "p_incomplete_limit",
    "gamma_density",
    "gamma_point_mass",
    "expected_gamma",
    "expected_accuracy",
    "invert_expected_accuracy",
]

# Stand-in for b = +inf, i.e. a measured accuracy of exactly 1.
SATURATED_INDEX = math.inf

# Bracket for the numerical inverse of the accuracy map.
_INDEX_LO = 1e-12
_INDEX_HI = 1e12


@dataclass(frozen=True)
class ProblemSpec:
    """One estimation instance: input dimension d, dataset size N,
    hidden-layer width L.

    Evenness of N (balanced classes) is enforced where datasets are
    actually constructed, not here: the estimator formulas are smooth in
    N and are routinely evaluated at odd sizes.
    """

    d: int
    N: int
    L: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")


def _check_index(b: float) -> None:
    if math.isnan(b) or b <= 0.0:
        raise ValueError(f"separation index b must be > 0, got {b!r}")


def _check_ratio(gamma: float) -> None:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"separation ratio must be in [0, 1], got {gamma!r}")


def p_complete_exact(S: int, N: int) -> float:
    """Exact probability that N uniform points occupy N distinct cells of S.

    Returns 0.0 when S < N (pigeonhole), which callers treat as a valid
    regime rather than an error.
    """
    if S < 1 or N < 1:
        raise ValueError(f"S and N must be positive integers, got S={S}, N={N}")
    if S < N:
        return 0.0
    log_p = float(np.log1p(-np.arange(N, dtype=np.float64) / S).sum())
    return math.exp(log_p)


def p_complete_stirling(S: float, N: int) -> float:
    """Stirling-form approximation (1/e)^N * (S/(S-N))^(S-N+1/2) of P_c.

    Requires S > N.  Agrees with :func:`p_complete_exact` to within 1%
    once S and N are in the hundreds, and is the handle used to evaluate
    the S = b*N^a scaling limits at astronomically large S.
    """
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if not S > N:
        raise ValueError(f"Stirling form requires S > N, got S={S}, N={N}")
    log_p = -N - (S - N + 0.5) * math.log1p(-N / S)
    return math.exp(log_p)


def p_complete_limit(a: float, b: float) -> float:
    """Large-N limit of P_c under the cell growth law S = b * N^a.

    The limit is exp(-(a-1) N^(2-a) / (a b)) as N -> inf, which collapses
    to 0 for 1 <= a < 2, to exp(-1/(2b)) at the critical exponent a = 2,
    and to 1 for a > 2.
    """
    if a < 1.0:
        raise ValueError(f"growth exponent a must be >= 1, got {a!r}")
    _check_index(b)
    if a < 2.0:
        return 0.0
    if a == 2.0:
        return math.exp(-1.0 / (2.0 * b))
    return 1.0


def p_incomplete_exact(S: int, N: int, gamma: float) -> float:
    """Probability that a designated set of round(gamma*N) points are each
    alone in their cell:

        P = S! (S - m)^(N-m) / ((S - m)! S^N),   m = round(gamma * N).

    Equals :func:`p_complete_exact` at gamma = 1 and is identically 1 at
    gamma = 0.  The count m must not exceed S.
    """
    if S < 1 or N < 1:
        raise ValueError(f"S and N must be positive integers, got S={S}, N={N}")
    _check_ratio(gamma)
    m = round(gamma * N)
    if m > S:
        raise ValueError(f"separated count round(gamma*N)={m} exceeds cell count S={S}")
    log_p = float(np.log1p(-np.arange(m, dtype=np.float64) / S).sum())
    log_p += (N - m) * math.log1p(-m / S)
    return math.exp(log_p)


def p_incomplete_limit(b: float, gamma: float) -> float:
    """Large-N limit of the partial-separation probability at S = b*N^2:
    exp(gamma (gamma - 2) / (2b)), decreasing in gamma on [0, 1]."""
    _check_index(b)
    _check_ratio(gamma)
    return math.exp(gamma * (gamma - 2.0) / (2.0 * b))


def gamma_point_mass(b: float) -> float:
    """Probability mass of the atom at gamma = 1 (complete separation)."""
    _check_index(b)
    return math.exp(-1.0 / (2.0 * b))


def gamma_density(b: float, gamma: float) -> float:
    """Continuous part of the separation-ratio law on 0 <= gamma < 1:

        (1 - gamma)/b * exp(gamma (gamma - 2) / (2b)).

    The atom at gamma = 1 is deliberately kept separate; callers doing
    quadrature must add :func:`gamma_point_mass` explicitly.
    """
    _check_index(b)
    _check_ratio(gamma)
    if gamma == 1.0:
        raise ValueError("gamma = 1 carries a point mass; use gamma_point_mass(b)")
    return (1.0 - gamma) / b * math.exp(gamma * (gamma - 2.0) / (2.0 * b))


def expected_gamma(b: float) -> float:
    """Mean separation ratio sqrt(2 pi b)/2 * erfi(1/sqrt(2b)) * exp(-1/(2b)).

    Evaluated through the scaled erfi so it stays finite for b down to
    1e-12 (where the erfi argument is ~7e5).  Strictly inside (0, 1) for
    finite b; returns 1.0 at the saturation marker.
    """
    if b == SATURATED_INDEX:
        return 1.0
    _check_index(b)
    x = 1.0 / math.sqrt(2.0 * b)
    return math.sqrt(2.0 * math.pi * b) / 2.0 * erfi_scaled(x)


def expected_accuracy(b: float) -> float:
    """Accuracy map alpha(b) = (1 + E[gamma])/2, the strictly increasing
    bijection (0, inf) -> (1/2, 1); the saturation marker maps to 1.0."""
    if b == SATURATED_INDEX:
        return 1.0
    return 0.5 + 0.5 * expected_gamma(b)


def invert_expected_accuracy(alpha: float) -> float:
    """Pull an accuracy in (1/2, 1) back through the accuracy map.

    Bisects on ln b over [1e-12, 1e12], which the map's strict
    monotonicity makes unconditionally safe, and runs the bracket down to
    ~1e-13 relative width so round trips hold to machine-level accuracy.
    alpha >= 1 returns the saturation marker; alpha <= 1/2 is below the
    map's range and raises.  Accuracies outside the bracket's image are
    clamped to the nearest endpoint.
    """
    if math.isnan(alpha):
        raise ValueError("alpha must not be NaN")
    if alpha >= 1.0:
        return SATURATED_INDEX
    if alpha <= 0.5:
        raise ValueError(f"accuracy {alpha!r} is at or below the chance level 0.5")
    if alpha <= expected_accuracy(_INDEX_LO):
        return _INDEX_LO
    if alpha >= expected_accuracy(_INDEX_HI):
        return _INDEX_HI
    lo = math.log(_INDEX_LO)
    hi = math.log(_INDEX_HI)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if expected_accuracy(math.exp(mid)) < alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13:
            break
    return math.exp(0.5 * (lo + hi))
