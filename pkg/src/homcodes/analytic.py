"""Closed-form estimates for {r,s} surface codes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "TessellationParams",
    "encoding_rate",
    "distance_upper_bound",
    "threshold_lower_bound",
    "p_round",
    "low_p_failure_approx",
    "p_max",
]


@dataclass(frozen=True)
class TessellationParams:
    r: int
    s: int
    n: int = 1
    c: float | None = None

    def __post_init__(self):
        if self.r < 3 or self.s < 3:
            raise ValueError("r and s must be at least 3")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def hyperbolic(self) -> bool:
        return Fraction(1, self.r) + Fraction(1, self.s) < Fraction(1, 2)


def encoding_rate(p: TessellationParams) -> Fraction:
    """k/n of an orientable closed {r,s} surface with n edges."""
    return 1 - Fraction(2, p.r) - Fraction(2, p.s) + Fraction(2, p.n)


def distance_upper_bound(p: TessellationParams) -> float:
    """Upper bound on the distance: ``(r/2) log(2n) / log(sqrt(r s))``."""
    if not p.hyperbolic:
        raise ValueError(f"{{{p.r},{p.s}}} is not hyperbolic")
    return (p.r / 2) * math.log(2 * p.n) / math.log(math.sqrt(p.r * p.s))


def threshold_lower_bound(p: TessellationParams, noisy: bool = False) -> float:
    """Lower bound on the matching threshold, for perfect or noisy syndromes."""
    if p.c is None or p.c <= 0:
        raise ValueError("a positive distance constant c is required")
    m = max(p.r, p.s)
    if noisy:
        return math.exp(-4 / p.c) / (4 * (m + 1) ** 2)
    return math.exp(-2 / p.c) / (4 * (m - 1) ** 2)


def p_round(p_bar: float, T: int) -> float:
    """Per-round failure rate from the failure rate after ``T`` rounds."""
    if not 0 <= p_bar < 1:
        raise ValueError("P_bar must lie in [0, 1)")
    if T < 1:
        raise ValueError("T must be at least 1")
    return -math.expm1(math.log1p(-p_bar) / T)


def low_p_failure_approx(N_d: int, d: int, p: float, T: int = 1) -> float:
    """Leading-order failure probability from the ``N_d`` minimum-weight logicals.

    Each one fails once ``ceil(d/2)`` of its qubits are flipped; for even
    ``d`` the tie at exactly ``d/2`` fails half the time.
    """
    if not 0 <= p < 0.5:
        raise ValueError("p must lie in [0, 0.5)")
    h = math.ceil(d / 2)
    prefactor = 0.75 - 0.25 * (-1) ** d
    return T * N_d * prefactor * math.comb(d, h) * p**h


def p_max(N_d: int, d: int, T: int, target: float, rtol: float = 1e-6) -> float:
    """Largest ``p`` with ``low_p_failure_approx(N_d, d, p, T) <= target`` (bisection)."""
    if not 0 < target < 1:
        raise ValueError("target must lie in (0, 1)")
    lo, hi = 0.0, 0.5
    if low_p_failure_approx(N_d, d, math.nextafter(hi, 0), T) <= target:
        return hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if low_p_failure_approx(N_d, d, mid, T) <= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
