"""Harmonic F-test for line components and the taper suboptimality measure.

The F-distribution tail is computed from a regularized incomplete beta
function evaluated by Lentz's continued fraction; quantiles are found by
safeguarded Newton iteration on that tail.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTapers
from .grid import AnalysisBand, BandPlan, SamplingGrid, SignalBand
from .tapers import GridContext, TaperSet, gpss_eigenvalues

__all__ = [
    "FTestResult",
    "SuboptimalityReport",
    "betainc_regularized",
    "f_sf",
    "f_cdf",
    "f_quantile",
    "default_p_levels",
    "f_test",
    "suboptimality",
]

F_CAP = 1e12
_SATURATION_RTOL = 1e-12
_DEGENERATE_RTOL = 1e-14


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, 10000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def _log_front(a: float, b: float, x: float) -> float:
    return (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
            + a * math.log(x) + b * math.log1p(-x))


def betainc_regularized(a: float, b: float, x: float) -> float:
    """``I_x(a, b)``, the regularized incomplete beta function."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    if x == 0 or x == 1:
        return float(x)
    front = math.exp(_log_front(a, b, x))
    if x < (a + 1) / (a + b + 2):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(q: float, d1: float, d2: float) -> float:
    """Upper tail ``P(F > q)`` of the F(d1, d2) distribution."""
    if q <= 0:
        return 1.0
    if math.isinf(q):
        return 0.0
    return betainc_regularized(d2 / 2, d1 / 2, d2 / (d2 + d1 * q))


def f_cdf(q: float, d1: float, d2: float) -> float:
    """``P(F <= q)`` for F(d1, d2)."""
    if q <= 0:
        return 0.0
    return betainc_regularized(d1 / 2, d2 / 2, d1 * q / (d1 * q + d2))


def f_quantile(p: float, d1: float, d2: float) -> float:
    """Upper-tail critical value: the ``q`` with ``P(F(d1, d2) > q) = p``.

    Solves ``I_y(d2/2, d1/2) = p`` for ``y = d2 / (d2 + d1 q)`` by Newton
    steps kept inside a shrinking bisection bracket.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if d1 <= 0 or d2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    a, b = d2 / 2.0, d1 / 2.0
    lo, hi = 0.0, 1.0
    y = 0.5
    for _ in range(200):
        g = betainc_regularized(a, b, y) - p
        if g > 0:
            hi = y
        else:
            lo = y
        dens = math.exp(_log_front(a, b, y)) / (y * (1 - y))
        step = g / dens if dens > 0 else math.inf
        y_new = y - step
        if not lo < y_new < hi:
            y_new = 0.5 * (lo + hi)
        if abs(y_new - y) <= 1e-15 * max(y, 1e-300) or hi - lo <= 1e-300:
            y = y_new
            break
        y = y_new
    return d2 * (1.0 - y) / (d1 * y)


def default_p_levels(n_samples: int) -> tuple[float, ...]:
    """The 5 %, 1 % and Rayleigh (``1/N``) levels."""
    return (0.05, 0.01, 1.0 / n_samples)


@dataclass(frozen=True, eq=False)
class FTestResult:
    """Per-band F statistics, line amplitudes and critical values.

    ``critical_values`` maps each p-level to the F(2, 2K-2) threshold.
    ``saturated`` marks bands whose residual vanished, reported at the cap;
    ``unreliable`` marks bands with ``2 f_c <= f_w``.
    """

    plan: BandPlan
    f_stat: np.ndarray
    amplitude: np.ndarray
    dof: tuple[int, int]
    critical_values: dict
    saturated: np.ndarray
    unreliable: np.ndarray

    def significant(self, p: float) -> np.ndarray:
        return self.f_stat > self.critical_values[p]

    def flags(self) -> list[str]:
        out = []
        for s, u in zip(self.saturated, self.unreliable):
            fl = [name for name, on in (("saturated", s), ("unreliable", u)) if on]
            out.append("|".join(fl) if fl else "ok")
        return out


def f_test(eigencoeffs, tapers: TaperSet, plan: BandPlan,
           p_levels: tuple[float, ...] | None = None, cap: float = F_CAP) -> FTestResult:
    """Harmonic F-test on eigencoefficients ``J`` of shape ``(K, I)``.

    The line amplitude is the least-squares regression of ``J_k`` on the
    tapers' zero-frequency responses ``U_k = W_k(0)``,
    ``C = sum J_k conj(U_k) / sum |U_k|^2``, and
    ``F = (K - 1) |C|^2 sum |U_k|^2 / sum |J_k - C U_k|^2``.
    """
    J = np.asarray(eigencoeffs)
    K = tapers.k_tapers
    if J.ndim != 2 or J.shape != (K, len(plan)):
        raise ValueError(f"eigencoefficients must have shape ({K}, {len(plan)})")
    if K < 2:
        raise ValueError("the F-test needs at least two tapers")
    U = tapers.zero_frequency_response
    N = tapers.grid_ref.n_samples
    u2 = float(np.sum(np.abs(U) ** 2))
    if u2 <= _DEGENERATE_RTOL * K * N:
        raise DegenerateTapers("tapers have no zero-frequency response")
    C = (U.conj() @ J) / u2
    resid = J - np.outer(U, C)
    den = np.sum(np.abs(resid) ** 2, axis=0)
    num = (K - 1) * np.abs(C) ** 2 * u2
    scale = np.sum(np.abs(J) ** 2, axis=0)
    saturated = den <= _SATURATION_RTOL * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        F = np.where(saturated, cap, num / np.where(saturated, 1.0, den))
    F = np.minimum(F, cap)
    # an all-zero band has no line to detect
    F[scale == 0] = 0.0
    saturated &= scale > 0
    dof = (2, 2 * K - 2)
    levels = default_p_levels(N) if p_levels is None else tuple(p_levels)
    crit = {p: f_quantile(p, *dof) for p in levels}
    unreliable = ~(2 * plan.centers > plan.half_width)
    return FTestResult(plan, F, C, dof, crit, saturated, unreliable)


@dataclass(frozen=True, eq=False)
class SuboptimalityReport:
    """Mean absolute eigenvalue gap between each band and the nominal band."""

    plan: BandPlan
    epsilon_measure: np.ndarray
    k_tapers: int


def suboptimality(grid: SamplingGrid, signal_band: SignalBand, plan: BandPlan,
                  k_tapers: int, max_workers: int | None = None) -> SuboptimalityReport:
    """``E_i = (1/K) sum_k |lam_k(A_i) - lam_k(A_0)|`` for every band.

    Each band's eigenvalues come from its own generalized eigenproblem, so
    this is an ``O(N^3)``-per-band diagnostic. Bands reaching beyond the
    signal band are evaluated on their clipped extent.
    """
    ctx = GridContext(grid, signal_band)
    nominal = AnalysisBand(0.0, plan.half_width).clipped_to(signal_band)
    lam0 = gpss_eigenvalues(grid, signal_band, nominal, k_tapers, context=ctx)

    def gap(fc):
        if fc == 0.0:
            return 0.0
        band = AnalysisBand(float(fc), plan.half_width).clipped_to(signal_band)
        lam = gpss_eigenvalues(grid, signal_band, band, k_tapers, context=ctx)
        return float(np.mean(np.abs(lam - lam0)))

    ctx.metric
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            eps = list(pool.map(gap, plan.centers))
    else:
        eps = [gap(fc) for fc in plan.centers]
    return SuboptimalityReport(plan, np.clip(np.array(eps), 0.0, 1.0), k_tapers)
