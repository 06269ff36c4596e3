"""Taper sets: uniform DPSS, exact GPSS and the interpolated nominal-band tapers.

Every taper set returned here is normalized in the signal-band metric,
``w* R(B) w = 2 f_w``, which makes the multitaper average unbiased for a flat
spectrum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sp_fft

from .eig import CholeskyMetric, cubic_spline, generalized_hermitian_eigen, tridiagonal_eigen
from .grid import AnalysisBand, SamplingGrid, SignalBand
from .kernels import _lags, band_kernel

__all__ = [
    "TaperSet",
    "TaperDiagnostics",
    "GridContext",
    "default_k",
    "dpss_uniform",
    "dpss_concentrations",
    "gpss_exact",
    "gpss_eigenvalues",
    "gpss_interpolated",
    "taper_diagnostics",
    "rb_normalize",
]


@dataclass(frozen=True, eq=False)
class TaperSet:
    """``K`` weight sequences on one grid, stored as rows of ``weights``."""

    weights: np.ndarray
    eigenvalues: np.ndarray | None
    band: AnalysisBand
    grid_ref: SamplingGrid
    signal_band: SignalBand
    normalization: str = "rb_metric"
    source: str = "gpss"

    @property
    def k_tapers(self) -> int:
        return int(self.weights.shape[0])

    @property
    def zero_frequency_response(self) -> np.ndarray:
        """``W_k(0)``, the sum of each taper's weights."""
        return self.weights.sum(axis=1)


@dataclass(frozen=True)
class TaperDiagnostics:
    variance_bound_factor: float
    bias_bound_factor: float
    max_leakage_db: float
    concentrations: tuple[float, ...] = ()


class GridContext:
    """Per-grid quantities shared by every band: lags, ``R(B)`` and its factor."""

    def __init__(self, grid: SamplingGrid, signal_band: SignalBand):
        self.grid = grid
        self.signal_band = signal_band

    @cached_property
    def lags(self) -> np.ndarray:
        return _lags(self.grid)

    @cached_property
    def rb(self) -> np.ndarray:
        return band_kernel(self.grid, self.signal_band.f_max, lags=self.lags)

    @cached_property
    def metric(self) -> CholeskyMetric:
        return CholeskyMetric(self.rb)

    def analysis_kernel(self, band: AnalysisBand) -> np.ndarray:
        return band_kernel(self.grid, band.half_width, band.f_center, lags=self.lags)


def _context(grid, signal_band, context):
    if context is None:
        return GridContext(grid, signal_band)
    if context.grid is not grid or context.signal_band != signal_band:
        raise ValueError("context was built for a different grid or signal band")
    return context


def default_k(time_half_bandwidth: float) -> int:
    return max(1, int(round(2 * time_half_bandwidth)) - 1)


def rb_normalize(weights: np.ndarray, rb: np.ndarray, half_width: float) -> np.ndarray:
    """Rescale rows so that ``w* R(B) w = 2 * half_width``."""
    q = np.sum((weights.conj() @ rb) * weights, axis=1).real
    if np.any(q <= 0):
        raise ValueError("taper has no energy in the signal band")
    return weights * np.sqrt(2.0 * half_width / q)[:, None]


def dpss_concentrations(tapers: np.ndarray, half_width: float) -> np.ndarray:
    """Fraction of each unit-spacing sequence's energy inside ``[-W, W]``.

    Evaluates ``v' R_W v`` through the sequence autocorrelation, so the cost is
    an FFT rather than a dense quadratic form.
    """
    v = np.atleast_2d(tapers)
    n = v.shape[1]
    nfft = sp_fft.next_fast_len(2 * n - 1)
    spec = sp_fft.rfft(v, nfft, axis=1)
    acf = sp_fft.irfft(np.abs(spec) ** 2, nfft, axis=1)[:, :n]
    lag = np.arange(n)
    kern = 2 * half_width * np.sinc(2 * half_width * lag)
    kern[1:] *= 2
    return acf @ kern / np.sum(v * v, axis=1)


def _orient(v: np.ndarray) -> np.ndarray:
    # even orders sum positive; odd orders have a positive first moment
    n = v.shape[1]
    c = np.arange(n) - 0.5 * (n - 1)
    for k in range(v.shape[0]):
        s = v[k].sum() if k % 2 == 0 else (c * v[k]).sum()
        if s < 0:
            v[k] = -v[k]
    return v


def _dpss_vectors(n: int, time_half_bandwidth: float, k_tapers: int) -> np.ndarray:
    W = time_half_bandwidth / n
    m = np.arange(n)
    diag = ((n - 1 - 2 * m) / 2.0) ** 2 * math.cos(2 * math.pi * W)
    off = m[1:] * (n - m[1:]) / 2.0
    pairs = tridiagonal_eigen(diag, off, k_tapers)
    v = pairs.vectors.T.copy()
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return _orient(v)


def dpss_uniform(n: int, time_half_bandwidth: float, k_tapers: int | None = None):
    """Slepian sequences on ``n`` unit-spaced points.

    Returns
    -------
    tapers : ndarray, shape (k_tapers, n)
        Unit-norm sequences, even orders symmetric and odd orders antisymmetric.
    concentrations : ndarray, shape (k_tapers,)
        In-band energy fractions for half-bandwidth ``W = TW / n``.
    """
    if k_tapers is None:
        k_tapers = default_k(time_half_bandwidth)
    if k_tapers > n:
        raise ValueError("cannot draw more tapers than samples")
    if not 0 < time_half_bandwidth < n / 2:
        raise ValueError("time-half-bandwidth must lie in (0, n/2)")
    if k_tapers > 2 * time_half_bandwidth:
        warnings.warn(
            f"K={k_tapers} exceeds 2TW={2 * time_half_bandwidth:g}; "
            "the extra tapers leak badly", stacklevel=2)
    v = _dpss_vectors(n, time_half_bandwidth, k_tapers)
    return v, dpss_concentrations(v, time_half_bandwidth / n)


def gpss_exact(grid: SamplingGrid, signal_band: SignalBand, band: AnalysisBand,
               k_tapers: int, *, context: GridContext | None = None) -> TaperSet:
    """Optimal tapers for ``band`` from ``R(A) w = lam R(B) w``."""
    if not signal_band.contains(band):
        raise ValueError(
            f"analysis band [{band.lower:g}, {band.upper:g}] is not inside the signal band"
        )
    ctx = _context(grid, signal_band, context)
    ra = ctx.analysis_kernel(band)
    pairs = generalized_hermitian_eigen(ra, k_top=k_tapers, metric=ctx.metric)
    w = rb_normalize(pairs.vectors.T, ctx.rb, band.half_width)
    # Rayleigh quotients against the unregularized kernels remove the ridge's
    # O(ridge * |w|^2) offset from the reported concentrations
    qa = np.sum((w.conj() @ ra) * w, axis=1).real
    lam = np.clip(qa / (2.0 * band.half_width), 0.0, 1.0)
    lam = np.minimum.accumulate(lam)
    return TaperSet(w, lam, band, grid, signal_band, source="gpss")


def gpss_eigenvalues(grid: SamplingGrid, signal_band: SignalBand, band: AnalysisBand,
                     k_tapers: int, *, context: GridContext | None = None) -> np.ndarray:
    """Leading concentration ratios only (no eigenvectors)."""
    if not signal_band.contains(band):
        raise ValueError("analysis band is not inside the signal band")
    ctx = _context(grid, signal_band, context)
    return generalized_hermitian_eigen(
        ctx.analysis_kernel(band), k_top=k_tapers, metric=ctx.metric, vectors=False
    ).values


def interpolation_knots(grid: SamplingGrid) -> np.ndarray:
    """Uniform knots spanning ``[t_1, t_N]`` exactly."""
    n = grid.n_samples
    return grid.times[0] + (grid.span / (n - 1)) * np.arange(n)


def gpss_interpolated(grid: SamplingGrid, signal_band: SignalBand, f_w: float,
                      k_tapers: int | None = None, *,
                      context: GridContext | None = None) -> TaperSet:
    """Approximate nominal-band tapers by spline-interpolating uniform DPSS.

    The DPSS are computed on ``N`` uniform knots spanning the sample range,
    interpolated to the sample times with a not-a-knot cubic spline, then
    rescaled in the ``R(B)`` metric. No eigenvalues are attached.
    """
    n = grid.n_samples
    if n < 8:
        raise ValueError("interpolated tapers need at least 8 samples")
    if not 0 < f_w <= signal_band.f_max:
        raise ValueError("f_w must lie in (0, f_max]")
    knots = interpolation_knots(grid)
    tw = f_w * n * (knots[1] - knots[0])
    if k_tapers is None:
        k_tapers = default_k(tw)
    if not 0 < tw < n / 2:
        raise ValueError("f_w gives a time-half-bandwidth outside (0, N/2)")
    if k_tapers > n:
        raise ValueError("cannot draw more tapers than samples")
    v = _dpss_vectors(n, tw, k_tapers)
    if k_tapers > 2 * tw:
        warnings.warn(f"K={k_tapers} exceeds 2TW={2 * tw:.3g}", stacklevel=2)
    if grid.is_uniform():
        w = v.copy()
    else:
        w = cubic_spline(knots, v.T)(grid.times).T
    ctx = _context(grid, signal_band, context)
    w = rb_normalize(w, ctx.rb, f_w)
    return TaperSet(w, None, AnalysisBand(0.0, f_w), grid, signal_band,
                    source="dpss_interp")


def taper_diagnostics(tapers: TaperSet, signal_band: SignalBand | None = None, *,
                      context: GridContext | None = None) -> TaperDiagnostics:
    """Variance bound factor, bias bound factor and worst-taper leakage."""
    sb = tapers.signal_band if signal_band is None else signal_band
    ctx = _context(tapers.grid_ref, sb, context)
    w = tapers.weights
    rb = ctx.rb
    ra = ctx.analysis_kernel(tapers.band)
    K = tapers.k_tapers
    gram = w.conj() @ rb @ w.T
    vfac = float(np.sum(np.abs(gram) ** 2) / K**2)
    qb = np.real(np.diag(gram))
    qa = np.einsum("kn,nm,km->k", w.conj(), ra, w).real
    bfac = float(np.sum(qb - qa) / K)
    conc = tapers.eigenvalues if tapers.eigenvalues is not None else qa / qb
    leak = 1.0 - float(np.min(conc))
    leak_db = 10 * math.log10(leak) if leak > 0 else -math.inf
    return TaperDiagnostics(vfac, max(bfac, 0.0), leak_db, tuple(float(c) for c in conc))
