"""GPSS kernel matrices and the frequency-shifting operator.

Entry ``(n, m)`` of a band kernel is the integral of ``exp(j 2 pi f (t_n - t_m))``
over the band, i.e. ``sin(2 pi w d) / (pi d) * exp(j 2 pi f_c d)`` with
``d = t_n - t_m``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import AnalysisBand, SamplingGrid, SignalBand

__all__ = [
    "KernelMatrix",
    "signal_band_kernel",
    "analysis_band_kernel",
    "band_kernel",
    "shift_phases",
]

# lags below this fraction of mean_dt are treated as zero lag
_ZERO_LAG = 1e-12


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    entries: np.ndarray
    band_tag: str
    half_width: float
    f_center: float = 0.0

    @property
    def shape(self):
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _lags(grid: SamplingGrid) -> np.ndarray:
    t = grid.times
    d = t[:, None] - t[None, :]
    d[np.abs(d) < _ZERO_LAG * grid.mean_dt] = 0.0
    return d


def band_kernel(grid: SamplingGrid, half_width: float, f_center: float = 0.0,
                lags: np.ndarray | None = None) -> np.ndarray:
    """Dense kernel for ``[f_center - half_width, f_center + half_width]``.

    Real symmetric when ``f_center == 0``, complex Hermitian otherwise.
    """
    d = _lags(grid) if lags is None else lags
    # np.sinc(0) == 1 exactly, so the diagonal is the analytic limit 2 * half_width
    k = (2.0 * half_width) * np.sinc(2.0 * half_width * d)
    if f_center != 0.0:
        k = k * np.exp(2j * np.pi * f_center * d)
    return k


def signal_band_kernel(grid: SamplingGrid, band: SignalBand) -> KernelMatrix:
    """``R(B)``: the kernel over ``[-f_max, f_max]``."""
    return KernelMatrix(band_kernel(grid, band.f_max), "signal", band.f_max)


def analysis_band_kernel(grid: SamplingGrid, band: AnalysisBand) -> KernelMatrix:
    """``R(A)``: the kernel over the analysis band."""
    return KernelMatrix(
        band_kernel(grid, band.half_width, band.f_center),
        f"analysis@{band.f_center:g}",
        band.half_width,
        band.f_center,
    )


def shift_phases(grid: SamplingGrid, f_c: float) -> np.ndarray:
    """Diagonal of the shifting operator, ``exp(j 2 pi f_c t_n)``."""
    if f_c == 0.0:
        return np.ones(grid.n_samples, dtype=complex)
    return np.exp(2j * np.pi * f_c * grid.times)
