"""Sampling grids, signal bands and analysis-band planning."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "SamplingGrid",
    "SignalSeries",
    "SignalBand",
    "AnalysisBand",
    "BandPlan",
    "make_band_plan",
]

# relative slack for float comparisons of band edges and centers
_EDGE_RTOL = 1e-12


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SamplingGrid:
    """Strictly increasing sample instants ``t_n``.

    ``mean_dt`` is ``(t_N - t_1) / N``, the average inter-sample interval used
    by the interpolated-taper construction.
    """

    times: np.ndarray

    def __post_init__(self):
        t = _frozen_array(self.times)
        if t.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if t.size < 2:
            raise ValueError("a sampling grid needs at least two samples")
        if not np.all(np.isfinite(t)):
            raise ValueError("times must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def mean_dt(self) -> float:
        return self.span / self.n_samples

    def is_uniform(self, rtol: float = 1e-10) -> bool:
        d = np.diff(self.times)
        return bool(np.all(np.abs(d - d.mean()) <= rtol * d.mean()))

    def __len__(self):
        return self.n_samples


@dataclass(frozen=True, eq=False)
class SignalSeries:
    grid: SamplingGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        dtype = complex if np.iscomplexobj(v) else float
        v = _frozen_array(v, dtype=dtype)
        if v.shape != (self.grid.n_samples,):
            raise ValueError(
                f"expected {self.grid.n_samples} values, got shape {v.shape}"
            )
        object.__setattr__(self, "values", v)

    @classmethod
    def from_arrays(cls, times, values) -> "SignalSeries":
        return cls(SamplingGrid(times), values)


@dataclass(frozen=True)
class SignalBand:
    """The two-sided signal band ``[-f_max, f_max]``."""

    f_max: float

    def __post_init__(self):
        if not (self.f_max > 0 and math.isfinite(self.f_max)):
            raise ValueError("f_max must be a positive finite number")

    def contains(self, band: "AnalysisBand") -> bool:
        tol = _EDGE_RTOL * self.f_max
        return (band.upper <= self.f_max + tol) and (band.lower >= -self.f_max - tol)


@dataclass(frozen=True)
class AnalysisBand:
    """Frequency interval ``[f_center - half_width, f_center + half_width]``."""

    f_center: float
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if not math.isfinite(self.f_center):
            raise ValueError("f_center must be finite")

    @property
    def lower(self) -> float:
        return self.f_center - self.half_width

    @property
    def upper(self) -> float:
        return self.f_center + self.half_width

    @property
    def resolution(self) -> float:
        return 2.0 * self.half_width

    def clipped_to(self, signal_band: SignalBand) -> "AnalysisBand":
        """Intersection with the signal band, as a (possibly narrower) band."""
        lo = max(self.lower, -signal_band.f_max)
        hi = min(self.upper, signal_band.f_max)
        if hi <= lo:
            raise ValueError("analysis band does not intersect the signal band")
        if lo == self.lower and hi == self.upper:
            return self
        return AnalysisBand(0.5 * (lo + hi), 0.5 * (hi - lo))


@dataclass(frozen=True, eq=False)
class BandPlan:
    """Ordered analysis bands sharing one half-width, on ``[0, f_max]``."""

    centers: np.ndarray
    half_width: float
    f_max: float
    boundary_margin: float
    flagged: np.ndarray = field(init=False)

    def __post_init__(self):
        c = _frozen_array(self.centers)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("a band plan needs at least one center")
        if np.any(np.diff(c) <= 0):
            raise ValueError("band centers must be strictly increasing")
        if not self.half_width > 0 or not self.f_max > 0:
            raise ValueError("half_width and f_max must be positive")
        if self.boundary_margin < 0:
            raise ValueError("boundary_margin must be non-negative")
        object.__setattr__(self, "centers", c)
        flags = _frozen_array(
            [boundary_flag(x, self.f_max, self.boundary_margin) for x in c], dtype=bool
        )
        object.__setattr__(self, "flagged", flags)

    @property
    def bands(self) -> tuple[AnalysisBand, ...]:
        return tuple(AnalysisBand(float(c), self.half_width) for c in self.centers)

    @property
    def signal_band(self) -> SignalBand:
        return SignalBand(self.f_max)

    @property
    def interior(self) -> np.ndarray:
        return ~self.flagged

    def __len__(self):
        return int(self.centers.size)

    def with_centers(self, centers: Sequence[float]) -> "BandPlan":
        return BandPlan(np.asarray(centers, float), self.half_width, self.f_max,
                        self.boundary_margin)


def boundary_flag(f_center: float, f_max: float, margin: float) -> bool:
    """True when a center sits within ``margin`` of 0 or of ``f_max``."""
    tol = _EDGE_RTOL * max(f_max, margin)
    return bool(f_center < margin - tol or f_max - f_center < margin - tol)


def make_band_plan(f_max: float, f_w: float, spacing: float | None = None,
                   boundary_margin: float | None = None) -> BandPlan:
    """Centers at ``0, spacing, 2*spacing, ...`` up to ``f_max``.

    ``spacing`` defaults to ``f_w / 5`` and ``boundary_margin`` to ``2 * f_w``.
    """
    if spacing is None:
        spacing = f_w / 5.0
    for name, value in (("f_max", f_max), ("f_w", f_w), ("spacing", spacing)):
        if not (value > 0 and math.isfinite(value)):
            raise ValueError(f"{name} must be positive and finite, got {value!r}")
    if f_w > f_max / 2 * (1 + _EDGE_RTOL):
        raise ValueError("f_w must not exceed f_max / 2")
    if spacing > 2 * f_w * (1 + _EDGE_RTOL):
        raise ValueError("spacing must not exceed the resolution 2 * f_w")
    if boundary_margin is None:
        boundary_margin = 2.0 * f_w
    count = int(math.floor(f_max / spacing + 1e-9)) + 1
    centers = spacing * np.arange(count)
    centers[-1] = min(centers[-1], f_max)
    return BandPlan(centers, float(f_w), float(f_max), float(boundary_margin))
