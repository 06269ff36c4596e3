"""Sampling-scheme and test-signal generators, and uniform resampling.

All generators are pure functions of their configuration and seed; randomness
comes from ``numpy.random.Generator(PCG64(seed))``, whose streams are
reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import SamplingGrid, SignalBand, SignalSeries
from .kernels import band_kernel

__all__ = [
    "SCHEMES",
    "PAPER_MISSING",
    "SimConfig",
    "paper_config",
    "generate_grid",
    "generate_white_noise",
    "bandlimited_noise_factor",
    "generate_bandlimited_noise",
    "generate_line_plus_noise",
    "resample_uniform",
]

SCHEMES = ("uniform", "jitter", "missing", "arithmetic")
# one-based positions dropped from t = 5m/6, m = 1..60
PAPER_MISSING = (1, 5, 17, 18, 19, 23, 27, 32, 53, 56)
JITTER_REDRAWS = 100


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one sampling scheme.

    ``n`` counts the nominal samples before any are removed; for ``missing``
    the grid keeps ``n - len(missing_indices)`` points. ``missing_indices``
    are one-based. ``time_step`` multiplies the nominal times of the
    ``missing`` scheme.
    """

    scheme: str = "uniform"
    n: int = 50
    jitter_sigma: float = 0.0
    intensity: float = 1.0
    missing_indices: tuple[int, ...] = ()
    arith_a: float = 2.0 / 3.0
    arith_b: float = 2.0 / 3.0 / 48.0
    time_step: float = 1.0
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be non-negative")
        if not self.intensity > 0:
            raise ValueError("intensity must be positive")
        idx = tuple(sorted(set(int(i) for i in self.missing_indices)))
        if idx and (idx[0] < 1 or idx[-1] > self.n):
            raise ValueError("missing_indices must lie in [1, n]")
        if self.n - len(idx) < 2:
            raise ValueError("fewer than two samples would remain")
        object.__setattr__(self, "missing_indices", idx)

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=seed)

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme, "n": self.n, "jitter_sigma": self.jitter_sigma,
            "intensity": self.intensity, "missing_indices": list(self.missing_indices),
            "arith_a": self.arith_a, "arith_b": self.arith_b,
            "time_step": self.time_step, "seed": self.seed,
        }


def paper_config(scheme: str, seed: int = 0) -> SimConfig:
    """The 50-sample configurations of the four benchmark schemes."""
    if scheme == "uniform":
        return SimConfig("uniform", 50, seed=seed)
    if scheme == "jitter":
        return SimConfig("jitter", 50, jitter_sigma=0.1, intensity=1.0, seed=seed)
    if scheme == "missing":
        return SimConfig("missing", 60, missing_indices=PAPER_MISSING,
                         time_step=5.0 / 6.0, seed=seed)
    if scheme == "arithmetic":
        return SimConfig("arithmetic", 50, seed=seed)
    raise ValueError(f"unknown scheme {scheme!r}")


def generate_grid(config: SimConfig) -> SamplingGrid:
    """Sample times for ``config``.

    Jittered draws ``t_n = n / intensity + sigma z_n`` that come out
    non-increasing are redrawn whole, up to 100 times.
    """
    n = np.arange(1, config.n + 1, dtype=float)
    if config.scheme == "uniform":
        return SamplingGrid(n / config.intensity)
    if config.scheme == "missing":
        keep = np.ones(config.n, dtype=bool)
        keep[np.asarray(config.missing_indices, dtype=int) - 1] = False
        return SamplingGrid(config.time_step * n[keep])
    if config.scheme == "arithmetic":
        m = n - 1
        return SamplingGrid(1.0 + config.arith_a * m + config.arith_b * m * (m - 1) / 2)
    rng = _rng(config.seed)
    nominal = n / config.intensity
    for _ in range(JITTER_REDRAWS):
        t = nominal + config.jitter_sigma * rng.standard_normal(config.n)
        if np.all(np.diff(t) > 0):
            return SamplingGrid(t)
    raise ValueError(
        f"no strictly increasing jitter draw in {JITTER_REDRAWS} attempts; "
        "jitter_sigma is too large for the spacing"
    )


def generate_white_noise(grid: SamplingGrid, variance: float = 1.0,
                         seed: int = 0) -> SignalSeries:
    """Independent zero-mean Gaussian samples."""
    if not variance > 0:
        raise ValueError("variance must be positive")
    x = np.sqrt(variance) * _rng(seed).standard_normal(grid.n_samples)
    return SignalSeries(grid, x)


def bandlimited_noise_factor(grid: SamplingGrid, signal_band: SignalBand,
                             variance: float = 1.0) -> np.ndarray:
    """Matrix ``F`` with ``F F'`` the covariance of flat noise on the signal band.

    The covariance is ``variance / (2 f_max) * R(B)``; its tiny negative
    eigenvalues from rounding are clipped to zero.
    """
    cov = band_kernel(grid, signal_band.f_max) * (variance / (2 * signal_band.f_max))
    vals, vecs = np.linalg.eigh(cov)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def generate_bandlimited_noise(grid: SamplingGrid, signal_band: SignalBand,
                               variance: float = 1.0, seed: int = 0, trials: int | None = None,
                               factor: np.ndarray | None = None):
    """Gaussian noise with flat spectrum ``variance / (2 f_max)`` on the signal band.

    On a unit-spaced grid with ``f_max = 0.5`` this is ordinary white noise in
    distribution. Returns a ``SignalSeries``, or a ``(trials, N)`` array when
    ``trials`` is given.
    """
    F = bandlimited_noise_factor(grid, signal_band, variance) if factor is None else factor
    rng = _rng(seed)
    if trials is None:
        return SignalSeries(grid, F @ rng.standard_normal(grid.n_samples))
    return rng.standard_normal((trials, grid.n_samples)) @ F.T


def generate_line_plus_noise(grid: SamplingGrid, freq: float, amplitude: float = 1.0,
                             phase: float = 0.0, noise_var: float = 0.0,
                             seed: int = 0) -> SignalSeries:
    """``amplitude cos(2 pi freq t + phase)`` plus white noise."""
    x = amplitude * np.cos(2 * np.pi * freq * grid.times + phase)
    if noise_var > 0:
        x = x + generate_white_noise(grid, noise_var, seed).values
    return SignalSeries(grid, x)


def resample_uniform(series: SignalSeries, rate: float) -> SignalSeries:
    """Linear interpolation onto ``t_1, t_1 + 1/rate, ...`` not beyond ``t_N``."""
    if not rate > 0:
        raise ValueError("rate must be positive")
    t = series.grid.times
    count = int(np.floor(series.grid.span * rate * (1 + 1e-12))) + 1
    tu = t[0] + np.arange(count) / rate
    tu = tu[tu <= t[-1] * (1 + 1e-15) + 1e-15]
    if tu.size < 2:
        raise ValueError("rate too low: fewer than two resampled points")
    v = series.values
    if np.iscomplexobj(v):
        x = np.interp(tu, t, v.real) + 1j * np.interp(tu, t, v.imag)
    else:
        x = np.interp(tu, t, v)
    return SignalSeries(SamplingGrid(tu), x)
