"""Fourier sums of nonuniformly sampled data at uniformly spaced frequencies.

``ndft_direct`` evaluates ``sum_n y_n exp(-j 2 pi f t_n)`` by brute force.
``nufft_fast`` computes the same sums by Gaussian gridding: each sample is
spread onto an oversampled periodic grid with a Gaussian kernel, the grid is
FFT'd, and the Gaussian is divided back out in the frequency domain.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import PlanMismatch
from .grid import SamplingGrid

__all__ = ["NufftPlan", "ndft_direct", "nufft_fast", "eigencoefficients", "spread_width"]

# Gaussian-gridding error decays like exp(-pi * (R - 0.5) / R * spread) for
# oversampling R; SPREAD_C = R / (pi * (R - 0.5)) at R = 2, checked against the
# direct sum over eps in [1e-12, 1e-3] with one point of margin.
SPREAD_C = 2.0 / (1.5 * math.pi)
SPREAD_MARGIN = 1
FAST_MIN_WORK = 2**14
_UNIFORM_RTOL = 1e-9


def spread_width(epsilon: float) -> int:
    """Half-width of the spreading stencil (grid points) for precision ``epsilon``."""
    return int(math.ceil(-math.log(epsilon) * SPREAD_C)) + SPREAD_MARGIN


@dataclass(frozen=True, eq=False)
class NufftPlan:
    """Precomputed spreading stencil for one grid and one frequency lattice.

    ``path`` is ``"auto"``, ``"fast"`` or ``"direct"``; ``"auto"`` uses the
    direct sum when ``N * I < 2**14``. Non-uniform frequency lists always use
    the direct sum. The path actually taken is recorded in ``path_used``.
    """

    grid_ref: SamplingGrid
    freq_centers: np.ndarray
    epsilon: float = 1e-8
    oversampling: int = 2
    path: str = "auto"
    path_used: str = field(init=False)
    spread: int = field(init=False)
    tau: float = field(init=False)
    n_modes: int = field(init=False)
    n_grid: int = field(init=False)

    def __post_init__(self):
        f = np.array(self.freq_centers, dtype=float)
        f.setflags(write=False)
        object.__setattr__(self, "freq_centers", f)
        if f.ndim != 1 or f.size == 0:
            raise ValueError("freq_centers must be a non-empty 1-D sequence")
        if not 0 < self.epsilon <= 1e-2:
            raise ValueError("epsilon must lie in (0, 1e-2]")
        if self.oversampling < 2:
            raise ValueError("oversampling must be at least 2")
        if self.path not in ("auto", "fast", "direct"):
            raise ValueError(f"unknown path {self.path!r}")
        uniform = _is_uniform(f)
        if self.path == "fast" and not uniform:
            warnings.warn("frequency centers are not uniform; using the direct sum",
                          stacklevel=3)
        small = self.grid_ref.n_samples * f.size < FAST_MIN_WORK
        use_fast = uniform and (self.path == "fast" or (self.path == "auto" and not small))
        object.__setattr__(self, "path_used", "fast" if use_fast else "direct")
        object.__setattr__(self, "_uniform", uniform)
        msp = spread_width(self.epsilon)
        R = self.oversampling
        M = max(int(f.size), 2)
        n_grid = R * max(M, msp + 1)
        m_eff = n_grid / R
        # Gaussian variance matched to the stencil: error ~ exp(-pi (R - 1/2) msp / R)
        tau = math.pi * msp / (m_eff * m_eff * R * (R - 0.5))
        object.__setattr__(self, "spread", msp)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "n_modes", M)
        object.__setattr__(self, "n_grid", n_grid)
        if use_fast:
            self._build_stencil()

    def _build_stencil(self):
        t = self.grid_ref.times
        f = self.freq_centers
        I = f.size
        df = (f[-1] - f[0]) / (I - 1)
        half = I // 2
        # phase angles of the unit lattice step, reduced to [0, 2 pi)
        theta = np.mod(2 * np.pi * df * t, 2 * np.pi)
        pre = np.exp(-2j * np.pi * f[0] * t - 1j * half * theta)
        Mr = self.n_grid
        h = 2 * np.pi / Mr
        base = np.floor(theta / h).astype(np.int64)
        offs = np.arange(-self.spread + 1, self.spread + 1)
        idx = base[:, None] + offs[None, :]
        dist = theta[:, None] - h * idx
        weights = np.exp(-dist**2 / (4 * self.tau))
        k = np.arange(I) - half
        deconv = math.sqrt(math.pi / self.tau) * np.exp(k.astype(float) ** 2 * self.tau) / Mr
        object.__setattr__(self, "_pre", pre)
        object.__setattr__(self, "_idx", np.mod(idx, Mr).ravel())
        object.__setattr__(self, "_weights", weights)
        object.__setattr__(self, "_deconv", deconv)
        object.__setattr__(self, "_modes", np.mod(k, Mr))

    @property
    def n_freqs(self) -> int:
        return int(self.freq_centers.size)

    def execute(self, values: np.ndarray) -> np.ndarray:
        """Transform one vector ``(N,)`` or a stack ``(B, N)``."""
        y = np.asarray(values)
        if y.shape[-1] != self.grid_ref.n_samples:
            raise PlanMismatch(
                f"plan built for {self.grid_ref.n_samples} samples, got {y.shape[-1]}"
            )
        if self.path_used == "direct":
            if self._uniform:
                return y @ _lattice_phases(self.grid_ref.times, self.freq_centers)
            return ndft_direct(self.grid_ref, y, self.freq_centers)
        return _gridded(self, y)


def _is_uniform(f: np.ndarray) -> bool:
    if f.size < 3:
        return f.size == 2 and f[1] > f[0]
    d = np.diff(f)
    step = (f[-1] - f[0]) / (f.size - 1)
    return bool(step > 0 and np.all(np.abs(d - step) <= _UNIFORM_RTOL * step))


def _lattice_phases(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    # exp(-j 2 pi f_i t) on a uniform lattice by repeated multiplication;
    # rounding grows like i * eps, far below any admissible epsilon
    z = np.empty((t.size, f.size), dtype=complex)
    z[:, 0] = np.exp(-2j * np.pi * f[0] * t)
    if f.size > 1:
        z[:, 1:] = np.exp(-2j * np.pi * ((f[-1] - f[0]) / (f.size - 1)) * t)[:, None]
    return np.cumprod(z, axis=1)


def _gridded(plan: NufftPlan, y: np.ndarray) -> np.ndarray:
    squeeze = y.ndim == 1
    Y = np.atleast_2d(y) * plan._pre
    Mr = plan.n_grid
    out = np.empty((Y.shape[0], plan.n_freqs), dtype=complex)
    for b, row in enumerate(Y):
        contrib = (row[:, None] * plan._weights).ravel()
        grid = np.bincount(plan._idx, weights=contrib.real, minlength=Mr) + 1j * np.bincount(
            plan._idx, weights=contrib.imag, minlength=Mr)
        spec = np.fft.fft(grid)
        out[b] = spec[plan._modes] * plan._deconv
    return out[0] if squeeze else out


def ndft_direct(grid: SamplingGrid, weighted_values, freq_centers) -> np.ndarray:
    """``sum_n y_n exp(-j 2 pi f t_n)`` for every ``f`` in ``freq_centers``.

    ``weighted_values`` may be ``(N,)`` or a stack ``(B, N)``.
    """
    y = np.asarray(weighted_values)
    f = np.atleast_1d(np.asarray(freq_centers, dtype=float))
    if y.shape[-1] != grid.n_samples:
        raise PlanMismatch(f"expected {grid.n_samples} values, got {y.shape[-1]}")
    phase = np.exp(-2j * np.pi * np.outer(grid.times, f))
    return y @ phase


def nufft_fast(plan: NufftPlan, weighted_values) -> np.ndarray:
    """Execute ``plan`` on ``weighted_values``; see ``NufftPlan.execute``."""
    return plan.execute(weighted_values)


def eigencoefficients(tapers, series, plan: NufftPlan) -> np.ndarray:
    """``J_k(A_i)``: transforms of ``w_k(t_n) x(t_n)``, shape ``(K, I)``."""
    if tapers.grid_ref is not series.grid and not np.array_equal(
            tapers.grid_ref.times, series.grid.times):
        raise PlanMismatch("tapers and series live on different grids")
    if plan.grid_ref is not series.grid and not np.array_equal(
            plan.grid_ref.times, series.grid.times):
        raise PlanMismatch("plan and series live on different grids")
    return plan.execute(tapers.weights * series.values[None, :])
