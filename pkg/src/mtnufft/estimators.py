"""Spectrum estimators: MTNUFFT, Bronez GPSS (fixed and adaptive) and a baseline.

Each estimator splits into a grid-bound operator, which holds everything that
depends only on the sample times (tapers, transform plans), and its
application to data. Monte Carlo code builds the operator once per grid and
applies it to many realizations; the ``estimate_*`` functions do both in one
call.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import SpectralError
from .grid import AnalysisBand, BandPlan, SamplingGrid, SignalBand, SignalSeries
from .nufft import NufftPlan, ndft_direct
from .tapers import GridContext, default_k, gpss_exact, gpss_interpolated

__all__ = [
    "METHODS",
    "SpectrumEstimate",
    "SpectralOperator",
    "mtnufft_operator",
    "bg_fixed_operator",
    "bg_adaptive_operator",
    "baseline_operator",
    "build_operator",
    "estimate_mtnufft",
    "estimate_bg_fixed",
    "estimate_bg_adaptive",
    "estimate_baseline",
]

log = logging.getLogger(__name__)

METHODS = ("mtnufft", "mtnufft0", "bg_fixed", "bg_adaptive", "baseline")


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """Per-band power with the taper count and half-width actually used.

    Bands whose taper construction failed hold ``nan`` and a ``failed:...``
    flag.
    """

    plan: BandPlan
    power: np.ndarray
    method: str
    k_used: np.ndarray
    f_w_used: np.ndarray
    flags: tuple[tuple[str, ...], ...]

    @property
    def f_centers(self) -> np.ndarray:
        return self.plan.centers

    @property
    def power_db(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return 10 * np.log10(self.power)

    @property
    def failed(self) -> np.ndarray:
        return np.array([any(f.startswith("failed") for f in fl) for fl in self.flags])

    def flag_strings(self) -> list[str]:
        return ["|".join(fl) if fl else "ok" for fl in self.flags]


class SpectralOperator:
    """Data-independent part of an estimator on a fixed grid."""

    def __init__(self, method, grid, plan, k_used, f_w_used, flags):
        self.method = method
        self.grid = grid
        self.plan = plan
        self.k_used = np.asarray(k_used, dtype=int)
        self.f_w_used = np.asarray(f_w_used, dtype=float)
        self.flags = tuple(tuple(f) for f in flags)

    def apply(self, values) -> np.ndarray:
        """Band powers for ``(N,)`` values, or ``(M, I)`` powers for ``(M, N)``."""
        raise NotImplementedError

    def estimate(self, series: SignalSeries) -> SpectrumEstimate:
        if series.grid is not self.grid and not np.array_equal(
                series.grid.times, self.grid.times):
            raise ValueError("series grid differs from the operator grid")
        return SpectrumEstimate(self.plan, self.apply(series.values), self.method,
                                self.k_used, self.f_w_used, self.flags)


def _plan_flags(plan: BandPlan) -> list[list[str]]:
    return [["boundary"] if f else [] for f in plan.flagged]


class ShiftedTaperOperator(SpectralOperator):
    """One real taper set shifted to every band through a Fourier transform."""

    def __init__(self, method, tapers, plan: BandPlan, nufft: NufftPlan):
        K = tapers.k_tapers
        super().__init__(method, tapers.grid_ref, plan, [K] * len(plan),
                         [plan.half_width] * len(plan), _plan_flags(plan))
        self.tapers = tapers
        self.nufft = nufft

    def eigencoefficients(self, values) -> np.ndarray:
        x = np.asarray(values)
        w = self.tapers.weights
        if x.ndim == 1:
            return self.nufft.execute(w * x[None, :])
        M, N = x.shape
        J = self.nufft.execute((w[None, :, :] * x[:, None, :]).reshape(-1, N))
        return J.reshape(M, w.shape[0], -1)

    def apply(self, values) -> np.ndarray:
        J = self.eigencoefficients(values)
        return np.mean(np.abs(J) ** 2, axis=-2)


class TaperBankOperator(SpectralOperator):
    """Separate taper set per band; eigencoefficients by inner products."""

    def __init__(self, method, grid, plan, bank, k_used, f_w_used, flags):
        super().__init__(method, grid, plan, k_used, f_w_used, flags)
        self.bank = bank

    def apply(self, values) -> np.ndarray:
        x = np.asarray(values)
        X = np.atleast_2d(x)
        out = np.full((X.shape[0], len(self.bank)), np.nan)
        for i, w in enumerate(self.bank):
            if w is None:
                continue
            J = X @ w.conj().T
            out[:, i] = np.mean(np.abs(J) ** 2, axis=1)
        return out[0] if x.ndim == 1 else out


def mtnufft_operator(grid: SamplingGrid, signal_band: SignalBand, plan: BandPlan,
                     k_tapers: int | None = None, epsilon: float = 1e-8,
                     taper_mode: str = "interpolated", nufft_path: str = "auto",
                     context: GridContext | None = None) -> ShiftedTaperOperator:
    """Nominal-band tapers built once, shifted to every band center.

    ``taper_mode="interpolated"`` uses spline-interpolated DPSS;
    ``"exact_nominal"`` solves the nominal-band GEP instead.
    """
    f_w = plan.half_width
    ctx = context or GridContext(grid, signal_band)
    if taper_mode == "interpolated":
        tapers = gpss_interpolated(grid, signal_band, f_w, k_tapers, context=ctx)
        method = "mtnufft"
    elif taper_mode == "exact_nominal":
        if k_tapers is None:
            k_tapers = default_k(f_w * grid.span * grid.n_samples / (grid.n_samples - 1))
        tapers = gpss_exact(grid, signal_band, AnalysisBand(0.0, f_w), k_tapers, context=ctx)
        tapers = _real_if_close(tapers)
        method = "mtnufft0"
    else:
        raise ValueError(f"unknown taper_mode {taper_mode!r}")
    nufft = NufftPlan(grid, plan.centers, epsilon, path=nufft_path)
    return ShiftedTaperOperator(method, tapers, plan, nufft)


def _real_if_close(tapers):
    w = tapers.weights
    if np.iscomplexobj(w) and np.max(np.abs(w.imag)) <= 1e-12 * np.max(np.abs(w)):
        from dataclasses import replace
        return replace(tapers, weights=np.ascontiguousarray(w.real))
    return tapers


def _map(fn, items, max_workers):
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def bg_fixed_operator(grid: SamplingGrid, signal_band: SignalBand, plan: BandPlan,
                      k_tapers: int | None = None, max_workers: int | None = None,
                      context: GridContext | None = None) -> TaperBankOperator:
    """Exact GPSS tapers solved independently at every band.

    Bands reaching past ``f_max`` are clipped to the signal band and flagged
    ``clipped``; their ``f_w_used`` is the clipped half-width.
    """
    ctx = context or GridContext(grid, signal_band)
    if k_tapers is None:
        k_tapers = default_k(plan.half_width * grid.span * grid.n_samples / (grid.n_samples - 1))
    base_flags = _plan_flags(plan)

    def solve(i):
        flags = list(base_flags[i])
        nominal = AnalysisBand(float(plan.centers[i]), plan.half_width)
        band = nominal.clipped_to(signal_band)
        if band is not nominal:
            flags.append("clipped")
        try:
            ts = gpss_exact(grid, signal_band, band, k_tapers, context=ctx)
        except SpectralError as err:
            log.warning("band %d (f_c=%g) failed: %s", i, nominal.f_center, err)
            return None, k_tapers, band.half_width, flags + [f"failed:{type(err).__name__}"]
        return ts.weights, k_tapers, band.half_width, flags

    ctx.metric  # factor once before any worker threads start
    results = _map(solve, range(len(plan)), max_workers)
    bank, ks, fws, flags = zip(*results)
    return TaperBankOperator("bg_fixed", grid, plan, list(bank), ks, fws, flags)


def _leakage_db(lam: float) -> float:
    leak = 1.0 - lam
    return 10 * math.log10(leak) if leak > 0 else -math.inf


def bg_adaptive_operator(grid: SamplingGrid, signal_band: SignalBand, plan: BandPlan,
                         k_init: int = 4, k_max: int = 8, f_w_init: float | None = None,
                         f_w_step: float | None = None, leakage_db: float = -30.0,
                         max_workers: int | None = None,
                         context: GridContext | None = None) -> TaperBankOperator:
    """Exact GPSS with the number of tapers and half-width chosen per band.

    At each half-width (starting at ``f_w_init`` and growing by ``f_w_step``
    up to ``f_max``) the taper count runs from ``k_init`` to ``k_max``; the
    first ``(K, f_w)`` whose worst taper leaks less than ``leakage_db``
    (``10 log10(1 - lam_K)``) is used. If none qualifies, ``k_max`` at the
    last half-width is used.
    """
    f_max = signal_band.f_max
    if f_w_init is None:
        f_w_init = plan.half_width
    if f_w_step is None:
        f_w_step = 0.01 * (f_max / 0.5)
    if not 1 <= k_init <= k_max <= grid.n_samples:
        raise ValueError("need 1 <= k_init <= k_max <= N")
    if not 0 < f_w_init <= f_max:
        raise ValueError("f_w_init must lie in (0, f_max]")
    if f_w_step <= 0:
        raise ValueError("f_w_step must be positive")
    ctx = context or GridContext(grid, signal_band)
    n_steps = int(math.floor((f_max - f_w_init) / f_w_step + 1e-9))
    widths = [f_w_init + j * f_w_step for j in range(n_steps + 1)]
    if widths[-1] < f_max * (1 - 1e-12):
        widths.append(f_max)
    base_flags = _plan_flags(plan)

    def solve(i):
        flags = list(base_flags[i])
        fc = float(plan.centers[i])
        ts = band = None
        for fw in widths:
            band = AnalysisBand(fc, fw).clipped_to(signal_band)
            try:
                ts = gpss_exact(grid, signal_band, band, k_max, context=ctx)
            except SpectralError as err:
                log.warning("band %d (f_c=%g, f_w=%g) failed: %s", i, fc, fw, err)
                return None, k_max, band.half_width, flags + [f"failed:{type(err).__name__}"]
            for K in range(k_init, k_max + 1):
                if _leakage_db(ts.eigenvalues[K - 1]) < leakage_db:
                    if band.half_width < fw:
                        flags.append("clipped")
                    return ts.weights[:K], K, band.half_width, flags
        flags.append("leakage_unmet")
        return ts.weights, k_max, band.half_width, flags

    ctx.metric
    results = _map(solve, range(len(plan)), max_workers)
    bank, ks, fws, flags = zip(*results)
    return TaperBankOperator("bg_adaptive", grid, plan, list(bank), ks, fws, flags)


class BaselineOperator(SpectralOperator):
    def __init__(self, grid, plan, weight):
        super().__init__("baseline", grid, plan, [1] * len(plan),
                         [plan.half_width] * len(plan), _plan_flags(plan))
        self.weight = weight

    def apply(self, values) -> np.ndarray:
        J = ndft_direct(self.grid, self.weight * np.asarray(values), self.plan.centers)
        return np.abs(J) ** 2


def baseline_operator(grid: SamplingGrid, plan: BandPlan,
                      signal_band: SignalBand | None = None,
                      context: GridContext | None = None) -> BaselineOperator:
    """Single rectangular taper, scaled so that ``w* R(B) w = 2 f_w``."""
    sb = signal_band or plan.signal_band
    ctx = context or GridContext(grid, sb)
    ones = np.ones(grid.n_samples)
    q = float(ones @ ctx.rb @ ones)
    return BaselineOperator(grid, plan, math.sqrt(2 * plan.half_width / q))


def build_operator(method: str, grid: SamplingGrid, signal_band: SignalBand,
                   plan: BandPlan, **options) -> SpectralOperator:
    """Construct the operator for one of ``METHODS`` by name."""
    if method == "mtnufft":
        return mtnufft_operator(grid, signal_band, plan, taper_mode="interpolated", **options)
    if method == "mtnufft0":
        return mtnufft_operator(grid, signal_band, plan, taper_mode="exact_nominal", **options)
    if method == "bg_fixed":
        return bg_fixed_operator(grid, signal_band, plan, **options)
    if method == "bg_adaptive":
        return bg_adaptive_operator(grid, signal_band, plan, **options)
    if method == "baseline":
        return baseline_operator(grid, plan, signal_band, **options)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def _check_plan(plan: BandPlan, signal_band: SignalBand):
    if plan.f_max > signal_band.f_max * (1 + 1e-12):
        raise ValueError("band plan extends beyond the signal band")


def estimate_mtnufft(series: SignalSeries, signal_band: SignalBand, plan: BandPlan,
                     k_tapers: int | None = None, epsilon: float = 1e-8,
                     taper_mode: str = "interpolated",
                     nufft_path: str = "auto") -> SpectrumEstimate:
    """Fast multitaper estimate: nominal tapers, Fourier-shifted eigencoefficients."""
    _check_plan(plan, signal_band)
    op = mtnufft_operator(series.grid, signal_band, plan, k_tapers, epsilon,
                          taper_mode, nufft_path)
    return op.estimate(series)


def estimate_bg_fixed(series: SignalSeries, signal_band: SignalBand, plan: BandPlan,
                      k_tapers: int | None = None,
                      max_workers: int | None = None) -> SpectrumEstimate:
    """Optimal estimate with per-band GPSS tapers at the plan's half-width."""
    _check_plan(plan, signal_band)
    return bg_fixed_operator(series.grid, signal_band, plan, k_tapers,
                             max_workers).estimate(series)


def estimate_bg_adaptive(series: SignalSeries, signal_band: SignalBand, plan: BandPlan,
                         k_init: int = 4, k_max: int = 8, f_w_init: float | None = None,
                         f_w_step: float | None = None, leakage_db: float = -30.0,
                         max_workers: int | None = None) -> SpectrumEstimate:
    """Optimal estimate with per-band adaptive taper count and half-width."""
    _check_plan(plan, signal_band)
    return bg_adaptive_operator(series.grid, signal_band, plan, k_init, k_max, f_w_init,
                                f_w_step, leakage_db, max_workers).estimate(series)


def estimate_baseline(series: SignalSeries, plan: BandPlan,
                      signal_band: SignalBand | None = None) -> SpectrumEstimate:
    """Single rectangular-taper power at every band center."""
    return baseline_operator(series.grid, plan, signal_band).estimate(series)
