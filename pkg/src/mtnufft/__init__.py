"""Multitaper spectral estimation for nonuniformly sampled signals.

The fast estimator builds one set of nominal-band tapers by interpolating
uniform DPSS onto the sample times and reaches every band center with a
nonuniform Fourier transform. The optimal reference estimator solves a
generalized eigenproblem per band.
"""

__version__ = "0.1.0"

from .errors import (ConditioningError, DegenerateTapers, ExtrapolationError, PlanMismatch,
                     SpectralError, SpectralRangeError)
from .grid import (AnalysisBand, BandPlan, SamplingGrid, SignalBand, SignalSeries,
                   make_band_plan)
from .kernels import analysis_band_kernel, band_kernel, shift_phases, signal_band_kernel
from .eig import cubic_spline, generalized_hermitian_eigen, tridiagonal_eigen
from .tapers import (TaperSet, default_k, dpss_uniform, gpss_exact, gpss_interpolated,
                     taper_diagnostics)
from .nufft import NufftPlan, eigencoefficients, ndft_direct, nufft_fast
from .estimators import (SpectrumEstimate, build_operator, estimate_baseline,
                         estimate_bg_adaptive, estimate_bg_fixed, estimate_mtnufft)
from .inference import FTestResult, SuboptimalityReport, f_quantile, f_test, suboptimality
from .simkit import (SimConfig, generate_bandlimited_noise, generate_grid,
                     generate_line_plus_noise, generate_white_noise, paper_config,
                     resample_uniform)
from .bench import ErrorReport, SpeedReport, run_error_analysis, run_speed_analysis

__all__ = [
    "SpectralError", "ConditioningError", "SpectralRangeError", "ExtrapolationError",
    "PlanMismatch", "DegenerateTapers",
    "SamplingGrid", "SignalSeries", "SignalBand", "AnalysisBand", "BandPlan",
    "make_band_plan",
    "band_kernel", "signal_band_kernel", "analysis_band_kernel", "shift_phases",
    "tridiagonal_eigen", "generalized_hermitian_eigen", "cubic_spline",
    "TaperSet", "default_k", "dpss_uniform", "gpss_exact", "gpss_interpolated",
    "taper_diagnostics",
    "NufftPlan", "ndft_direct", "nufft_fast", "eigencoefficients",
    "SpectrumEstimate", "build_operator", "estimate_mtnufft", "estimate_bg_fixed",
    "estimate_bg_adaptive", "estimate_baseline",
    "FTestResult", "SuboptimalityReport", "f_test", "f_quantile", "suboptimality",
    "SimConfig", "paper_config", "generate_grid", "generate_white_noise",
    "generate_bandlimited_noise", "generate_line_plus_noise", "resample_uniform",
    "ErrorReport", "SpeedReport", "run_error_analysis", "run_speed_analysis",
]
