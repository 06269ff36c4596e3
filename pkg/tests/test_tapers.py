import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mtnufft.grid import AnalysisBand, SamplingGrid, SignalBand
from mtnufft.kernels import band_kernel
from mtnufft.simkit import SimConfig, generate_grid
from mtnufft.tapers import (GridContext, default_k, dpss_concentrations, dpss_uniform,
                            gpss_eigenvalues, gpss_exact, gpss_interpolated,
                            interpolation_knots, rb_normalize, taper_diagnostics)

SB = SignalBand(0.5)
UNIFORM = SamplingGrid(np.arange(1.0, 51.0))


def align(a, b):
    """Rotate rows of ``a`` onto ``b`` by a unimodular factor."""
    ph = np.sum(a.conj() * b, axis=1)
    return a * (ph / np.abs(ph))[:, None]


def test_dpss_concentrations_and_parity():
    v, conc = dpss_uniform(50, 2.5, 4)
    assert np.all(conc > 0.9) and conc[0] > 0.999
    np.testing.assert_allclose(v @ v.T, np.eye(4), atol=1e-10)
    np.testing.assert_allclose(v[0], v[0][::-1], atol=1e-10)
    np.testing.assert_allclose(v[1], -v[1][::-1], atol=1e-10)
    # quadratic-form oracle for the concentrations
    t = np.arange(50.0)
    R = band_kernel(SamplingGrid(t), 0.05)
    np.testing.assert_allclose(conc, np.einsum("kn,nm,km->k", v, R, v), atol=1e-12)


def test_dpss_rejects_and_warns():
    with pytest.raises(ValueError):
        dpss_uniform(5, 1.0, 6)
    with pytest.raises(ValueError):
        dpss_uniform(10, 6.0, 2)
    with pytest.warns(UserWarning):
        dpss_uniform(50, 2.5, 6)


def test_default_k():
    assert default_k(2.5) == 4 and default_k(3.5) == 6 and default_k(0.2) == 1


def test_gpss_exact_equals_dpss_on_uniform_grid():
    ts = gpss_exact(UNIFORM, SB, AnalysisBand(0.0, 0.05), 4)
    v, conc = dpss_uniform(50, 2.5, 4)
    w = ts.weights.real / math.sqrt(0.1)
    assert np.max(np.abs(align(w, v) - v)) <= 1e-6
    np.testing.assert_allclose(ts.eigenvalues, conc, atol=1e-6)


def test_gpss_shift_consistency_on_uniform_grid():
    lam0 = gpss_eigenvalues(UNIFORM, SB, AnalysisBand(0.0, 0.05), 4)
    for fc in (0.1, 0.23, 0.4):
        lam = gpss_eigenvalues(UNIFORM, SB, AnalysisBand(fc, 0.05), 4)
        np.testing.assert_allclose(lam, lam0, atol=1e-8)


def test_gpss_requires_band_inside_signal_band():
    with pytest.raises(ValueError):
        gpss_exact(UNIFORM, SB, AnalysisBand(0.48, 0.05), 4)


def test_gpss_eigenvalues_on_paper_grids(paper_grids):
    for g in paper_grids.values():
        for fc in (0.0, 0.2, 0.45):
            ts = gpss_exact(g, SB, AnalysisBand(fc, 0.05), 4)
            assert np.all((ts.eigenvalues >= 0) & (ts.eigenvalues <= 1))
            assert np.all(np.diff(ts.eigenvalues) <= 0)


def quad_forms(ts, ctx):
    w = ts.weights
    return np.real(w.conj() @ ctx.rb @ w.T)


@pytest.mark.parametrize("scheme", ["uniform", "jitter", "missing", "arithmetic"])
def test_normalization_invariant(paper_grids, scheme):
    g = paper_grids[scheme]
    ctx = GridContext(g, SB)
    for ts in (gpss_exact(g, SB, AnalysisBand(0.2, 0.05), 4, context=ctx),
               gpss_interpolated(g, SB, 0.05, 4, context=ctx)):
        np.testing.assert_allclose(np.diag(quad_forms(ts, ctx)) / 0.1, 1.0, atol=1e-8)


@pytest.mark.parametrize("scheme", ["uniform", "jitter", "missing", "arithmetic"])
def test_exact_cross_orthogonality(paper_grids, scheme):
    g = paper_grids[scheme]
    ctx = GridContext(g, SB)
    G = quad_forms(gpss_exact(g, SB, AnalysisBand(0.3, 0.05), 4, context=ctx), ctx)
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() <= 1e-8 * 0.1


def test_interpolated_is_identity_on_uniform_grid():
    ts = gpss_interpolated(UNIFORM, SB, 0.05, 4)
    v, _ = dpss_uniform(50, 2.5, 4)
    expected = rb_normalize(v, band_kernel(UNIFORM, 0.5), 0.05)
    assert np.max(np.abs(ts.weights - expected)) <= 1e-10
    assert ts.eigenvalues is None and not np.iscomplexobj(ts.weights)


def test_interpolated_identity_on_shifted_scaled_uniform_grid():
    g = SamplingGrid(100.0 + 0.25 * np.arange(40))
    sb = SignalBand(2.0)
    ts = gpss_interpolated(g, sb, 0.2, 3)
    v, _ = dpss_uniform(40, 0.2 * 40 * 0.25, 3)
    np.testing.assert_allclose(ts.weights, rb_normalize(v, band_kernel(g, 2.0), 0.2),
                               atol=1e-10)


def test_interpolation_knots_span_samples(paper_grids):
    for g in paper_grids.values():
        k = interpolation_knots(g)
        assert k[0] == g.times[0] and math.isclose(k[-1], g.times[-1], rel_tol=1e-14)


def test_interpolated_rejects():
    with pytest.raises(ValueError):
        gpss_interpolated(SamplingGrid(np.arange(6.0)), SB, 0.05)
    with pytest.raises(ValueError):
        gpss_interpolated(UNIFORM, SB, 0.6)
    with pytest.warns(UserWarning):
        gpss_interpolated(UNIFORM, SB, 0.05, 6)


def _cosines(sigma, seed):
    g = generate_grid(SimConfig("jitter", 50, jitter_sigma=sigma, seed=seed))
    ctx = GridContext(g, SB)
    a = gpss_interpolated(g, SB, 0.05, 4, context=ctx).weights
    b = gpss_exact(g, SB, AnalysisBand(0.0, 0.05), 4, context=ctx).weights.real
    return np.abs(np.sum(a * b, 1)) / np.linalg.norm(a, axis=1) / np.linalg.norm(b, axis=1)


@pytest.mark.xfail(strict=True, reason="measured cosines 0.046, 0.039, 0.916, 0.991 at "
                   "sigma=0.1 seed 0: the top exact eigenvalues are nearly degenerate, so "
                   "the exact tapers rotate inside their subspace")
def test_interpolated_close_to_exact_on_jitter_grid():
    assert np.all(_cosines(0.1, 0) >= 0.99)


def test_interpolated_quality_monotone_in_jitter():
    means = np.array([np.mean([_cosines(s, seed) for seed in range(20)], axis=0)
                      for s in (0.2, 0.1, 0.05, 0.01)])
    assert np.all(np.diff(means, axis=0) >= 0)


def test_diagnostics_exact_gpss(paper_grids):
    for g in paper_grids.values():
        ctx = GridContext(g, SB)
        ts = gpss_exact(g, SB, AnalysisBand(0.25, 0.05), 4, context=ctx)
        d = taper_diagnostics(ts, context=ctx)
        assert d.variance_bound_factor == pytest.approx(0.1**2 / 4, rel=1e-8)
        expected_b = 0.1 / 4 * np.sum(1 - ts.eigenvalues)
        assert d.bias_bound_factor == pytest.approx(expected_b, rel=1e-8, abs=1e-15)
        assert d.max_leakage_db == pytest.approx(10 * math.log10(1 - ts.eigenvalues[-1]))


def test_diagnostics_full_band_has_no_bias():
    g = generate_grid(SimConfig("jitter", 30, jitter_sigma=0.1, seed=4))
    ts = gpss_exact(g, SB, AnalysisBand(0.0, 0.5), 3)
    assert taper_diagnostics(ts).bias_bound_factor < 1e-12


def test_diagnostics_uniform_leakage_matches_dpss():
    _, conc = dpss_uniform(50, 2.5, 4)
    d = taper_diagnostics(gpss_interpolated(UNIFORM, SB, 0.05, 4))
    assert d.max_leakage_db == pytest.approx(10 * math.log10(1 - conc[-1]), abs=1e-6)
    assert d.variance_bound_factor > 0 and d.bias_bound_factor >= 0


@given(n=st.integers(8, 200), tw=st.floats(1.0, 4.0))
def test_dpss_concentration_oracle_property(n, tw):
    if tw >= n / 2:
        return
    k = max(1, min(n, int(2 * tw) - 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v, conc = dpss_uniform(n, tw, k)
    R = band_kernel(SamplingGrid(np.arange(float(n))), tw / n)
    np.testing.assert_allclose(conc, np.einsum("kn,nm,km->k", v, R, v), atol=1e-10)
    assert np.all(np.diff(conc) <= 1e-12)


def test_dpss_concentrations_function():
    v = np.ones((1, 16)) / 4
    c = dpss_concentrations(v, 0.5)
    assert c[0] == pytest.approx(1.0)
