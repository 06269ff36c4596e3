import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mtnufft.grid import (AnalysisBand, BandPlan, SamplingGrid, SignalBand, SignalSeries,
                          boundary_flag, make_band_plan)


def test_grid_mean_dt_definition():
    g = SamplingGrid(np.arange(1.0, 51.0))
    assert g.n_samples == 50
    assert g.mean_dt == 49 / 50
    assert g.is_uniform()


@pytest.mark.parametrize("times", [[1.0], [1.0, 1.0], [2.0, 1.0], [0.0, np.nan], [[0.0, 1.0]]])
def test_grid_rejects_bad_times(times):
    with pytest.raises(ValueError):
        SamplingGrid(times)


def test_grid_is_immutable():
    g = SamplingGrid([0.0, 1.0, 3.0])
    with pytest.raises(ValueError):
        g.times[0] = 5.0


def test_series_length_must_match():
    g = SamplingGrid([0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        SignalSeries(g, [1.0, 2.0])
    s = SignalSeries.from_arrays([0.0, 1.0], [1 + 1j, 2.0])
    assert np.iscomplexobj(s.values)


def test_bands():
    with pytest.raises(ValueError):
        SignalBand(0.0)
    with pytest.raises(ValueError):
        AnalysisBand(0.1, 0.0)
    b = AnalysisBand(0.47, 0.05)
    assert math.isclose(b.resolution, 0.1)
    c = b.clipped_to(SignalBand(0.5))
    assert math.isclose(c.upper, 0.5) and math.isclose(c.lower, 0.42)
    assert AnalysisBand(0.2, 0.05).clipped_to(SignalBand(0.5)) == AnalysisBand(0.2, 0.05)
    assert SignalBand(0.5).contains(c) and not SignalBand(0.5).contains(b)


def test_plan_paper_example():
    plan = make_band_plan(0.5, 0.05, 0.01)
    assert len(plan) == 51
    np.testing.assert_allclose(plan.centers, np.arange(51) * 0.01, atol=1e-15)
    expected = (plan.centers < 0.1 - 1e-12) | (plan.centers > 0.4 + 1e-12)
    np.testing.assert_array_equal(plan.flagged, expected)
    assert plan.interior.sum() == 31


def test_plan_all_flagged():
    plan = make_band_plan(0.5, 0.25, 0.25)
    assert len(plan) == 3 and plan.flagged.all()


def test_plan_impedance_resolution():
    plan = make_band_plan(12.0, 0.175, 0.05)
    assert len(plan) == 241
    assert math.isclose(plan.bands[0].resolution, 0.35)


def test_plan_defaults():
    plan = make_band_plan(0.5, 0.05)
    assert math.isclose(plan.centers[1], 0.01) and plan.boundary_margin == 0.1


@pytest.mark.parametrize("args", [(0.5, 0.0, 0.01), (0.5, 0.05, -1.0), (-1.0, 0.05, 0.01),
                                  (0.5, 0.3, 0.01), (0.5, 0.05, 0.2)])
def test_plan_rejects(args):
    with pytest.raises(ValueError):
        make_band_plan(*args)


@given(f_max=st.floats(0.1, 100.0), ratio=st.floats(0.01, 0.5), sfrac=st.floats(0.05, 2.0))
def test_plan_count_and_spacing(f_max, ratio, sfrac):
    f_w = ratio * f_max
    spacing = sfrac * f_w
    plan = make_band_plan(f_max, f_w, spacing)
    assert len(plan) == math.floor(f_max / spacing + 1e-9) + 1
    d = np.diff(plan.centers)
    if d.size > 1:
        np.testing.assert_allclose(d[:-1], spacing, rtol=1e-9)
    assert plan.centers[-1] <= f_max
    assert all(b.half_width == f_w for b in plan.bands)


@given(fc=st.floats(0, 1), fmax=st.floats(0.1, 1), margin=st.floats(0, 0.5))
def test_flag_is_pure_predicate(fc, fmax, margin):
    a = boundary_flag(fc, fmax, margin)
    assert a == boundary_flag(fc, fmax, margin)
    if fc >= margin + 1e-9 and fmax - fc >= margin + 1e-9:
        assert not a


def test_plan_rejects_unsorted_centers():
    with pytest.raises(ValueError):
        BandPlan(np.array([0.1, 0.0]), 0.05, 0.5, 0.1)
