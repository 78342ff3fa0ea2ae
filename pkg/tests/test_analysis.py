# tests/test_analysis.py
import math
from dataclasses import replace

import numpy as np
import pytest
from pydantic import ValidationError

from logic_blocks.analysis import (
    CurveKind,
    CurveSeries,
    asvep_dmin_bound,
    asvep_union_bound,
    bound_curves,
    gaussian_capacity,
    mi_avg_approx,
    mi_exact_mc,
    mi_lower_bound_c1,
    mi_lower_bound_exact_h,
    pair_distance_table,
    psvep_exact,
    psvep_quadrature,
    snr_at_level,
    wilson_interval,
)
from logic_blocks.channel import RngStream, sample_channel, snr_to_noise_var
from logic_blocks.codebook import build_slm_bw, build_slm_cb, normalize, select_rate
from logic_blocks.errors import DomainError


@pytest.fixture(scope="module")
def cb22():
    return normalize(build_slm_cb(2, 2))


def test_pair_table_of_small_grid():
    table = pair_distance_table(build_slm_cb(1, 2))
    assert table.size == 9
    assert table.pair_count == 72
    assert table.distances.tolist() == [1, 2, 4, 5, 8]
    assert np.all(table.multiplicity % 2 == 0)


def test_pair_table_minimum_respects_lattice(cb22):
    table = pair_distance_table(cb22)
    assert table.pair_count == 81 * 80
    assert table.min_scaled == pytest.approx(cb22.scale ** 2 * float(cb22.lattice.d2min))


def test_exact_mi_limits(cb22):
    h = sample_channel(2, 4, RngStream(1))
    high = mi_exact_mc(cb22, h, snr_to_noise_var(60.0, 2.0), 50, RngStream(2))
    low = mi_exact_mc(cb22, h, snr_to_noise_var(-30.0, 2.0), 50, RngStream(3))
    assert high == pytest.approx(math.log2(81), abs=1e-3)
    assert 0.0 <= low < 0.05


def test_approx_mi_limits(cb22):
    table = pair_distance_table(cb22)
    assert mi_avg_approx(table, 4, 1e-8) == pytest.approx(math.log2(81), abs=1e-6)
    assert mi_avg_approx(table, 4, 1e8) == pytest.approx(0.0, abs=1e-6)


def test_approx_tracks_channel_averaged_exact_mi(cb22):
    table = pair_distance_table(cb22)
    for snr in (0.0, 10.0, 20.0):
        noise_var = snr_to_noise_var(snr, 2.0)
        exact = np.mean(
            [
                mi_exact_mc(cb22, sample_channel(2, 4, RngStream(7, (0, c))), noise_var, 100, RngStream(7, (1, c)))
                for c in range(100)
            ]
        )
        assert abs(exact - mi_avg_approx(table, 4, noise_var)) < 0.3


def test_c1_lower_bound(cb22):
    table = pair_distance_table(cb22)
    d2 = table.min_scaled
    for snr in (-5.0, 5.0, 15.0, 25.0):
        noise_var = snr_to_noise_var(snr, 2.0)
        assert mi_lower_bound_c1(table.size, d2, 4, noise_var) <= mi_avg_approx(table, 4, noise_var) + 1e-12
    assert mi_lower_bound_c1(1, 1.0, 4, 0.1) == 0.0


def test_fixed_channel_lower_bound_is_monotone(cb22):
    h = sample_channel(2, 2, RngStream(4))
    values = [mi_lower_bound_exact_h(cb22, h, snr_to_noise_var(s, 2.0)) for s in (0.0, 10.0, 20.0, 30.0)]
    assert values == sorted(values)
    assert all(0.0 <= v <= math.log2(81) for v in values)


def test_fixed_channel_lower_bound_sits_below_exact_mi(cb22):
    h = sample_channel(2, 4, RngStream(1))
    for p, snr in enumerate((-5.0, 5.0, 15.0, 25.0)):
        noise_var = snr_to_noise_var(snr, 2.0)
        exact = mi_exact_mc(cb22, h, noise_var, 200, RngStream(5, (p,)))
        assert mi_lower_bound_exact_h(cb22, h, noise_var) <= exact + 0.05, snr
    noise_var = snr_to_noise_var(60.0, 2.0)
    gap = mi_exact_mc(cb22, h, noise_var, 50, RngStream(2)) - mi_lower_bound_exact_h(cb22, h, noise_var)
    assert gap == pytest.approx(4 * math.log2(math.e / 2), abs=0.01)


def test_gaussian_capacity_of_identity_channel():
    assert gaussian_capacity(np.eye(2, dtype=complex), 1.0, 2.0) == pytest.approx(2.0)


def test_pairwise_error_limits():
    assert psvep_exact(2.0, 2, 1e9) == pytest.approx(0.5, abs=1e-4)
    assert psvep_exact(2.0, 2, 1e-9) < 1e-15
    assert psvep_exact(2.0, 2, 0.0) == 0.0
    with pytest.raises(DomainError):
        psvep_exact(0.0, 2, 1.0)


@pytest.mark.parametrize("d2,n_r,noise_var", [(0.5, 1, 0.1), (2.0, 2, 0.3), (1.0, 4, 0.05), (0.2, 8, 1.0)])
def test_closed_form_matches_quadrature(d2, n_r, noise_var):
    assert psvep_exact(d2, n_r, noise_var) == pytest.approx(psvep_quadrature(d2, n_r, noise_var), rel=1e-6, abs=1e-14)


def test_bound_ordering(cb22):
    table = pair_distance_table(cb22)
    for snr in (0.0, 10.0, 20.0, 30.0):
        noise_var = snr_to_noise_var(snr, 2.0)
        exact = asvep_union_bound(table, 4, noise_var, "exact_pairwise")
        chernoff = asvep_union_bound(table, 4, noise_var, "chernoff")
        dmin = asvep_dmin_bound(table.size, table.min_scaled, 4, noise_var)
        assert exact <= chernoff <= dmin


def test_union_bound_is_tight_for_two_points():
    cb = normalize(select_rate(build_slm_bw(2, 6), size=2))
    table = pair_distance_table(cb)
    noise_var = 0.4
    assert asvep_union_bound(table, 2, noise_var, "exact_pairwise") == pytest.approx(
        psvep_exact(table.min_scaled, 2, noise_var)
    )


def test_single_point_codebook_has_no_errors():
    cb = replace(normalize(select_rate(build_slm_bw(2, 6), size=2)), n_selected=1)
    assert asvep_union_bound(cb, 2, 0.1) == 0.0
    assert asvep_dmin_bound(1, 1.0, 2, 0.1) == 0.0


def test_barnes_wall_beats_cubic_at_equal_rate():
    cubic = normalize(select_rate(build_slm_cb(2, 4), k=9))
    bw = normalize(select_rate(build_slm_bw(2, 14), k=9))
    t_cubic, t_bw = pair_distance_table(cubic), pair_distance_table(bw)
    assert t_bw.min_scaled > t_cubic.min_scaled
    noise_var = snr_to_noise_var(40.0, 2.0)
    assert asvep_union_bound(t_bw, 8, noise_var) < asvep_union_bound(t_cubic, 8, noise_var)


def test_bound_curves_cover_every_closed_form(cb22):
    curves = bound_curves(cb22, 4, [0.0, 10.0], "SLM-CB")
    assert [c.kind for c in curves] == [
        CurveKind.MI_APPROX,
        CurveKind.MI_LB,
        CurveKind.ASVEP_EXACT_UB,
        CurveKind.ASVEP_CHERNOFF_UB,
        CurveKind.ASVEP_LB_FORM,
    ]
    assert all(len(c.value) == 2 for c in curves)


def test_curve_series_validation():
    curve = CurveSeries(snr_db=[0, 5], value=[0.1, 0.01], label="x", kind=CurveKind.SVER_SIM, trials=[10, 20])
    assert curve.points()[1] == {"snr_db": 5.0, "value": 0.01, "ci_low": None, "ci_high": None, "trials": 20}
    with pytest.raises(ValidationError):
        CurveSeries(snr_db=[0, 5], value=[0.1], label="x", kind=CurveKind.SVER_SIM)
    with pytest.raises(ValidationError):
        CurveSeries(snr_db=[5, 0], value=[0.1, 0.2], label="x", kind=CurveKind.SVER_SIM)


def test_wilson_interval():
    low, high = wilson_interval(0, 100)
    assert low == 0.0 and 0.0 < high < 0.05
    low, high = wilson_interval(50, 100)
    assert low < 0.5 < high
    assert 0.5 - low == pytest.approx(high - 0.5)


def test_snr_at_level():
    grid, values = [0.0, 10.0, 20.0], [1e-1, 1e-2, 1e-3]
    assert snr_at_level(grid, values, 1e-2) == pytest.approx(10.0)
    assert snr_at_level(grid, values, 10 ** -2.5) == pytest.approx(15.0)
    assert snr_at_level(grid, values, 1e-5) is None
