import numpy as np
import pytest

import triwave as tw
from triwave.errors import NoSplitDetected
from triwave.verify import SPLITTING_TEST_RATES, splitting_axis_assignment

TWO_PI = tw.TWO_PI


def small_grid(points=41, span=60.0):
    return tw.DetuningGrid.from_mhz((-span, span), (-span, span), points=points)


def test_grid_validation():
    with pytest.raises(ValueError, match="at least 2"):
        tw.DetuningGrid.from_mhz((-10, 10), (-10, 10), points=(1, 5))
    with pytest.raises(ValueError, match="finite"):
        tw.DetuningGrid((0.0, np.inf, 5), (0.0, 1.0, 5))
    with pytest.raises(ValueError, match="axis_drives"):
        tw.DetuningGrid.from_mhz((-1, 1), (-1, 1), points=3,
                                 axis_drives=("first", "first"))
    g = tw.DetuningGrid.from_mhz((-100, 100), (-50, 50), points=(201, 101))
    assert g.shape == (201, 101)
    assert g.values1()[0] == pytest.approx(-TWO_PI * 100)
    assert g.values2()[-1] == pytest.approx(TWO_PI * 50)


def test_zero_drive_map_is_zero(cp_rates):
    grid = small_grid(points=5)
    emap = tw.run_scan(tw.DriveScheme.from_mhz("A", 0.0, 0.0), grid, cp_rates)
    assert emap.n_missing() == 0
    assert np.array_equal(emap.values, np.zeros((5, 5)))


def test_map_metadata_roundtrip_fields(reference_rates):
    grid = small_grid(points=7)
    template = tw.DriveScheme.from_mhz("B", 40.0, 10.0)
    emap = tw.run_scan(template, grid, reference_rates, verbatim=True)
    m = emap.meta
    assert m["scheme"] == "B"
    assert m["omega_first_MHz"] == pytest.approx(40.0)
    assert m["omega_second_MHz"] == pytest.approx(10.0)
    assert m["verbatim_hamiltonian"] is True
    assert m["rates_MHz"]["gamma32"] == pytest.approx(42.0)
    assert m["grid"]["axis1_MHz"]["points"] == 7
    assert m["rates_cp_valid"] is False
    assert emap.values.shape == grid.shape


def test_scan_cell_values_match_single_point_solver(reference_rates):
    grid = small_grid(points=9, span=40.0)
    template = tw.DriveScheme.from_mhz("C", 20.0, 20.0)
    emap = tw.run_scan(template, grid, reference_rates)
    d1s, d2s = grid.values1(), grid.values2()
    for i in (0, 4, 8):
        for j in (2, 6):
            drive = template.with_detunings(d1s[i], d2s[j])
            rho = tw.steady_state(tw.build_liouvillian(drive, reference_rates),
                                  positivity="ignore")
            nu = 0.5 * reference_rates.Gamma31 * abs(rho[2, 0]) ** 2
            assert emap.values[i, j] == pytest.approx(nu, rel=1e-12)


def test_axis_drive_mapping_swap(reference_rates):
    grid = tw.DetuningGrid.from_mhz((-30, 30), (-30, 30), points=11)
    swapped = tw.DetuningGrid.from_mhz((-30, 30), (-30, 30), points=11,
                                       axis_drives=("second", "first"))
    template = tw.DriveScheme.from_mhz("A", 35.0, 10.0)
    a = tw.run_scan(template, grid, reference_rates)
    b = tw.run_scan(template, swapped, reference_rates)
    assert np.allclose(a.values, b.values.T, rtol=0, atol=1e-15)


def test_scan_values_respect_mixer_ceiling(reference_rates):
    grid = small_grid(points=21, span=100.0)
    for scheme, w in (("A", (50.0, 16.0)), ("B", (40.0, 10.0)), ("C", (20.0, 20.0))):
        template = tw.DriveScheme.from_mhz(scheme, *w)
        emap = tw.run_scan(template, grid, reference_rates)
        assert emap.n_missing() == 0
        limit = emap.meta["photon_rate_limit_per_us"]
        assert np.nanmax(emap.values) <= limit * (1.0 + 1e-9)


def test_degenerate_cells_go_to_error_layer_not_zero():
    rates = tw.RateSet(0, 0, 0, 0, 0, 0)
    grid = small_grid(points=3, span=10.0)
    emap = tw.run_scan(tw.DriveScheme.from_mhz("C", 5.0, 5.0), grid, rates)
    assert emap.n_missing() == 9
    assert np.isnan(emap.values).all()
    assert all("DegenerateSteadyState" in reason for _, _, reason in emap.errors)


def test_map_point_symmetry_scheme_c(reference_rates):
    # nu(d1, d2) = nu(-d1, -d2) for the corrected frame (conjugation symmetry)
    sym_rates = tw.RateSet.from_mhz(10.0, 10.0, 10.0, 10.0, 15.0, 12.0)
    grid = small_grid(points=21, span=80.0)
    for rates in (sym_rates, reference_rates):
        emap = tw.run_scan(tw.DriveScheme.from_mhz("C", 20.0, 20.0), grid, rates)
        v = emap.values
        flipped = v[::-1, ::-1]
        denom = np.maximum(np.abs(v), np.abs(flipped))
        rel = np.abs(v - flipped) / np.where(denom > 0, denom, 1.0)
        assert np.nanmax(rel) <= 1e-8


def test_scheme_b_diagonal_ridge(reference_rates):
    # bright ridge along delta1 - delta2 = const: max over anti-diagonal
    # traversals well above the median, for weak / strong / asymmetric drives
    grid = tw.DetuningGrid.from_mhz((-100, 100), (-100, 100), points=61)
    for w1, w2 in ((10.0, 10.0), (20.0, 20.0), (40.0, 10.0)):
        emap = tw.run_scan(tw.DriveScheme.from_mhz("B", w1, w2), grid,
                           reference_rates)
        v = emap.values
        n = v.shape[0]
        anti_max = max(
            max(v[i, s - i] for i in range(max(0, s - n + 1), min(n, s + 1)))
            for s in range(2 * n - 1)
        )
        assert anti_max > 3.0 * np.median(v)


def test_autler_townes_splitting_and_rotation():
    grid = tw.DetuningGrid.from_mhz((-100, 100), (-100, 100), points=201)
    strong = TWO_PI * 50.0

    emap = tw.run_scan(tw.DriveScheme.from_mhz("A", 50.0, 5.0), grid,
                       SPLITTING_TEST_RATES)
    sep = tw.find_splitting(emap, axis=2)
    assert abs(sep - strong) / strong <= 0.10
    axis, _ = splitting_axis_assignment(emap, strong)
    assert axis == 2

    swapped = tw.run_scan(tw.DriveScheme.from_mhz("A", 5.0, 50.0), grid,
                          SPLITTING_TEST_RATES)
    sep2 = tw.find_splitting(swapped, axis=1)
    assert abs(sep2 - strong) / strong <= 0.10
    axis2, _ = splitting_axis_assignment(swapped, strong)
    assert axis2 == 1
    with pytest.raises(NoSplitDetected):
        tw.find_splitting(swapped, axis=2)


def test_splitting_resolution_invariance():
    # separation moves by at most one grid step when resolution doubles
    seps = {}
    for points in (101, 201):
        grid = tw.DetuningGrid.from_mhz((-100, 100), (-100, 100), points=points)
        emap = tw.run_scan(tw.DriveScheme.from_mhz("A", 50.0, 5.0), grid,
                           SPLITTING_TEST_RATES)
        seps[points] = tw.find_splitting(emap, axis=2)
    coarse_step = TWO_PI * 200.0 / 100
    assert abs(seps[101] - seps[201]) <= coarse_step


def test_no_split_on_single_peaked_weak_map(reference_rates):
    grid = small_grid(points=41, span=60.0)
    emap = tw.run_scan(tw.DriveScheme.from_mhz("C", 1.0, 1.0), grid,
                       reference_rates)
    with pytest.raises(NoSplitDetected):
        tw.find_splitting(emap, axis=2)


def test_parallel_matches_sequential_bitwise(reference_rates):
    grid = small_grid(points=31)
    template = tw.DriveScheme.from_mhz("C", 20.0, 20.0)
    seq = tw.run_scan(template, grid, reference_rates, jobs=1)
    par = tw.run_scan(template, grid, reference_rates, jobs=2)
    again = tw.run_scan(template, grid, reference_rates, jobs=1)
    assert np.array_equal(seq.values, par.values)
    assert np.array_equal(seq.values, again.values)


def test_fast_kernel_matches_checked_scan(reference_rates):
    grid = small_grid(points=15)
    template = tw.DriveScheme.from_mhz("B", 25.0, 15.0)
    checked = tw.run_scan(template, grid, reference_rates)
    fast = tw.scan_photon_rates(template, grid, reference_rates)
    assert np.allclose(checked.values, fast, rtol=0, atol=1e-15)
