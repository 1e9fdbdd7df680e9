import numpy as np
import pytest

import triwave as tw
from triwave.emission import photon_rate_limit
from triwave.steady import steady_state

TWO_PI = tw.TWO_PI


def _full_sigma(drive, rates):
    rho = steady_state(tw.build_liouvillian(drive, rates), positivity="ignore")
    u, l = drive.emission_transition
    return rho[u - 1, l - 1]


def test_ground_state_emits_nothing(reference_rates, scheme_c_drive):
    s = tw.coherent_emission(np.diag([1.0, 0.0, 0.0]), scheme_c_drive,
                             reference_rates)
    assert s.sigma == 0.0
    assert s.photon_rate == 0.0
    assert s.transition == (3, 1)


def test_maximal_coherence_hits_mixer_ceiling(reference_rates):
    # |sigma| = 1/2 (equal superposition of levels 2 and 1) gives Gamma/8
    drive = tw.DriveScheme.from_mhz("A", 1.0, 1.0)
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = rho[1, 1] = 0.5
    rho[0, 1] = rho[1, 0] = 0.5
    s = tw.coherent_emission(rho, drive, reference_rates)
    assert abs(s.sigma) == pytest.approx(0.5)
    assert s.photon_rate == pytest.approx(reference_rates.Gamma21 / 8.0)
    assert s.photon_rate == pytest.approx(photon_rate_limit(reference_rates, drive))


def test_emission_sample_rejects_superunitary_coherence(reference_rates,
                                                        scheme_c_drive):
    rho = np.zeros((3, 3), dtype=complex)
    rho[2, 0] = 0.6
    with pytest.raises(ValueError, match="bound"):
        tw.coherent_emission(rho, scheme_c_drive, reference_rates)


def test_scheme_a_reference_sweep_single_peak_golden(reference_rates):
    # strong 50 MHz drive on 1<->3, 16 MHz on 2<->3, at the reference rates:
    # nu(delta_second) is single-peaked with its maximum on resonance
    # (frozen full-solver values)
    drive = tw.DriveScheme.from_mhz("A", 50.0, 16.0)
    L0, _, L2 = tw.liouvillian_detuning_parts(drive, reference_rates)
    xs = np.linspace(-TWO_PI * 100.0, TWO_PI * 100.0, 201)
    prof = []
    for d2 in xs:
        rho = steady_state(L0 + d2 * L2, positivity="ignore")
        prof.append(0.5 * reference_rates.Gamma21 * abs(rho[1, 0]) ** 2)
    prof = np.array(prof)
    peaks = [j for j in range(1, 200)
             if prof[j] > prof[j - 1] and prof[j] > prof[j + 1]]
    assert len(peaks) == 1
    assert xs[peaks[0]] == pytest.approx(0.0, abs=1e-12)  # delta2* = 0
    assert prof[peaks[0]] == pytest.approx(0.4855323027101131, rel=1e-9)


def test_weak_drive_zero_when_one_drive_off(reference_rates):
    for scheme in "ABC":
        d = tw.DriveScheme.from_mhz(scheme, 0.0, 0.3, 1.0, -2.0)
        assert tw.weak_drive_sigma(d, reference_rates) == 0.0


def test_weak_drive_real_at_zero_detuning(reference_rates):
    for scheme in "ABC":
        d = tw.DriveScheme.from_mhz(scheme, 0.05, 0.05)
        sig = tw.weak_drive_sigma(d, reference_rates)
        assert sig.imag == pytest.approx(0.0, abs=1e-15)
        assert sig != 0.0


def test_weak_drive_factors_right_half_plane(reference_rates, rng):
    for scheme in "ABC":
        for _ in range(20):
            d1, d2 = rng.uniform(-TWO_PI * 100, TWO_PI * 100, 2)
            d = tw.DriveScheme(tw.Scheme(scheme), 1.0, 1.0, d1, d2)
            f = tw.weak_drive_factors(d, reference_rates)
            assert f.lambda_first.real >= 0.0
            assert f.lambda_second.real >= 0.0


def test_weak_drive_matches_full_solver_one_percent(reference_rates):
    # Omega/gamma_min ~ 1e-2 at zero detuning: formula within 1% relative
    g_min = min(reference_rates.gamma21, reference_rates.gamma32,
                reference_rates.gamma31)
    for scheme in "ABC":
        d = tw.DriveScheme(tw.Scheme(scheme), 0.01 * g_min, 0.01 * g_min, 0.0, 0.0)
        full = _full_sigma(d, reference_rates)
        approx = tw.weak_drive_sigma(d, reference_rates)
        assert abs(full - approx) / abs(full) < 0.01


def test_weak_drive_ratio_converges_to_kappa(reference_rates):
    # the fitted prefactor is the frozen one: full/formula -> 1 as Omega -> 0
    g_min = reference_rates.gamma21
    for scheme in "ABC":
        ratios = []
        for eps in (1e-2, 1e-3):
            d = tw.DriveScheme(tw.Scheme(scheme), eps * g_min, eps * g_min, 0.0, 0.0)
            ratios.append(_full_sigma(d, reference_rates)
                          / tw.weak_drive_sigma(d, reference_rates))
        assert abs(abs(ratios[0]) / abs(ratios[1]) - 1.0) < 0.005
        assert abs(ratios[1] - 1.0) < 1e-4


def test_weak_drive_quartic_power_scaling(reference_rates):
    # nu ~ Omega_a^2 Omega_b^2: log-log slope 2 per drive
    g_min = reference_rates.gamma21
    for scheme in "ABC":
        for which in (0, 1):
            nus = []
            for eps in (1e-3, 2e-3):
                w = [1e-3 * g_min, 1e-3 * g_min]
                w[which] = eps * g_min
                d = tw.DriveScheme(tw.Scheme(scheme), w[0], w[1], 0.0, 0.0)
                nus.append(abs(_full_sigma(d, reference_rates)) ** 2)
            slope = np.log(nus[1] / nus[0]) / np.log(2.0)
            assert slope == pytest.approx(2.0, abs=0.02)


@pytest.mark.parametrize("scheme", ["A", "C"])
def test_lorentzian_linewidth(reference_rates, scheme):
    # first drive resonant and weak: nu versus the second detuning is a
    # Lorentzian whose half-width is Re(lambda_second)
    g_min = reference_rates.gamma21
    w = 5e-3 * g_min
    deltas = np.linspace(-TWO_PI * 30.0, TWO_PI * 30.0, 41)
    nus, widths = [], []
    for d2 in deltas:
        d = tw.DriveScheme(tw.Scheme(scheme), w, w, 0.0, d2)
        nus.append(abs(_full_sigma(d, reference_rates)) ** 2)
        widths.append(tw.weak_drive_factors(d, reference_rates).lambda_second.real)
    nus = np.array(nus)
    hw = widths[0]  # constant along the sweep
    lorentz = nus.max() * hw ** 2 / (hw ** 2 + deltas ** 2)
    assert np.abs(nus - lorentz).max() / nus.max() < 0.01


def test_scheme_b_two_path_formula_off_resonance(reference_rates):
    # scheme B mixes two pump orderings; the combined second-order formula
    # tracks the solver across detunings where a single product would not
    g_min = reference_rates.gamma21
    w = 5e-3 * g_min
    for d1_mhz, d2_mhz in [(0.0, 0.0), (10.0, 0.0), (0.0, -15.0), (8.0, 12.0)]:
        d = tw.DriveScheme(tw.Scheme.B, w, w,
                           TWO_PI * d1_mhz, TWO_PI * d2_mhz)
        full = _full_sigma(d, reference_rates)
        approx = tw.weak_drive_sigma(d, reference_rates)
        assert abs(full - approx) / abs(full) < 0.01


def test_power_conversions():
    omega = TWO_PI * 14.83e9  # rad/s
    nu = 2.0  # photons/us
    p = tw.photon_rate_to_power_watts(nu, omega)
    assert p == pytest.approx(1.054571817e-34 * omega * 2.0e6)
    v = tw.emitted_voltage_amplitude(nu, omega, line_impedance_ohm=50.0)
    assert v == pytest.approx(np.sqrt(2.0 * 50.0 * p))
