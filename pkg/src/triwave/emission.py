"""Observables of the coherent (elastic) emission.

The stationary coherence <sigma_lu> = rho_ul on the emitting transition
u -> l sets the emitted amplitude; the narrow-peak power divided by the
photon energy is the photon rate nu = (Gamma_ul / 2) |<sigma_lu>|^2, which
is the canonical output of the package (1/us).  Absolute power and voltage
amplitude need the transition frequency and line impedance and are exposed
as optional converters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DriveScheme, RateSet, Scheme
from .validation import COHERENCE_BOUND_TOL

HBAR_J_US = 1.054571817e-34 * 1e6  # J * us


@dataclass(frozen=True)
class EmissionSample:
    """Stationary emission on one transition.

    sigma is the dimensionless coherence amplitude (|sigma| <= 1/2),
    photon_rate the emitted photons per us, transition the (upper, lower)
    level pair.
    """

    sigma: complex
    photon_rate: float
    transition: tuple

    def __post_init__(self):
        if abs(self.sigma) > 0.5 + COHERENCE_BOUND_TOL:
            raise ValueError(f"|sigma| = {abs(self.sigma):.12f} exceeds the 1/2 bound")


def coherent_emission(rho_ss, scheme: DriveScheme, rates: RateSet) -> EmissionSample:
    """Emission sample read off a stationary state for the scheme's transition."""
    u, l = scheme.emission_transition
    sigma = complex(np.asarray(rho_ss)[u - 1, l - 1])
    gamma_rel = rates.relaxation((u, l))
    return EmissionSample(sigma=sigma,
                          photon_rate=0.5 * gamma_rel * abs(sigma) ** 2,
                          transition=(u, l))


def photon_rate_limit(rates: RateSet, scheme: DriveScheme) -> float:
    """Mixer ceiling Gamma/8 for the scheme's emission transition (1/us)."""
    return rates.relaxation(scheme.emission_transition) / 8.0


def photon_rate_to_power_watts(photon_rate_per_us: float, omega_rad_per_s: float) -> float:
    """Absolute narrow-peak power P = hbar * omega * nu."""
    return HBAR_J_US * omega_rad_per_s * photon_rate_per_us


def emitted_voltage_amplitude(photon_rate_per_us: float, omega_rad_per_s: float,
                              line_impedance_ohm: float = 50.0) -> float:
    """Voltage amplitude |V| = sqrt(2 Z0 P) of the emitted travelling wave."""
    power = photon_rate_to_power_watts(photon_rate_per_us, omega_rad_per_s)
    return float(np.sqrt(2.0 * line_impedance_ohm * power))


@dataclass(frozen=True)
class WeakDriveFactors:
    """Complex response denominators of the two conversion steps.

    lambda_first damps the pumped intermediate coherence, lambda_second the
    emitted coherence; both have non-negative real part.
    """

    lambda_first: complex
    lambda_second: complex

    def __post_init__(self):
        if self.lambda_first.real < 0.0 or self.lambda_second.real < 0.0:
            raise ValueError("Re(lambda) must be >= 0")


#: calibrated prefactor of the weak-drive product formula, per scheme.
#: Values are frozen from the Omega -> 0 extrapolation of the full solver
#: (tools/derive_weak_drive_prefactor.py); the suite re-derives them.
WEAK_DRIVE_KAPPA = {
    Scheme.A: -0.25 + 0.0j,
    Scheme.B: +0.25 + 0.0j,
    Scheme.C: -0.25 + 0.0j,
}


def weak_drive_factors(scheme: DriveScheme, rates: RateSet) -> WeakDriveFactors:
    """Response denominators lambda = gamma - i*delta for each conversion step.

    Second-order perturbation theory in the two drives gives, per scheme
    (derivation in docs/model_notes.md):

      A: lambda_first = gamma31 - i d1, emitted step gamma21 - i (d1 - d2)
      B: both pump orderings interfere; lambda_first is the parallel
         combination of (gamma21 + i d2) and (gamma31 - i d1), emitted step
         gamma32 - i (d1 - d2)
      C: lambda_first = gamma21 - i d1, emitted step gamma31 - i (d1 + d2)

    The emitted-step detuning is always the deviation of the mixed drive
    frequency (difference for A and B, sum for C) from its transition.
    """
    d1, d2 = scheme.delta_first, scheme.delta_second
    s = scheme.scheme
    if s is Scheme.A:
        lam1 = rates.gamma31 - 1j * d1
        lam2 = rates.gamma21 - 1j * (d1 - d2)
    elif s is Scheme.B:
        path_a = rates.gamma21 + 1j * d2
        path_b = rates.gamma31 - 1j * d1
        lam1 = 1.0 / (1.0 / path_a + 1.0 / path_b)
        lam2 = rates.gamma32 - 1j * (d1 - d2)
    else:
        lam1 = rates.gamma21 - 1j * d1
        lam2 = rates.gamma31 - 1j * (d1 + d2)
    return WeakDriveFactors(lambda_first=complex(lam1), lambda_second=complex(lam2))


def weak_drive_sigma(scheme: DriveScheme, rates: RateSet) -> complex:
    """Weak-drive approximation kappa * (O1/lambda1) * (O2/lambda2) of the coherence.

    Valid for Omega << gamma (not enforced); exact to leading order in both
    drive amplitudes for the corrected-frame model.
    """
    factors = weak_drive_factors(scheme, rates)
    kappa = WEAK_DRIVE_KAPPA[scheme.scheme]
    return complex(kappa
                   * (scheme.omega_first / factors.lambda_first)
                   * (scheme.omega_second / factors.lambda_second))
