"""Core model of the driven cyclic (Delta-type) three-level emitter.

Level ordering is |1>, |2>, |3> with all three transitions 1<->2, 2<->3,
1<->3 dipole-allowed.  Two monochromatic drives address two of the
transitions; the stationary coherence on the remaining transition carries
the mixed-frequency emission.

Unit convention: every quantity held by these types is an angular
frequency in rad/us.  Linear frequencies (MHz for rates, Rabi amplitudes
and detunings, GHz for transition frequencies) appear only at the I/O
boundary and are converted with a factor 2*pi by the ``from_mhz`` /
``from_ghz`` constructors.

Density matrices are plain complex ndarrays of shape (3, 3) and
superoperators act on rho flattened row-major, ``vec[3*i + j] = rho[i, j]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

TWO_PI = 2.0 * np.pi

#: flat indices of the diagonal elements of a row-major flattened 3x3 matrix
DIAGONAL_INDICES = (0, 4, 8)


def sigma_op(i: int, j: int) -> np.ndarray:
    """Transition operator |i><j| in the fixed |1>,|2>,|3> basis (1-based)."""
    if not (1 <= i <= 3 and 1 <= j <= 3):
        raise ValueError(f"level indices must be 1..3, got ({i}, {j})")
    op = np.zeros((3, 3), dtype=complex)
    op[i - 1, j - 1] = 1.0
    return op


class Scheme(str, Enum):
    """Which two transitions are pumped.

    A: drives on 1<->3 and 2<->3, emission on 2->1 (difference frequency).
    B: drives on 1<->3 and 1<->2, emission on 3->2 (difference frequency).
    C: drives on 1<->2 and 2<->3, emission on 3->1 (sum frequency).
    """

    A = "A"
    B = "B"
    C = "C"


#: driven transitions per scheme, as (upper, lower) pairs, first then second drive
DRIVEN_TRANSITIONS = {
    Scheme.A: ((3, 1), (3, 2)),
    Scheme.B: ((3, 1), (2, 1)),
    Scheme.C: ((2, 1), (3, 2)),
}

#: emitting transition per scheme, (upper, lower)
EMISSION_TRANSITION = {
    Scheme.A: (2, 1),
    Scheme.B: (3, 2),
    Scheme.C: (3, 1),
}


class RateValidityWarning(UserWarning):
    """A dephasing rate lies below the radiative floor Gamma/2."""


@dataclass(frozen=True)
class AtomSpectrum:
    """Transition angular frequencies (rad/us) of the cyclic atom.

    Cyclicity requires omega31 = omega21 + omega32.
    """

    omega21: float
    omega32: float
    omega31: float

    def __post_init__(self):
        for name in ("omega21", "omega32", "omega31"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        closure = abs(self.omega31 - (self.omega21 + self.omega32))
        if closure > 1e-9 * self.omega31:
            raise ValueError(
                "not cyclic: omega31 != omega21 + omega32 "
                f"(mismatch {closure / self.omega31:.3e} relative)"
            )

    @classmethod
    def from_ghz(cls, f21: float, f32: float, f31: float) -> "AtomSpectrum":
        scale = TWO_PI * 1e3  # GHz -> rad/us
        return cls(scale * f21, scale * f32, scale * f31)

    def to_ghz(self) -> dict:
        scale = TWO_PI * 1e3
        return {
            "f21": self.omega21 / scale,
            "f32": self.omega32 / scale,
            "f31": self.omega31 / scale,
        }

    def emission_frequency(self, transition: tuple) -> float:
        """Angular frequency (rad/us) of the given (upper, lower) transition."""
        return {(2, 1): self.omega21, (3, 2): self.omega32, (3, 1): self.omega31}[
            tuple(transition)
        ]


@dataclass(frozen=True)
class RateSet:
    """Relaxation rates Gamma_ij and coherence damping rates gamma_ij (rad/us).

    gamma_ij = gamma_ji by convention; only the i > j values are stored.
    Rates must be non-negative.  gamma_ij < Gamma_ij / 2 is physically
    suspect (coherences would outlive the populations feeding them) and is
    reported as a warning, not an error.
    """

    Gamma21: float
    Gamma32: float
    Gamma31: float
    gamma21: float
    gamma32: float
    gamma31: float

    def __post_init__(self):
        for name in self.field_names():
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        for pair in ((self.Gamma21, self.gamma21, "21"),
                     (self.Gamma32, self.gamma32, "32"),
                     (self.Gamma31, self.gamma31, "31")):
            big_g, small_g, label = pair
            if small_g < 0.5 * big_g - 1e-12 * max(big_g, 1.0):
                warnings.warn(
                    f"gamma{label} < Gamma{label}/2: rate set is outside the "
                    "physically valid region",
                    RateValidityWarning,
                    stacklevel=3,
                )

    @staticmethod
    def field_names() -> tuple:
        return ("Gamma21", "Gamma32", "Gamma31", "gamma21", "gamma32", "gamma31")

    @classmethod
    def from_mhz(cls, Gamma21, Gamma32, Gamma31, gamma21, gamma32, gamma31) -> "RateSet":
        return cls(*(TWO_PI * v for v in (Gamma21, Gamma32, Gamma31,
                                          gamma21, gamma32, gamma31)))

    def to_mhz(self) -> dict:
        return {name: getattr(self, name) / TWO_PI for name in self.field_names()}

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in self.field_names()])

    def min_rate(self) -> float:
        """Smallest nonzero rate; inf if all six are zero."""
        vals = [v for v in self.as_array() if v > 0.0]
        return min(vals) if vals else np.inf

    def gamma(self, i: int, j: int) -> float:
        """Coherence damping rate for the (i, j) matrix element, i != j."""
        key = tuple(sorted((i, j), reverse=True))
        return {(2, 1): self.gamma21, (3, 2): self.gamma32, (3, 1): self.gamma31}[key]

    def cp_floors(self) -> dict:
        """Radiative floors on the gammas for a completely positive generator.

        Each coherence must decay at least half as fast as the total
        population leaves its two levels: gamma21 >= Gamma21/2,
        gamma32 >= (Gamma21 + Gamma31 + Gamma32)/2,
        gamma31 >= (Gamma31 + Gamma32)/2.
        """
        return {
            "gamma21": 0.5 * self.Gamma21,
            "gamma32": 0.5 * (self.Gamma21 + self.Gamma31 + self.Gamma32),
            "gamma31": 0.5 * (self.Gamma31 + self.Gamma32),
        }

    def cp_valid(self, rel_slack: float = 1e-12) -> bool:
        """Whether the generator is completely positive (steady state provably PSD).

        The weaker gamma_ij >= Gamma_ij/2 construction check can hold while
        this fails; such rate sets evolve trace-1 Hermitian states whose
        exact stationary eigenvalues may dip slightly below zero.
        """
        floors = self.cp_floors()
        slack = rel_slack * max(self.as_array().max(), 1.0)
        return all(getattr(self, k) >= floors[k] - slack for k in floors)

    def relaxation(self, transition: tuple) -> float:
        """Gamma for an (upper, lower) transition."""
        return {(2, 1): self.Gamma21, (3, 2): self.Gamma32, (3, 1): self.Gamma31}[
            tuple(transition)
        ]


@dataclass(frozen=True)
class DriveScheme:
    """A pumping configuration: scheme label plus the two drive parameters.

    ``omega_first``/``omega_second`` are the Rabi amplitudes and
    ``delta_first``/``delta_second`` the drive detunings (rad/us) of the two
    driven transitions, in the order fixed by :data:`DRIVEN_TRANSITIONS`.
    Drive phases are fixed to zero (real amplitudes); a common phase only
    rotates the emitted coherence, not its magnitude.
    """

    scheme: Scheme
    omega_first: float = 0.0
    omega_second: float = 0.0
    delta_first: float = 0.0
    delta_second: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.omega_first < 0.0 or self.omega_second < 0.0:
            raise ValueError("Rabi amplitudes must be >= 0 (phases are fixed to 0)")

    @classmethod
    def from_mhz(cls, scheme, omega_first=0.0, omega_second=0.0,
                 delta_first=0.0, delta_second=0.0) -> "DriveScheme":
        return cls(Scheme(scheme), TWO_PI * omega_first, TWO_PI * omega_second,
                   TWO_PI * delta_first, TWO_PI * delta_second)

    @property
    def driven_transitions(self) -> tuple:
        return DRIVEN_TRANSITIONS[self.scheme]

    @property
    def emission_transition(self) -> tuple:
        return EMISSION_TRANSITION[self.scheme]

    def with_detunings(self, delta_first: float, delta_second: float) -> "DriveScheme":
        return replace(self, delta_first=delta_first, delta_second=delta_second)


#: device parameters of the reference sample shipped with the example configs
REFERENCE_SPECTRUM = AtomSpectrum.from_ghz(6.48, 8.35, 14.83)
REFERENCE_RATES = RateSet.from_mhz(Gamma21=8.0, Gamma32=38.0, Gamma31=41.0,
                                   gamma21=8.0, gamma32=42.0, gamma31=39.5)


def build_hamiltonian(scheme: DriveScheme, *, verbatim: bool = False) -> np.ndarray:
    """Rotating-frame Hamiltonian H/hbar (rad/us) for a pumping configuration.

    The default (corrected) frame is derived from first principles: with both
    drive frequencies absorbed into the frame rotation and the third level's
    rotation fixed by cyclicity, the diagonal reads (see docs/model_notes.md)

        A: diag(0, d2 - d1, -d1)      B: diag(0, -d2, -d1)
        C: diag(0, -d1, -(d1 + d2))

    where d1/d2 are the first/second drive detunings.  Each driven
    transition (u, l) carries the coupling -Omega/2 (sigma_ul + sigma_lu).

    ``verbatim=True`` instead reproduces the published operator forms, which
    mix detuning-index conventions on the diagonal and, for scheme B, place
    the first drive's amplitude on the 2<->3 coupling.  Kept for
    auditability; the corrected frame is the default everywhere.
    """
    s = scheme.scheme
    w1, w2 = scheme.omega_first, scheme.omega_second
    d1, d2 = scheme.delta_first, scheme.delta_second
    H = np.zeros((3, 3), dtype=complex)

    if not verbatim:
        if s is Scheme.A:
            diag = (0.0, d2 - d1, -d1)
        elif s is Scheme.B:
            diag = (0.0, -d2, -d1)
        else:
            diag = (0.0, -d1, -(d1 + d2))
        couplings = zip(DRIVEN_TRANSITIONS[s], (w1, w2))
    else:
        if s is Scheme.A:
            # printed form -(d31 s11 + d23 s22) with d23 = -d32
            diag = (-d1, d2, 0.0)
            couplings = zip(((3, 1), (3, 2)), (w1, w2))
        elif s is Scheme.B:
            # printed form couples Omega13 to (sigma32 + sigma23)
            diag = (0.0, -d2, -d1)
            couplings = zip(((3, 2), (2, 1)), (w1, w2))
        else:
            diag = (-d1, 0.0, -d2)
            couplings = zip(((2, 1), (3, 2)), (w1, w2))

    H[0, 0], H[1, 1], H[2, 2] = diag
    for (u, l), amp in couplings:
        H += -(amp / 2.0) * (sigma_op(u, l) + sigma_op(l, u))
    return H


def dissipator(rho: np.ndarray, rates: RateSet) -> np.ndarray:
    """Damping term L[rho] of the master equation.

    Populations follow the cascade 3 -> {1, 2} -> 1 with rates Gamma_ij and
    every off-diagonal element decays at its gamma_ij.  The sigma33
    coefficient -(Gamma31 + Gamma32) rho33 makes the generator exactly
    trace-preserving (see docs/model_notes.md on the published variant).
    """
    rho = np.asarray(rho, dtype=complex)
    p22, p33 = rho[1, 1], rho[2, 2]
    out = np.zeros((3, 3), dtype=complex)
    out[0, 0] = rates.Gamma31 * p33 + rates.Gamma21 * p22
    out[1, 1] = rates.Gamma32 * p33 - rates.Gamma21 * p22
    out[2, 2] = -(rates.Gamma31 + rates.Gamma32) * p33
    for i in range(3):
        for j in range(3):
            if i != j:
                out[i, j] = -rates.gamma(i + 1, j + 1) * rho[i, j]
    return out


def hamiltonian_superoperator(H: np.ndarray) -> np.ndarray:
    """9x9 matrix of rho -> -i [H, rho] under row-major flattening."""
    eye = np.eye(3, dtype=complex)
    return -1j * (np.kron(H, eye) - np.kron(eye, H.T))


def dissipator_superoperator(rates: RateSet, *, _mutate_sign: bool = False) -> np.ndarray:
    """9x9 matrix of the damping term under row-major flattening.

    Built by explicit index placement, deliberately independent of
    :func:`dissipator` so the two can cross-check each other.
    ``_mutate_sign`` flips one population-feed sign; it exists only as the
    negative control of the verification suite and must stay False.
    """
    D = np.zeros((9, 9), dtype=complex)
    idx = {(i, j): 3 * (i - 1) + (j - 1) for i in (1, 2, 3) for j in (1, 2, 3)}
    feed21 = -rates.Gamma21 if _mutate_sign else rates.Gamma21
    D[idx[1, 1], idx[3, 3]] += rates.Gamma31
    D[idx[1, 1], idx[2, 2]] += feed21
    D[idx[2, 2], idx[3, 3]] += rates.Gamma32
    D[idx[2, 2], idx[2, 2]] += -rates.Gamma21
    D[idx[3, 3], idx[3, 3]] += -(rates.Gamma31 + rates.Gamma32)
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            if i != j:
                D[idx[i, j], idx[i, j]] += -rates.gamma(i, j)
    return D


def build_liouvillian(scheme: DriveScheme, rates: RateSet,
                      *, verbatim: bool = False) -> np.ndarray:
    """9x9 generator of d(rho)/dt = -i [H, rho] + L[rho], row-major flattening."""
    H = build_hamiltonian(scheme, verbatim=verbatim)
    return hamiltonian_superoperator(H) + dissipator_superoperator(rates)


def liouvillian_detuning_parts(scheme: DriveScheme, rates: RateSet,
                               *, verbatim: bool = False) -> tuple:
    """Decompose the generator as L(d1, d2) = L0 + d1 * L1 + d2 * L2.

    The generator is affine in the two drive detunings (they enter only via
    diagonal projector terms of H), which lets detuning scans assemble
    stacked generators by broadcasting instead of rebuilding 9x9 matrices.
    """
    base = scheme.with_detunings(0.0, 0.0)
    L0 = build_liouvillian(base, rates, verbatim=verbatim)
    L1 = build_liouvillian(base.with_detunings(1.0, 0.0), rates, verbatim=verbatim) - L0
    L2 = build_liouvillian(base.with_detunings(0.0, 1.0), rates, verbatim=verbatim) - L0
    return L0, L1, L2
