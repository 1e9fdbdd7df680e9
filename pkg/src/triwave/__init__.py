"""Steady-state three-wave mixing on a driven cyclic three-level emitter.

The package computes the stationary coherent emission of a cyclic
(Delta-type) three-level system driven on two transitions in an open
transmission line, scans it over the two drive detunings, and extracts
relaxation/dephasing rates and output-line gains from measured maps.
"""

from .emission import (EmissionSample, WeakDriveFactors, WEAK_DRIVE_KAPPA,
                       coherent_emission, emitted_voltage_amplitude,
                       photon_rate_limit, photon_rate_to_power_watts,
                       weak_drive_factors, weak_drive_sigma)
from .errors import (ConfigError, DegenerateSteadyState, MaxEvaluationsExceeded,
                     ModelEvaluationFailed, NonConvergent, NoSplitDetected,
                     StepUnderflow, TriwaveError)
from .estimators import CoherentEmissionModel, EmissionMapFitter
from .fit import (CalibrationGains, FitDataset, FitProblem, FitResult,
                  REFERENCE_GAINS, fit_rates, objective, synthetic_dataset)
from .model import (AtomSpectrum, DriveScheme, RateSet, RateValidityWarning,
                    REFERENCE_RATES, REFERENCE_SPECTRUM, Scheme, TWO_PI,
                    build_hamiltonian, build_liouvillian, dissipator,
                    dissipator_superoperator, hamiltonian_superoperator,
                    liouvillian_detuning_parts, sigma_op)
from .scan import (DetuningGrid, EmissionMap, find_splitting, run_scan,
                   scan_photon_rates)
from .steady import (PositivityWarning, steady_state,
                     steady_state_nullspace, time_evolve)
from .version import __version__

__all__ = [
    "AtomSpectrum", "CalibrationGains", "CoherentEmissionModel", "ConfigError",
    "DegenerateSteadyState", "DetuningGrid", "DriveScheme", "EmissionMap",
    "EmissionMapFitter", "EmissionSample", "FitDataset", "FitProblem",
    "FitResult", "MaxEvaluationsExceeded", "ModelEvaluationFailed",
    "NoSplitDetected", "NonConvergent", "PositivityWarning", "RateSet",
    "RateValidityWarning",
    "REFERENCE_GAINS", "REFERENCE_RATES", "REFERENCE_SPECTRUM", "Scheme",
    "StepUnderflow", "TriwaveError", "TWO_PI", "WEAK_DRIVE_KAPPA",
    "WeakDriveFactors", "build_hamiltonian", "build_liouvillian",
    "coherent_emission", "dissipator", "dissipator_superoperator",
    "emitted_voltage_amplitude", "find_splitting", "fit_rates",
    "hamiltonian_superoperator", "liouvillian_detuning_parts", "objective",
    "photon_rate_limit", "photon_rate_to_power_watts", "run_scan",
    "scan_photon_rates", "sigma_op", "steady_state", "steady_state_nullspace",
    "synthetic_dataset", "time_evolve", "weak_drive_factors",
    "weak_drive_sigma", "__version__",
]
