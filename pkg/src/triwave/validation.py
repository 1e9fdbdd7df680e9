"""Input-validation helpers shared by the library, estimators and CLI."""

from __future__ import annotations

import numpy as np

from .model import RateSet

#: default tolerances for density-matrix validity
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9
#: slack on the |<sigma>| <= 1/2 coherence bound
COHERENCE_BOUND_TOL = 1e-9


def check_density_matrix(rho, *, herm_tol=HERMITICITY_TOL, trace_tol=TRACE_TOL,
                         psd_tol=POSITIVITY_TOL) -> np.ndarray:
    """Validate a 3x3 density matrix; returns it as a complex ndarray."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (3, 3):
        raise ValueError(f"density matrix must be 3x3, got shape {rho.shape}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
    tr = abs(rho.trace() - 1.0)
    if tr > trace_tol:
        raise ValueError(f"trace deviates from 1 by {tr:.3e}")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -psd_tol:
        raise ValueError(f"not positive semidefinite: min eigenvalue {lo:.3e}")
    return rho


def as_rate_set(rates) -> RateSet:
    """Coerce a RateSet, a mapping of MHz values, or a 6-sequence of MHz values."""
    if isinstance(rates, RateSet):
        return rates
    if isinstance(rates, dict):
        missing = [k for k in RateSet.field_names() if k not in rates]
        if missing:
            raise ValueError(f"rate mapping is missing {missing}")
        return RateSet.from_mhz(**{k: float(rates[k]) for k in RateSet.field_names()})
    vals = list(rates)
    if len(vals) != 6:
        raise ValueError("expected 6 rates (Gamma21, Gamma32, Gamma31, "
                         "gamma21, gamma32, gamma31)")
    return RateSet.from_mhz(*map(float, vals))


def check_detuning_points(X) -> np.ndarray:
    """Validate an (n, 2) array of detuning pairs; returns float64 ndarray."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.shape[0] == 2:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError(f"expected shape (n, 2) of detuning pairs, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("detunings must be finite")
    return X


def check_map_values(values, shape) -> np.ndarray:
    """Validate measured map data against a grid shape; NaN marks missing cells."""
    values = np.asarray(values, dtype=float)
    if values.shape != tuple(shape):
        raise ValueError(f"data shape {values.shape} does not match grid {tuple(shape)}")
    if np.isinf(values).any():
        raise ValueError("map data must not contain infinities")
    if not np.isfinite(values).any():
        raise ValueError("map data contains no finite cells")
    return values
