"""Estimator-style front end (scikit-learn conventions).

Two surfaces of the package are naturally fit/predict shaped and are
exposed as estimators so they compose with the wider ecosystem:

* :class:`CoherentEmissionModel` — the forward model, predicting photon
  rates at drive-detuning points for a fixed scheme / drive / rate set.
* :class:`EmissionMapFitter` — the inverse problem, fitting the shared
  rate set and per-transition gains to a list of measured maps.

Both take and return linear frequencies (MHz) at the boundary.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .fit import FitProblem, fit_rates
from .model import TWO_PI, DriveScheme, RateSet, REFERENCE_RATES, Scheme
from .steady import steady_state
from .validation import as_rate_set, check_detuning_points


class CoherentEmissionModel(BaseEstimator):
    """Stationary coherent-emission forward model.

    Parameters
    ----------
    scheme : {"A", "B", "C"}
        Pumping configuration (which two transitions are driven).
    omega_first, omega_second : float
        Rabi amplitudes of the two drives, MHz.
    rates : RateSet, mapping or 6-sequence, optional
        Relaxation/dephasing rates (MHz at the boundary); defaults to the
        reference sample's values.
    verbatim : bool
        Use the published operator forms instead of the corrected frame.

    ``predict(X)`` maps an (n, 2) array of drive detunings (MHz) to photon
    rates (1/us); ``predict_sigma`` returns the complex coherences.
    """

    def __init__(self, scheme="C", omega_first=20.0, omega_second=20.0,
                 rates=None, verbatim=False):
        self.scheme = scheme
        self.omega_first = omega_first
        self.omega_second = omega_second
        self.rates = rates
        self.verbatim = verbatim

    def _resolved(self):
        rates = REFERENCE_RATES if self.rates is None else as_rate_set(self.rates)
        template = DriveScheme.from_mhz(Scheme(self.scheme),
                                        self.omega_first, self.omega_second)
        return template, rates

    def fit(self, X=None, y=None):
        """Validate parameters; the physics model has nothing to learn."""
        template, rates = self._resolved()
        self.template_ = template
        self.rates_ = rates
        self.n_features_in_ = 2
        return self

    def predict_sigma(self, X) -> np.ndarray:
        """Complex stationary coherence at each (delta_first, delta_second) MHz."""
        template, rates = self._resolved()
        X = check_detuning_points(X)
        u, l = template.emission_transition
        out = np.empty(len(X), dtype=complex)
        from .model import liouvillian_detuning_parts

        L0, L1, L2 = liouvillian_detuning_parts(template, rates,
                                                verbatim=self.verbatim)
        for k, (d1, d2) in enumerate(TWO_PI * X):
            rho = steady_state(L0 + d1 * L1 + d2 * L2)
            out[k] = rho[u - 1, l - 1]
        return out

    def predict(self, X) -> np.ndarray:
        """Photon rate (1/us) at each (delta_first, delta_second) MHz point."""
        template, rates = self._resolved()
        sigma = self.predict_sigma(X)
        g_rel = rates.relaxation(template.emission_transition)
        return 0.5 * g_rel * np.abs(sigma) ** 2


class EmissionMapFitter(BaseEstimator):
    """Least-squares extraction of rates and gains from measured maps.

    ``fit(X)`` takes a list of :class:`triwave.fit.FitDataset`; all datasets
    share one rate set and each emission transition present gets one gain.
    Fitted attributes follow the trailing-underscore convention:
    ``rates_mhz_``, ``gains_``, ``residual_``, ``n_evaluations_``,
    ``result_``.

    Parameters mirror :func:`triwave.fit.fit_rates`.
    """

    def __init__(self, init_rates=None, max_evaluations=20_000, restarts=2,
                 seed=0, ftol=1e-8, xtol=1e-6, verbatim=False, jobs=1,
                 confidence=True):
        self.init_rates = init_rates
        self.max_evaluations = max_evaluations
        self.restarts = restarts
        self.seed = seed
        self.ftol = ftol
        self.xtol = xtol
        self.verbatim = verbatim
        self.jobs = jobs
        self.confidence = confidence

    def fit(self, X, y=None):
        datasets = list(X)
        problem = FitProblem(datasets=datasets, verbatim=self.verbatim,
                             jobs=self.jobs)
        initial = (REFERENCE_RATES if self.init_rates is None
                   else as_rate_set(self.init_rates))
        result = fit_rates(problem, initial,
                           max_evaluations=self.max_evaluations,
                           restarts=self.restarts, seed=self.seed,
                           ftol=self.ftol, xtol=self.xtol,
                           confidence=self.confidence)
        self.result_ = result
        self.rates_ = result.rates
        self.rates_mhz_ = result.rates_mhz()
        self.gains_ = dict(result.gains)
        self.residual_ = result.residual
        self.n_evaluations_ = result.n_evaluations
        return self

    def predict(self, X) -> list:
        """Model maps (instrument units) for datasets, using the fitted params."""
        from .scan import scan_photon_rates

        maps = []
        for ds in X:
            nu = scan_photon_rates(ds.template, ds.grid, self.rates_,
                                   verbatim=self.verbatim, jobs=self.jobs)
            u, l = ds.template.emission_transition
            maps.append(self.gains_[f"{u}{l}"] * nu)
        return maps

    def score(self, X, y=None) -> float:
        """Negative objective at the fitted parameters (higher is better)."""
        from .fit import objective

        problem = FitProblem(datasets=list(X), verbatim=self.verbatim,
                             jobs=self.jobs)
        gains = {tuple(int(c) for c in key): g for key, g in self.gains_.items()}
        return -objective(problem, self.rates_, gains)
