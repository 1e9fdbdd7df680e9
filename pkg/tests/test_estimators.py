import numpy as np
import pytest
from sklearn.base import clone

import triwave as tw
from triwave.estimators import CoherentEmissionModel, EmissionMapFitter
from triwave.fit import synthetic_dataset


def test_forward_model_params_roundtrip():
    m = CoherentEmissionModel(scheme="A", omega_first=50.0, omega_second=5.0)
    params = m.get_params()
    assert params["scheme"] == "A"
    assert params["omega_first"] == 50.0
    m2 = clone(m)
    assert m2.get_params() == params
    m2.set_params(omega_second=16.0)
    assert m2.get_params()["omega_second"] == 16.0


def test_forward_model_fit_validates():
    m = CoherentEmissionModel(scheme="C").fit()
    assert m.n_features_in_ == 2
    assert m.rates_ is tw.REFERENCE_RATES
    with pytest.raises(ValueError):
        CoherentEmissionModel(scheme="Q").fit()


def test_forward_model_predict_matches_scan(reference_rates):
    m = CoherentEmissionModel(scheme="C", omega_first=20.0, omega_second=20.0)
    grid = tw.DetuningGrid.from_mhz((-40, 40), (-40, 40), points=5)
    emap = tw.run_scan(tw.DriveScheme.from_mhz("C", 20.0, 20.0), grid,
                       reference_rates)
    d1 = grid.values1() / tw.TWO_PI
    d2 = grid.values2() / tw.TWO_PI
    X = np.array([(a, b) for a in d1 for b in d2])
    nu = m.predict(X)
    assert nu.shape == (25,)
    assert np.allclose(nu, emap.values.reshape(-1), rtol=1e-12, atol=0)


def test_forward_model_predict_sigma_types():
    m = CoherentEmissionModel(scheme="B", omega_first=10.0, omega_second=10.0,
                              rates={"Gamma21": 8.0, "Gamma32": 38.0,
                                     "Gamma31": 41.0, "gamma21": 8.0,
                                     "gamma32": 48.0, "gamma31": 42.0})
    sig = m.predict_sigma([[0.0, 0.0], [5.0, -5.0]])
    assert sig.dtype == complex
    assert sig.shape == (2,)
    with pytest.raises(ValueError, match="detuning"):
        m.predict(np.ones((3, 4)))
    with pytest.raises(ValueError, match="finite"):
        m.predict([[np.nan, 0.0]])


def test_fitter_estimator(reference_rates):
    grid = tw.DetuningGrid.from_mhz((-60, 60), (-60, 60), points=11)
    datasets = [
        synthetic_dataset(tw.DriveScheme.from_mhz(s, *w), grid, reference_rates,
                          g, noise=0.01, seed=k, name=s)
        for k, (s, w, g) in enumerate([("A", (50.0, 16.0), 2e5),
                                       ("B", (40.0, 10.0), 1.3e6),
                                       ("C", (20.0, 20.0), 1e5)])
    ]
    init = {k: 1.3 * v for k, v in reference_rates.to_mhz().items()}
    est = EmissionMapFitter(init_rates=init, restarts=0, confidence=False)
    est.fit(datasets)
    assert set(est.gains_) == {"21", "32", "31"}
    rel = np.abs(est.rates_.as_array() / reference_rates.as_array() - 1.0)
    assert rel.max() < 0.10
    assert est.residual_ == est.result_.residual
    assert est.n_evaluations_ > 0
    preds = est.predict(datasets)
    assert len(preds) == 3 and preds[0].shape == (11, 11)
    assert np.isfinite(est.score(datasets))


def test_fitter_clone_keeps_params():
    est = EmissionMapFitter(max_evaluations=123, seed=9)
    c = clone(est)
    assert c.get_params()["max_evaluations"] == 123
    assert c.get_params()["seed"] == 9
