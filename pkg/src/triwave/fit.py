"""Rate and calibration-gain extraction from measured emission maps.

Measured maps come in arbitrary instrument units; a per-transition gain G
converts model photon rate to those units.  All datasets share one rate
set, the drive amplitudes are fixed and known, and the cost is ordinary
least squares normalized per dataset by cell count and data scale.  Rates
and gains are optimized in log space, which enforces positivity without
constraints; the gains are linear in the residual and are profiled out in
closed form at every objective evaluation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import MaxEvaluationsExceeded, ModelEvaluationFailed
from .model import DriveScheme, RateSet, RateValidityWarning
from .scan import DetuningGrid, scan_photon_rates
from .validation import check_map_values

_RATE_NAMES = RateSet.field_names()


@dataclass(frozen=True)
class CalibrationGains:
    """Output-line gains per emission transition (model photon rate -> a.u.)."""

    G21: float
    G32: float
    G31: float

    def __post_init__(self):
        for name in ("G21", "G32", "G31"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")

    def for_transition(self, transition: tuple) -> float:
        return {(2, 1): self.G21, (3, 2): self.G32, (3, 1): self.G31}[tuple(transition)]

    def to_dict(self) -> dict:
        return {"G21": self.G21, "G32": self.G32, "G31": self.G31}


#: gains of the reference measurement chain at the three transition frequencies
REFERENCE_GAINS = CalibrationGains(G21=2e5, G32=1.3e6, G31=1e5)


@dataclass
class FitDataset:
    """One measured map: drive template (fixed Omegas), grid and raw values."""

    template: DriveScheme
    grid: DetuningGrid
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.values = check_map_values(self.values, self.grid.shape)

    @property
    def transition(self) -> tuple:
        return self.template.emission_transition


@dataclass
class FitProblem:
    """Datasets sharing one RateSet, plus evaluation settings.

    One gain is fitted per emission transition present among the datasets.
    """

    datasets: list
    verbatim: bool = False
    jobs: int = 1

    def __post_init__(self):
        if not self.datasets:
            raise ValueError("at least one dataset is required")

    @property
    def transitions(self) -> list:
        seen = []
        for ds in self.datasets:
            if ds.transition not in seen:
                seen.append(ds.transition)
        return seen


@dataclass
class FitResult:
    """Extracted rates and gains with fit diagnostics.

    ``confidence`` holds per-parameter half-widths of the local quadratic
    model of the cost (log-space, i.e. fractional): the parameter change
    that doubles the cost above its minimum.  Weakly probed parameters get
    large half-widths rather than being dropped.
    """

    rates: RateSet
    gains: dict
    residual: float
    n_evaluations: int
    n_iterations: int
    converged: bool
    confidence: dict = field(default_factory=dict)
    message: str = ""

    def rates_mhz(self) -> dict:
        return self.rates.to_mhz()


def _dataset_weights(problem: FitProblem):
    """Per-dataset masks and 1/(n * scale^2) normalizations."""
    masks, weights = [], []
    for ds in problem.datasets:
        mask = np.isfinite(ds.values)
        scale = float(np.sqrt(np.mean(ds.values[mask] ** 2)))
        if scale == 0.0:
            scale = 1.0
        masks.append(mask)
        weights.append(1.0 / (mask.sum() * scale ** 2))
    return masks, weights


def _model_maps(problem: FitProblem, rates: RateSet):
    maps = []
    for ds in problem.datasets:
        nu = scan_photon_rates(ds.template, ds.grid, rates,
                               verbatim=problem.verbatim, jobs=problem.jobs)
        maps.append(nu)
    return maps


def _profile_gains(problem: FitProblem, maps, masks, weights) -> dict:
    """Closed-form least-squares gain per emission transition."""
    gains = {}
    for tr in problem.transitions:
        num = 0.0
        den = 0.0
        for ds, nu, mask, w in zip(problem.datasets, maps, masks, weights):
            if ds.transition != tr:
                continue
            m = mask & np.isfinite(nu)
            num += w * float(np.sum(nu[m] * ds.values[m]))
            den += w * float(np.sum(nu[m] ** 2))
        gains[tr] = num / den if den > 0.0 else 1.0
        if gains[tr] <= 0.0:
            gains[tr] = np.finfo(float).tiny
    return gains


def objective(problem: FitProblem, rates: RateSet, gains: dict | None = None) -> float:
    """Normalized sum-of-squares misfit between model and data.

    Cost = mean over datasets of sum_cells (G * nu - y)^2 / (n * scale^2)
    with scale the RMS of the dataset's finite cells.  Missing data cells
    are skipped; a failed model evaluation yields +inf.
    """
    masks, weights = _dataset_weights(problem)
    try:
        maps = _model_maps(problem, rates)
    except Exception as exc:  # solver blow-up at a trial point
        raise ModelEvaluationFailed(str(exc)) from exc
    for nu, mask in zip(maps, masks):
        if not np.isfinite(nu[mask]).all():
            return math.inf
    if gains is None:
        gains = _profile_gains(problem, maps, masks, weights)
    cost = 0.0
    for ds, nu, mask, w in zip(problem.datasets, maps, masks, weights):
        g = gains[ds.transition] if isinstance(gains, dict) else gains.for_transition(ds.transition)
        diff = g * nu[mask] - ds.values[mask]
        cost += w * float(np.sum(diff ** 2))
    return cost / len(problem.datasets)


def _trial_rates(log_rates) -> RateSet:
    # trial points may wander outside the gamma >= Gamma/2 region; that is
    # the optimizer's business, not a user-facing validity event
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RateValidityWarning)
        return RateSet(*np.exp(log_rates))


def _cost_from_log(problem, log_rates, counter, budget):
    if counter[0] >= budget:
        raise _BudgetExhausted()
    counter[0] += 1
    try:
        return objective(problem, _trial_rates(log_rates))
    except ModelEvaluationFailed:
        return math.inf


class _BudgetExhausted(Exception):
    pass


def _nelder_mead(fun, x0, *, scale=0.3, ftol=1e-8, xtol=1e-6, max_iter=10_000):
    """Minimal Nelder-Mead with the termination contract used here:

    stop when the relative spread of simplex costs drops below ftol or the
    simplex diameter (inf-norm around the best vertex) drops below xtol.
    Returns (x_best, f_best, n_iterations).
    """
    n = len(x0)
    simplex = [np.array(x0, dtype=float)]
    for k in range(n):
        v = np.array(x0, dtype=float)
        v[k] += scale
        simplex.append(v)
    fvals = [fun(v) for v in simplex]
    order = np.argsort(fvals)
    simplex = [simplex[i] for i in order]
    fvals = [fvals[i] for i in order]

    alpha, gamma, rho_c, sigma = 1.0, 2.0, 0.5, 0.5
    it = 0
    while it < max_iter:
        it += 1
        if math.isinf(fvals[0]):
            break  # nowhere to go: every vertex failed to evaluate
        spread = abs(fvals[-1] - fvals[0]) / max(abs(fvals[0]), 1e-300)
        diam = max(np.max(np.abs(v - simplex[0])) for v in simplex[1:])
        if spread < ftol or diam < xtol:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + alpha * (centroid - simplex[-1])
        fr = fun(xr)
        if fr < fvals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = fun(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            xc = centroid + rho_c * (simplex[-1] - centroid)
            fc = fun(xc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
            else:
                for k in range(1, n + 1):
                    simplex[k] = simplex[0] + sigma * (simplex[k] - simplex[0])
                    fvals[k] = fun(simplex[k])
        order = np.argsort(fvals)
        simplex = [simplex[i] for i in order]
        fvals = [fvals[i] for i in order]
    return simplex[0], fvals[0], it


def _confidence_halfwidths(problem, log_best, f_best, step=0.05):
    """Half-widths from the diagonal of a finite-difference quadratic model."""
    conf = {}
    floor = max(f_best, 1e-12)
    for k, name in enumerate(_RATE_NAMES):
        lp = log_best.copy(); lp[k] += step
        lm = log_best.copy(); lm[k] -= step
        try:
            fp = objective(problem, _trial_rates(lp))
            fm = objective(problem, _trial_rates(lm))
        except ModelEvaluationFailed:
            conf[name] = math.inf
            continue
        curv = (fp - 2.0 * f_best + fm) / step ** 2
        conf[name] = math.sqrt(2.0 * floor / curv) if curv > 0.0 else math.inf
    return conf


def fit_rates(problem: FitProblem, initial: RateSet, *,
              max_evaluations: int = 20_000, restarts: int = 2, seed: int = 0,
              ftol: float = 1e-8, xtol: float = 1e-6,
              confidence: bool = True) -> FitResult:
    """Extract the shared RateSet (and per-transition gains) from the datasets.

    Derivative-free simplex search over the six log-rates with seeded
    restarts; gains are profiled out in closed form at every evaluation, so
    the nonlinear search is six-dimensional.  The best cost is monotone
    nonincreasing across restarts.

    Raises MaxEvaluationsExceeded (with the partial result attached) when
    the model-evaluation budget runs out before the last restart converges.
    """
    x = np.log(initial.as_array())
    if not np.all(np.isfinite(x)):
        raise ValueError("initial rates must be finite and positive")
    counter = [0]
    fun = lambda v: _cost_from_log(problem, v, counter, max_evaluations)
    rng = np.random.default_rng(seed)

    best_x, best_f, total_iter = x, fun(x), 0
    exhausted = False
    try:
        for attempt in range(restarts + 1):
            scale = 0.3 if attempt == 0 else 0.1 * (1.0 + rng.uniform(-0.3, 0.3))
            start = best_x if attempt == 0 else best_x + rng.normal(0.0, 0.02, size=6)
            xk, fk, it = _nelder_mead(fun, start, scale=scale, ftol=ftol, xtol=xtol)
            total_iter += it
            if fk < best_f:
                best_x, best_f = xk, fk
    except _BudgetExhausted:
        exhausted = True

    rates = RateSet(*np.exp(best_x))  # validity warning is wanted on the final point
    masks, weights = _dataset_weights(problem)
    maps = _model_maps(problem, rates)
    gains = _profile_gains(problem, maps, masks, weights)
    conf = {}
    if confidence and not exhausted:
        conf = _confidence_halfwidths(problem, best_x, best_f)
    result = FitResult(
        rates=rates,
        gains={f"{u}{l}": g for (u, l), g in gains.items()},
        residual=best_f,
        n_evaluations=counter[0],
        n_iterations=total_iter,
        converged=not exhausted,
        confidence=conf,
        message="budget exhausted" if exhausted else "converged",
    )
    if exhausted:
        raise MaxEvaluationsExceeded(
            f"model-evaluation budget of {max_evaluations} exhausted", result
        )
    return result


def synthetic_dataset(template: DriveScheme, grid: DetuningGrid, rates: RateSet,
                      gain: float, *, noise: float = 0.0, seed: int = 0,
                      name: str = "", verbatim: bool = False) -> FitDataset:
    """Model-generated dataset in instrument units, with optional
    multiplicative Gaussian noise; used by round-trip tests and fixtures."""
    nu = scan_photon_rates(template, grid, rates, verbatim=verbatim)
    data = gain * nu
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        data = data * (1.0 + noise * rng.standard_normal(data.shape))
    return FitDataset(template=template, grid=grid, values=data, name=name)
