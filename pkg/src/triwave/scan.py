"""Two-dimensional detuning scans and splitting diagnostics.

Every grid cell is an independent steady-state problem, so the scan
assembles stacked generators per row (the generator is affine in the two
detunings) and batch-solves them; rows are distributed over a thread pool
(LAPACK releases the GIL).  Chunking is fixed to one row regardless of the
worker count, so sequential and parallel runs are bit-identical.

Cells whose solve fails any tolerance are retried individually and, if
still failing, recorded in the map's error layer as missing-with-reason;
they are never silently zeroed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .emission import photon_rate_limit
from .errors import DegenerateSteadyState, NoSplitDetected, NonConvergent
from .model import TWO_PI, DriveScheme, RateSet
from .steady import (RESIDUAL_RTOL, _solve_stack, generator_null_dimension,
                     steady_state)
from .validation import (COHERENCE_BOUND_TOL, HERMITICITY_TOL, POSITIVITY_TOL,
                         TRACE_TOL)
from .version import __version__ as _pkg_version


@dataclass(frozen=True)
class DetuningGrid:
    """Rectangular grid of drive detunings.

    axis1/axis2 are (start, stop, points) in rad/us; axis_drives maps the
    two axes onto the scheme's first/second drive.
    """

    axis1: tuple
    axis2: tuple
    axis_drives: tuple = ("first", "second")

    def __post_init__(self):
        for name, ax in (("axis1", self.axis1), ("axis2", self.axis2)):
            start, stop, n = ax
            if int(n) < 2:
                raise ValueError(f"{name} needs at least 2 points")
            if not (np.isfinite(start) and np.isfinite(stop)):
                raise ValueError(f"{name} range must be finite")
        if sorted(self.axis_drives) != ["first", "second"]:
            raise ValueError("axis_drives must map axes onto {'first', 'second'}")

    @classmethod
    def from_mhz(cls, span1, span2, points=201, *, axis_drives=("first", "second")):
        """Build from (start, stop) MHz spans; points may be an int or a pair."""
        n1, n2 = (points, points) if np.isscalar(points) else points
        return cls((TWO_PI * span1[0], TWO_PI * span1[1], int(n1)),
                   (TWO_PI * span2[0], TWO_PI * span2[1], int(n2)),
                   tuple(axis_drives))

    @property
    def shape(self) -> tuple:
        return (int(self.axis1[2]), int(self.axis2[2]))

    def values1(self) -> np.ndarray:
        return np.linspace(self.axis1[0], self.axis1[1], int(self.axis1[2]))

    def values2(self) -> np.ndarray:
        return np.linspace(self.axis2[0], self.axis2[1], int(self.axis2[2]))

    def axis_values(self, axis: int) -> np.ndarray:
        return self.values1() if axis == 1 else self.values2()

    def to_dict(self) -> dict:
        return {
            "axis1_MHz": {"start": self.axis1[0] / TWO_PI,
                          "stop": self.axis1[1] / TWO_PI,
                          "points": int(self.axis1[2])},
            "axis2_MHz": {"start": self.axis2[0] / TWO_PI,
                          "stop": self.axis2[1] / TWO_PI,
                          "points": int(self.axis2[2])},
            "axis_drives": list(self.axis_drives),
        }


@dataclass
class EmissionMap:
    """Photon-rate map over a detuning grid, with provenance metadata.

    values[i, j] is the photon rate (1/us) at (axis1[i], axis2[j]); cells in
    ``errors`` hold NaN and the reason the solve was rejected.
    """

    grid: DetuningGrid
    values: np.ndarray
    meta: dict
    errors: list = field(default_factory=list)

    def n_missing(self) -> int:
        return len(self.errors)

    def finite_values(self) -> np.ndarray:
        return self.values[np.isfinite(self.values)]


def _drive_deltas(grid: DetuningGrid, d1, d2):
    """Map axis values onto (delta_first, delta_second) per the grid's wiring."""
    if grid.axis_drives[0] == "first":
        return d1, d2
    return d2, d1


def _scan_row(L0, L1, L2, dfirst_row, dsecond_row):
    """Batch steady states for one row; returns (rho, resid) stacks."""
    Ls = (L0[None, :, :]
          + dfirst_row[:, None, None] * L1
          + dsecond_row[:, None, None] * L2)
    return _solve_stack(Ls)


def scan_photon_rates(template: DriveScheme, grid: DetuningGrid, rates: RateSet,
                      *, verbatim: bool = False, jobs: int = 1):
    """Fast kernel: photon-rate matrix without the per-cell validity layer.

    Used inside fit objectives where the same parameter region is solved
    thousands of times; run_scan wraps this with full per-cell checks.
    NaN marks cells whose linear solve failed outright.
    """
    from .model import liouvillian_detuning_parts

    L0, L1, L2 = liouvillian_detuning_parts(template, rates, verbatim=verbatim)
    u, l = template.emission_transition
    g_rel = rates.relaxation((u, l))
    n1, n2 = grid.shape
    d1s, d2s = grid.values1(), grid.values2()
    out = np.empty((n1, n2), dtype=float)
    force_cellwise = _probe_degenerate(grid, L0, L1, L2)

    def cell(i, j):
        try:
            df, ds = _drive_deltas(grid, d1s[i], d2s[j])
            rho = steady_state(L0 + df * L1 + ds * L2, positivity="ignore")
            out[i, j] = 0.5 * g_rel * abs(rho[u - 1, l - 1]) ** 2
        except Exception:
            out[i, j] = np.nan

    def do_row(i):
        if force_cellwise:
            for j in range(n2):
                cell(i, j)
            return i
        dfirst, dsecond = _drive_deltas(grid, np.full(n2, d1s[i]), d2s)
        try:
            rho, _ = _scan_row(L0, L1, L2, dfirst, dsecond)
            out[i] = 0.5 * g_rel * np.abs(rho[:, u - 1, l - 1]) ** 2
        except np.linalg.LinAlgError:
            for j in range(n2):
                cell(i, j)
        return i

    _run_rows(do_row, n1, jobs)
    return out


def _probe_degenerate(grid, L0, L1, L2):
    """Uniqueness probe at the scan's central cell.

    Degeneracy needs a subspace decoupled from both drives and damping, so
    it is structural for a given rate/drive combination rather than a
    property of individual detuning cells; one rank estimate decides
    whether the batched path is safe or every cell must go through the
    fully checked single-point solver.
    """
    n1, n2 = grid.shape
    df, ds = _drive_deltas(grid, grid.values1()[n1 // 2], grid.values2()[n2 // 2])
    return generator_null_dimension(L0 + df * L1 + ds * L2) > 1


def _run_rows(do_row, n_rows, jobs):
    if jobs <= 1:
        for i in range(n_rows):
            do_row(i)
    else:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            list(pool.map(do_row, range(n_rows)))


def run_scan(template: DriveScheme, grid: DetuningGrid, rates: RateSet,
             *, verbatim: bool = False, jobs: int = 1) -> EmissionMap:
    """Sweep the grid and validate every cell's steady state.

    Each accepted cell satisfies the residual, trace, Hermiticity and
    |sigma| <= 1/2 bounds; rejected cells are NaN with a per-cell reason in
    the error layer.  Positivity to -1e-9 is additionally enforced per cell
    when the rate set is CP-valid (where it is a theorem); outside that
    region the worst eigenvalue is recorded in meta["min_eigenvalue"]
    instead, since mild negativity is then a property of the damping model,
    not of the solver.
    """
    from .model import liouvillian_detuning_parts

    L0, L1, L2 = liouvillian_detuning_parts(template, rates, verbatim=verbatim)
    u, l = template.emission_transition
    g_rel = rates.relaxation((u, l))
    cp_valid = rates.cp_valid()
    scale = max(np.abs(L0).max(), np.abs(L1).max(), np.abs(L2).max(), 1.0)
    n1, n2 = grid.shape
    d1s, d2s = grid.values1(), grid.values2()
    values = np.empty((n1, n2), dtype=float)
    row_errors = [[] for _ in range(n1)]
    row_min_eig = np.full(n1, np.inf)

    def retry_cell(i, j):
        df, ds = _drive_deltas(grid, d1s[i], d2s[j])
        try:
            rho = steady_state(L0 + df * L1 + ds * L2,
                               positivity="raise" if cp_valid else "ignore")
            sig = abs(rho[u - 1, l - 1])
            if sig > 0.5 + COHERENCE_BOUND_TOL:
                raise NonConvergent(f"|sigma| = {sig:.12f} exceeds 1/2 bound")
            values[i, j] = 0.5 * g_rel * sig ** 2
        except (DegenerateSteadyState, NonConvergent, np.linalg.LinAlgError) as exc:
            values[i, j] = np.nan
            row_errors[i].append((i, j, f"{type(exc).__name__}: {exc}"))

    force_cellwise = _probe_degenerate(grid, L0, L1, L2)

    def do_row(i):
        if force_cellwise:
            for j in range(n2):
                retry_cell(i, j)
            return i
        dfirst, dsecond = _drive_deltas(grid, np.full(n2, d1s[i]), d2s)
        try:
            rho, resid = _scan_row(L0, L1, L2, dfirst, dsecond)
        except np.linalg.LinAlgError:
            for j in range(n2):
                retry_cell(i, j)
            return i
        tr_err = np.abs(np.einsum("njj->n", rho) - 1.0)
        lo = np.linalg.eigvalsh(rho)[:, 0]
        row_min_eig[i] = lo.min()
        sig = np.abs(rho[:, u - 1, l - 1])
        bad = ((resid > RESIDUAL_RTOL * scale)
               | (tr_err > TRACE_TOL)
               | (sig > 0.5 + COHERENCE_BOUND_TOL))
        if cp_valid:
            bad |= lo < -POSITIVITY_TOL
        values[i] = 0.5 * g_rel * sig ** 2
        for j in np.nonzero(bad)[0]:
            retry_cell(i, int(j))
        return i

    _run_rows(do_row, n1, jobs)

    errors = [e for row in row_errors for e in row]
    meta = {
        "format": "triwave-map",
        "version": _pkg_version,
        "scheme": template.scheme.value,
        "omega_first_MHz": template.omega_first / TWO_PI,
        "omega_second_MHz": template.omega_second / TWO_PI,
        "rates_MHz": rates.to_mhz(),
        "grid": grid.to_dict(),
        "verbatim_hamiltonian": bool(verbatim),
        "solver": {"residual_rtol": RESIDUAL_RTOL,
                   "trace_tol": TRACE_TOL,
                   "hermiticity_tol": HERMITICITY_TOL,
                   "positivity_tol": POSITIVITY_TOL},
        "rates_cp_valid": cp_valid,
        "min_eigenvalue": (float(row_min_eig.min())
                           if np.isfinite(row_min_eig.min()) else None),
        "photon_rate_limit_per_us": photon_rate_limit(rates, template),
        "n_missing": len(errors),
    }
    return EmissionMap(grid=grid, values=values, meta=meta, errors=errors)


def _refine_peak(xs, ys, j):
    """Sub-grid peak position by a parabola through three points."""
    if j == 0 or j == len(xs) - 1:
        return xs[j]
    y0, y1, y2 = ys[j - 1], ys[j], ys[j + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return xs[j]
    shift = 0.5 * (y0 - y2) / denom
    return xs[j] + np.clip(shift, -1.0, 1.0) * (xs[1] - xs[0])


def find_splitting(emap: EmissionMap, axis: int, *, threshold: float = 0.1) -> float:
    """Separation (rad/us) of the two strongest maxima along one detuning axis.

    The profile is the cut at the other axis' resonance (grid point nearest
    zero detuning).  Local maxima below ``threshold`` times the profile's
    global maximum are ignored (the cut is the operation's domain: on these
    maps the off-resonant ridges can dwarf the on-resonance doublet); peak
    positions are refined by quadratic interpolation.  Raises
    NoSplitDetected when fewer than two maxima qualify.
    """
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    other = 2 if axis == 1 else 1
    cut_index = int(np.argmin(np.abs(emap.grid.axis_values(other))))
    profile = emap.values[cut_index, :] if axis == 2 else emap.values[:, cut_index]
    xs = emap.grid.axis_values(axis)

    finite = np.nan_to_num(profile, nan=-np.inf)
    if not np.isfinite(profile).any():
        raise NoSplitDetected(f"resonant cut along axis {axis} has no solved cells")
    floor = threshold * np.nanmax(profile)
    peaks = [j for j in range(1, len(xs) - 1)
             if finite[j] > finite[j - 1] and finite[j] > finite[j + 1]
             and finite[j] > floor]
    if len(peaks) < 2:
        raise NoSplitDetected(
            f"{len(peaks)} qualifying maxima along axis {axis} "
            f"(threshold {threshold:g} * cut maximum)"
        )
    peaks.sort(key=lambda j: finite[j], reverse=True)
    a = _refine_peak(xs, profile, peaks[0])
    b = _refine_peak(xs, profile, peaks[1])
    return float(abs(a - b))
