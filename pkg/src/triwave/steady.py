"""Stationary-state solver and the independent time-integration oracle.

The steady state solves L rho_ss = 0 with Tr rho_ss = 1 by replacing one
row of the 9x9 generator with the trace constraint and solving the dense
linear system directly; the residual is always cross-checked against the
unmodified generator.  ``time_evolve`` integrates d(rho)/dt = L rho with an
embedded Dormand-Prince 4(5) scheme and exists purely as an independent
long-time oracle for the linear solve.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DegenerateSteadyState, NonConvergent, StepUnderflow
from .model import DIAGONAL_INDICES
from .validation import HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL

#: residual tolerance, relative to the largest generator element
RESIDUAL_RTOL = 1e-10


class PositivityWarning(UserWarning):
    """The exact steady state has an eigenvalue below the -1e-9 allowance.

    For rate sets inside the completely positive region this indicates a
    solver problem; outside it (see RateSet.cp_valid) it is a genuine
    property of the damping model at that drive point.
    """


def _solve_stack(L):
    """Solve the trace-constrained steady state for a stack of generators.

    L has shape (..., 9, 9); returns (rho, residual) with rho of shape
    (..., 3, 3) Hermitized and residual = max |L . vec(rho)| per system.
    Raises numpy.linalg.LinAlgError if any system in the stack is singular.
    """
    L = np.asarray(L, dtype=complex)
    scale = np.abs(L).reshape(*L.shape[:-2], 81).max(axis=-1)
    weight = np.where(scale > 0.0, scale, 1.0)

    A = L.copy()
    A[..., 0, :] = 0.0
    for k in DIAGONAL_INDICES:
        A[..., 0, k] = weight
    b = np.zeros(L.shape[:-1], dtype=complex)
    b[..., 0] = weight

    x = np.linalg.solve(A, b[..., None])[..., 0]
    # one pass of iterative refinement against the constrained system
    r = b - np.einsum("...ij,...j->...i", A, x)
    x = x + np.linalg.solve(A, r[..., None])[..., 0]

    rho = x.reshape(*L.shape[:-2], 3, 3)
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    resid = np.abs(
        np.einsum("...ij,...j->...i", L, rho.reshape(*L.shape[:-2], 9))
    ).max(axis=-1)
    return rho, resid


def steady_state(L, *, rtol: float = RESIDUAL_RTOL, positivity: str = "warn"):
    """Unique unit-trace stationary state of a 9x9 generator.

    positivity: what to do when the minimum eigenvalue drops below -1e-9.
    "raise" treats it as a solver failure (appropriate when the rate set is
    CP-valid, where the exact state is provably PSD), "warn" (default)
    emits PositivityWarning once, "ignore" skips the check (scans record
    the worst value in their metadata instead).

    Raises
    ------
    DegenerateSteadyState
        if the generator's null space has dimension > 1 (rank < 8).
    NonConvergent
        if the residual, trace or (with positivity="raise") positivity
        tolerances fail even though the null space is one-dimensional.
    """
    if positivity not in ("raise", "warn", "ignore"):
        raise ValueError("positivity must be 'raise', 'warn' or 'ignore'")
    L = np.asarray(L, dtype=complex)
    if L.shape != (9, 9):
        raise ValueError(f"superoperator must be 9x9, got {L.shape}")
    scale = max(np.abs(L).max(), 1.0)

    if generator_null_dimension(L) > 1:
        raise DegenerateSteadyState(
            f"null space has dimension {generator_null_dimension(L)}"
        )
    try:
        rho, resid = _solve_stack(L)
    except np.linalg.LinAlgError:
        _raise_degenerate_or_nonconvergent(L, "singular constrained system")

    if resid > rtol * scale:
        _raise_degenerate_or_nonconvergent(
            L, f"residual {resid:.3e} above {rtol:.1e} * scale {scale:.3e}"
        )
    tr_err = abs(rho.trace() - 1.0)
    if tr_err > TRACE_TOL:
        raise NonConvergent(f"trace error {tr_err:.3e}")
    if positivity != "ignore":
        lo = np.linalg.eigvalsh(rho).min()
        if lo < -POSITIVITY_TOL:
            if positivity == "raise":
                raise NonConvergent(
                    f"steady state not positive semidefinite "
                    f"(min eigenvalue {lo:.3e}) for a CP-valid generator"
                )
            warnings.warn(
                "steady state has an eigenvalue below -1e-9; the rate set "
                "lies outside the completely positive region (RateSet.cp_valid)",
                PositivityWarning,
                stacklevel=2,
            )
    return rho


def generator_null_dimension(L) -> int:
    """Dimension of the generator's null space (1 means a unique steady state).

    Degeneracy needs a subspace decoupled from both the drives and the
    damping, so it is a structural property of the rate/drive combination;
    a rank estimate makes it explicit.
    """
    L = np.asarray(L, dtype=complex)
    rank = np.linalg.matrix_rank(L, tol=1e-9 * max(np.abs(L).max(), 1.0))
    return 9 - int(rank)


def _raise_degenerate_or_nonconvergent(L, detail):
    null_dim = generator_null_dimension(L)
    if null_dim > 1:
        raise DegenerateSteadyState(
            f"null space has dimension {null_dim}; {detail}"
        )
    raise NonConvergent(detail)


def steady_state_nullspace(L):
    """SVD null-space route to the steady state; debug path.

    Slower than the trace-row solve but makes the rank structure explicit.
    """
    L = np.asarray(L, dtype=complex)
    _, s, vh = np.linalg.svd(L)
    tol = 1e-9 * max(s[0], 1.0)
    null_dim = int(np.sum(s < tol))
    if null_dim == 0:
        raise NonConvergent("no null vector found")
    if null_dim > 1:
        raise DegenerateSteadyState(f"null space has dimension {null_dim}")
    rho = vh[-1].conj().reshape(3, 3)
    rho = rho / rho.trace()
    return 0.5 * (rho + rho.conj().T)


# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])


def _rk45_stack(L, y0, t_final, *, rtol, atol, dt_max):
    """Integrate dy/dt = L y for a stack of independent linear systems.

    L: (n, 9, 9), y0: (n, 9), common t_final.  The step is controlled on the
    worst per-system scaled error, so every system meets the local
    tolerance.  Returns y(t_final).
    """
    L = np.asarray(L, dtype=complex)
    y = np.asarray(y0, dtype=complex).copy()
    t = 0.0
    if t_final <= 0.0:
        raise ValueError("t_final must be > 0")

    def rhs(v):
        return np.einsum("nij,nj->ni", L, v)

    f0 = rhs(y)
    scale0 = atol + rtol * np.abs(y).max()
    d0 = np.abs(y).max() / scale0
    d1 = np.abs(f0).max() / scale0
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6 * t_final
    h = min(h, t_final, dt_max)

    k = np.empty((7,) + y.shape, dtype=complex)
    min_step = 16.0 * np.finfo(float).eps * t_final
    while t < t_final:
        h = min(h, t_final - t, dt_max)
        if h < min_step:
            raise StepUnderflow(f"step {h:.3e} below machine-feasible size at t={t:.3e}")
        k[0] = rhs(y)
        for s in range(1, 7):
            ys = y + h * np.tensordot(_DP_A[s], k[:s], axes=(0, 0))
            k[s] = rhs(ys)
        y5 = y + h * np.tensordot(_DP_B5, k, axes=(0, 0))
        err_vec = h * np.tensordot(_DP_B5 - _DP_B4, k, axes=(0, 0))
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = np.sqrt(np.mean((np.abs(err_vec) / sc) ** 2, axis=-1)).max()
        if err <= 1.0:
            t += h
            y = y5
        factor = 0.9 * err ** -0.2 if err > 0.0 else 5.0
        h *= min(5.0, max(0.2, factor))
    return y


def time_evolve(rho0, L, t_final, dt_max=None, *, rtol=1e-10, atol=1e-12):
    """Integrate rho(t) = exp(L t) rho0 with adaptive RK45; oracle for steady_state.

    Local error per step is held to atol + rtol*|y|; trace drift and
    Hermiticity are verified on the result.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (3, 3):
        raise ValueError("rho0 must be 3x3")
    if dt_max is None:
        dt_max = float(t_final)
    y = _rk45_stack(np.asarray(L, dtype=complex)[None], rho0.reshape(1, 9),
                    float(t_final), rtol=rtol, atol=atol, dt_max=float(dt_max))
    rho = y[0].reshape(3, 3)
    drift = abs(rho.trace() - rho0.trace())
    if drift > 1e-9:
        raise NonConvergent(f"trace drifted by {drift:.3e} during integration")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > max(HERMITICITY_TOL, 100 * atol):
        raise NonConvergent(f"integration broke Hermiticity by {herm:.3e}")
    return 0.5 * (rho + rho.conj().T)


def evolve_stack(Ls, rho0s, t_finals, *, rtol=1e-10, atol=1e-12):
    """Integrate many independent systems at once (shared adaptive step).

    Each system is rescaled to unit time with its own t_final, so one
    stepping loop integrates all of them to their respective horizons.
    Used by the verification suites; semantics per system match
    :func:`time_evolve`.
    """
    Ls = np.asarray(Ls, dtype=complex)
    t = np.asarray(t_finals, dtype=float)
    scaled = Ls * t[:, None, None]
    y0 = np.asarray(rho0s, dtype=complex).reshape(len(t), 9)
    y = _rk45_stack(scaled, y0, 1.0, rtol=rtol, atol=atol, dt_max=1.0)
    return y.reshape(len(t), 3, 3)
