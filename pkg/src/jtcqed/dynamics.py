"""Lindblad open-system engine.

The Liouvillian is represented two ways at once:

* as its ingredients (Hamiltonian + scaled collapse operators), which drive a
  cheap matrix-shaped right-hand side for adaptive integration, and
* as a dense superoperator of side ``total_dim**2`` in column-major
  vectorization, materialized lazily, which powers the matrix-exponential
  propagation path, steady-state kernel solves and exactness oracles.

Both propagation paths integrate the same generator; they are cross-checked
against each other in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import (
    DegenerateSteadyStateError,
    NonStationaryStateError,
    StiffnessError,
    ValidationError,
)
from .hilbert import DensityMatrix, QOperator, SpaceSpec, pauli, qubit_lowering, annihilation
from .series import CorrelationSeries

__all__ = [
    "DissipationParams",
    "Liouvillian",
    "Trajectory",
    "build_liouvillian",
    "liouvillian_from_operators",
    "evolve",
    "steady_state",
    "correlation",
]

# Adaptive-integration contract: relative / absolute tolerances.
RTOL = 1e-8
ATOL = 1e-10

# Largest superoperator side for which the steady-state solver performs an
# exact singular-value kernel-dimension check; larger systems fall back to
# the solve-and-residual route (degenerate kernels still surface as singular
# or inconsistent solves).
KERNEL_SVD_MAX_SIDE = 2704

STEADY_RESIDUAL_TOL = 1e-10
STATIONARITY_TOL = 1e-8

# Positivity slack allowed for propagated states: integration at the fixed
# tolerance contract can push an eigenvalue of an (exactly) boundary state
# slightly negative; fresh constructions keep the tighter DensityMatrix floor.
PROPAGATED_MIN_EIG = -1e-7


@dataclass(frozen=True)
class DissipationParams:
    """Decay rates (units of the first resonator frequency) and bath occupation.

    Thermal occupation applies to the cavity channels only; the qubit
    relaxation and dephasing channels stay at zero temperature.
    """

    kappa1: float = 0.001
    kappa2: float = 0.001
    gamma: float = 0.001
    gamma_phi: float = 0.01
    n_th: float = 0.15

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "gamma", "gamma_phi", "n_th"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


def _vec(mat: np.ndarray) -> np.ndarray:
    return mat.ravel(order="F")


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape((d, d), order="F")


class Liouvillian:
    """Generator of the master equation d rho/dt = -i[H, rho] + sum_k D[c_k] rho."""

    def __init__(
        self,
        space: SpaceSpec,
        hamiltonian: QOperator,
        collapse_ops: Sequence[QOperator],
        dissipation: DissipationParams | None = None,
    ):
        self.space = space
        self.hamiltonian = hamiltonian
        self.collapse_ops = tuple(collapse_ops)
        self.dissipation = dissipation
        self._h = hamiltonian.matrix
        self._cs = [c.matrix for c in self.collapse_ops]
        self._cdcs = [c.conj().T @ c for c in self._cs]
        self._matrix: np.ndarray | None = None

    @property
    def matrix(self) -> np.ndarray:
        """Dense superoperator acting on column-major vectorized states."""
        if self._matrix is None:
            d = self.space.total_dim
            eye = np.eye(d, dtype=complex)
            m = -1j * (np.kron(eye, self._h) - np.kron(self._h.T, eye))
            for c, cdc in zip(self._cs, self._cdcs):
                m += np.kron(c.conj(), c)
                m -= 0.5 * (np.kron(eye, cdc) + np.kron(cdc.T, eye))
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def apply(self, mat: np.ndarray) -> np.ndarray:
        """Apply the generator to a (not necessarily Hermitian) matrix."""
        out = -1j * (self._h @ mat - mat @ self._h)
        for c, cdc in zip(self._cs, self._cdcs):
            out += c @ mat @ c.conj().T
            out -= 0.5 * (cdc @ mat + mat @ cdc)
        return out

    def apply_vec(self, v: np.ndarray) -> np.ndarray:
        d = self.space.total_dim
        return _vec(self.apply(_unvec(v, d)))

    def stationarity_residual(self, rho: DensityMatrix) -> float:
        return float(np.abs(self.apply(rho.matrix)).max())


def liouvillian_from_operators(
    hamiltonian: QOperator,
    collapse_ops: Sequence[QOperator],
    dissipation: DissipationParams | None = None,
) -> Liouvillian:
    """Assemble a Liouvillian from a Hamiltonian and pre-scaled collapse operators.

    Each collapse operator must already carry the square root of its rate,
    i.e. the damping term contributed is D[c] rho = c rho c^dag - {c^dag c, rho}/2.
    """
    if not hamiltonian.is_hermitian():
        raise ValidationError("Hamiltonian must be Hermitian")
    space = hamiltonian.space
    for c in collapse_ops:
        if c.space != space:
            raise ValueError("collapse operator lives on a different space")
    return Liouvillian(space, hamiltonian, collapse_ops, dissipation)


def build_liouvillian(h: QOperator, d: DissipationParams) -> Liouvillian:
    """Standard dissipation channels of the two-resonator + qubit system.

    Per cavity mode j: (1 + n_th) kappa_j D[a_j] + n_th kappa_j D[a_j^dag];
    per qubit: gamma D[sigma] + (gamma_phi / 2) D[sigma_z]. Spaces with a
    single mode or without a qubit simply omit the missing channels, which
    keeps uncoupled-cavity fixtures expressible.
    """
    if not h.is_hermitian():
        raise ValidationError("Hamiltonian must be Hermitian")
    space = h.space
    if space.n_modes > 2 or space.qubit_count > 1:
        raise ValueError("dissipation defaults cover at most 2 modes and 1 qubit")
    kappas = (d.kappa1, d.kappa2)
    ops: list[QOperator] = []
    for j in range(space.n_modes):
        kappa = kappas[j]
        if kappa == 0.0:
            continue
        a = annihilation(space, j)
        down = np.sqrt((1.0 + d.n_th) * kappa)
        ops.append(down * a)
        if d.n_th > 0.0:
            ops.append(np.sqrt(d.n_th * kappa) * a.dag())
    if space.qubit_count == 1:
        if d.gamma > 0.0:
            ops.append(np.sqrt(d.gamma) * qubit_lowering(space))
        if d.gamma_phi > 0.0:
            ops.append(np.sqrt(d.gamma_phi / 2.0) * pauli(space, "z"))
    return Liouvillian(space, h, ops, d)


@dataclass
class Trajectory:
    """Time-ordered result of a propagation run.

    Either the full state at every requested time (``states``) or expectation
    records for pre-registered observables (``expectations``) are stored; the
    final state is always available.
    """

    times: np.ndarray
    final_state: DensityMatrix
    states: list[DensityMatrix] | None = None
    expectations: dict[str, np.ndarray] | None = None
    trace_drift: float = 0.0
    method: str = "adaptive"


def _check_times(times: np.ndarray):
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a nonempty 1-d array")
    if times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")


def _is_uniform(grid: np.ndarray) -> bool:
    if grid.size < 3:
        return True
    steps = np.diff(grid)
    return bool(np.allclose(steps, steps[0], rtol=1e-9, atol=1e-14))


def _expm_scan(
    lmat: np.ndarray,
    x0: np.ndarray,
    n_steps: int,
    dt: float,
    weight_rows: np.ndarray | None = None,
    keep_states: bool = False,
    block: int = 64,
):
    """Propagate x0 through n_steps of expm(L dt).

    Returns (values, states, x_final) where ``values[r, k]`` is
    weight_rows[r] . x(k dt) including k = 0, and ``states`` collects every
    x(k dt) when requested. Steps are taken in blocks so the work is done by
    matrix-matrix products rather than a long chain of matrix-vector ones.
    """
    n = x0.size
    n_points = n_steps + 1
    values = None
    if weight_rows is not None:
        values = np.empty((weight_rows.shape[0], n_points), dtype=complex)
        values[:, 0] = weight_rows @ x0
    states = [x0.copy()] if keep_states else None

    if n_steps == 0:
        return values, states, x0.copy()

    prop = scipy.linalg.expm(lmat * dt)
    m = min(block, n_steps)
    cols = np.empty((n, m), dtype=complex)
    x = x0
    for j in range(m):
        x = prop @ x
        cols[:, j] = x

    def emit(block_cols, first_step, take):
        if weight_rows is not None:
            values[:, first_step : first_step + take] = weight_rows @ block_cols[:, :take]
        if keep_states:
            for j in range(take):
                states.append(block_cols[:, j].copy())

    emit(cols, 1, m)
    done = m
    if done < n_steps:
        prop_m = np.linalg.matrix_power(prop, m)
        while done < n_steps:
            cols = prop_m @ cols
            take = min(m, n_steps - done)
            emit(cols, done + 1, take)
            done += take
    x_final = cols[:, (n_steps - 1) % m].copy()
    return values, states, x_final


def _adaptive_scan(
    liouvillian: Liouvillian,
    x0: np.ndarray,
    times: np.ndarray,
    rtol: float,
    atol: float,
) -> np.ndarray:
    """Adaptive integration of dx/dt = L x; returns x at each requested time."""
    sol = scipy.integrate.solve_ivp(
        lambda _t, y: liouvillian.apply_vec(y),
        (times[0], times[-1]),
        x0,
        method="DOP853",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StiffnessError(
            f"adaptive integration failed ({sol.message}); "
            "retry with method='expm' on a uniform grid"
        )
    return sol.y


def evolve(
    liouvillian: Liouvillian,
    rho0: DensityMatrix,
    times,
    method: str = "adaptive",
    observables: dict[str, QOperator] | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Trajectory:
    """Propagate a density matrix over the requested times.

    ``method="adaptive"`` integrates with the fixed tolerance contract;
    ``method="expm"`` steps with the exact matrix exponential and requires a
    uniform grid. With ``observables`` given (name -> operator), expectation
    records are stored instead of per-time states.
    """
    if rho0.space != liouvillian.space:
        raise ValueError("initial state lives on a different space")
    times = np.asarray(times, dtype=float)
    _check_times(times)
    d = liouvillian.space.total_dim
    x0 = _vec(np.asarray(rho0.matrix))
    keep_states = observables is None

    weight_rows = None
    names: list[str] = []
    if observables is not None:
        names = list(observables)
        weight_rows = np.empty((len(names), d * d), dtype=complex)
        for r, name in enumerate(names):
            op = observables[name]
            if op.space != liouvillian.space:
                raise ValueError(f"observable {name!r} lives on a different space")
            weight_rows[r] = _vec(np.ascontiguousarray(op.matrix.T))

    if method == "expm":
        if not _is_uniform(times):
            raise ValueError("expm propagation requires a uniform time grid")
        dt = float(times[1] - times[0]) if times.size > 1 else 0.0
        values, cols, x_final = _expm_scan(
            liouvillian.matrix, x0, times.size - 1, dt,
            weight_rows=weight_rows, keep_states=keep_states,
        )
        columns = cols if keep_states else None
    elif method == "adaptive":
        y = _adaptive_scan(liouvillian, x0, times, rtol, atol)
        values = weight_rows @ y if weight_rows is not None else None
        columns = [y[:, k] for k in range(times.size)] if keep_states else None
        x_final = y[:, -1]
    else:
        raise ValueError(f"unknown propagation method {method!r}")

    trace_row = _vec(np.eye(d, dtype=complex))
    if columns is not None:
        traces = np.array([trace_row @ c for c in columns])
    else:
        traces = np.array([trace_row @ x0, trace_row @ x_final])
    trace_drift = float(np.abs(traces - 1.0).max())
    if trace_drift > 1e-8:
        raise ValidationError(f"trace drift {trace_drift:.3e} exceeds 1e-8")

    space = liouvillian.space
    states = None
    if keep_states:
        states = [
            DensityMatrix(space, _sym(_unvec(c, d)), min_eig_floor=PROPAGATED_MIN_EIG)
            for c in columns
        ]
        final_state = states[-1]
    else:
        final_state = DensityMatrix(
            space, _sym(_unvec(x_final, d)), min_eig_floor=PROPAGATED_MIN_EIG
        )

    expectations = None
    if observables is not None:
        expectations = {name: values[r].copy() for r, name in enumerate(names)}

    return Trajectory(
        times=times,
        final_state=final_state,
        states=states,
        expectations=expectations,
        trace_drift=trace_drift,
        method=method,
    )


def _sym(mat: np.ndarray) -> np.ndarray:
    return (mat + mat.conj().T) / 2.0


def steady_state(liouvillian: Liouvillian, kernel_check: str = "auto") -> DensityMatrix:
    """Unique stationary state, via a trace-constrained kernel solve.

    The first row of the superoperator (a redundant row: the trace functional
    annihilates the generator) is replaced by the trace constraint and the
    resulting system solved directly. ``kernel_check`` controls the explicit
    kernel-dimension test: "always", "never", or "auto" (singular values are
    examined whenever the superoperator side is modest). A kernel of
    dimension > 1 is reported, never silently resolved.
    """
    lmat = liouvillian.matrix
    n = lmat.shape[0]
    d = liouvillian.space.total_dim

    if kernel_check not in ("auto", "always", "never"):
        raise ValueError("kernel_check must be 'auto', 'always' or 'never'")
    do_svd = kernel_check == "always" or (kernel_check == "auto" and n <= KERNEL_SVD_MAX_SIDE)
    if do_svd:
        sv = np.linalg.svd(lmat, compute_uv=False)
        tol = max(sv[0], 1.0) * n * np.finfo(float).eps
        kernel_dim = int(np.sum(sv < tol))
        if kernel_dim == 0:
            raise DegenerateSteadyStateError(
                f"no kernel found (smallest singular value {sv[-1]:.3e})"
            )
        if kernel_dim > 1:
            raise DegenerateSteadyStateError(
                f"kernel dimension {kernel_dim} > 1; steady state is not unique"
            )

    m = np.array(lmat, dtype=complex)
    trace_row = _vec(np.eye(d, dtype=complex))
    m[0, :] = trace_row
    b = np.zeros(n, dtype=complex)
    b[0] = 1.0
    try:
        lu, piv = scipy.linalg.lu_factor(m)
        x = scipy.linalg.lu_solve((lu, piv), b)
        # One refinement pass tightens the residual at negligible cost.
        x += scipy.linalg.lu_solve((lu, piv), b - m @ x)
    except scipy.linalg.LinAlgError as exc:
        raise DegenerateSteadyStateError(f"kernel solve failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise DegenerateSteadyStateError("kernel solve produced non-finite values")

    rho = _sym(_unvec(x, d))
    rho /= np.trace(rho).real
    residual = float(np.abs(liouvillian.apply(rho)).max())
    if residual > STEADY_RESIDUAL_TOL:
        raise DegenerateSteadyStateError(
            f"stationarity residual {residual:.3e} exceeds {STEADY_RESIDUAL_TOL}; "
            "the kernel is degenerate or the solve is ill-conditioned"
        )
    return DensityMatrix(liouvillian.space, rho)


def _trace_scan(
    liouvillian: Liouvillian,
    seed: np.ndarray,
    weight_ops: Sequence[QOperator],
    taus: np.ndarray,
    method: str = "auto",
    rtol: float = RTOL,
    atol: float = ATOL,
) -> np.ndarray:
    """tr(W_r exp(L tau) seed) for each weight operator and delay.

    The regression kernel shared by field correlations and second-order
    coherence. ``method="auto"`` picks exponential stepping on uniform grids
    and adaptive integration otherwise.
    """
    d = liouvillian.space.total_dim
    x0 = _vec(np.asarray(seed, dtype=complex))
    weight_rows = np.stack([_vec(np.ascontiguousarray(w.matrix.T)) for w in weight_ops])
    if method == "auto":
        method = "expm" if _is_uniform(taus) and taus.size > 2 else "adaptive"
    if method == "expm":
        if not _is_uniform(taus):
            raise ValueError("expm propagation requires a uniform delay grid")
        dt = float(taus[1] - taus[0]) if taus.size > 1 else 0.0
        values, _, _ = _expm_scan(
            liouvillian.matrix, x0, taus.size - 1, dt, weight_rows=weight_rows
        )
    elif method == "adaptive":
        y = _adaptive_scan(liouvillian, x0, taus, rtol, atol)
        values = weight_rows @ y
    else:
        raise ValueError(f"unknown propagation method {method!r}")
    return values


def correlation(
    liouvillian: Liouvillian,
    rho_ss: DensityMatrix,
    a_op: QOperator,
    b_op: QOperator,
    taus,
    method: str = "auto",
) -> CorrelationSeries:
    """Stationary two-time correlation <A(tau) B(0)> by the regression rule.

    The operator-deformed state B rho_ss is propagated under the same
    generator and traced against A. The zero-delay value is the static
    expectation tr(A B rho_ss), computed directly.
    """
    if rho_ss.space != liouvillian.space:
        raise ValueError("stationary state lives on a different space")
    for op in (a_op, b_op):
        if op.space != liouvillian.space:
            raise ValueError("correlation operators live on a different space")
    residual = liouvillian.stationarity_residual(rho_ss)
    if residual > STATIONARITY_TOL:
        raise NonStationaryStateError(
            f"state is not stationary (residual {residual:.3e} > {STATIONARITY_TOL})"
        )
    taus = np.asarray(taus, dtype=float)
    if taus.size == 0 or taus[0] != 0.0 or np.any(np.diff(taus) <= 0):
        raise ValueError("delays must start at 0 and increase strictly")

    seed = b_op.matrix @ rho_ss.matrix
    values = _trace_scan(liouvillian, seed, [a_op], taus, method=method)[0]
    values = np.array(values, dtype=complex)
    values[0] = np.trace(a_op.matrix @ seed)
    return CorrelationSeries(
        taus,
        values,
        metadata={"method": method, "stationarity_residual": residual},
    )
