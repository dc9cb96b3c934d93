"""Observables: eigenvalue scans, heterodyne power spectra, second-order
coherence and photon population imbalance.

Spectra are one-sided Fourier transforms of stationary correlations evaluated
on a uniform delay grid; no window function is applied (the correlations decay
through the cavity loss), so spectra are bit-reproducible and a warning is
attached instead when the window is too short.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .dynamics import Liouvillian, _trace_scan, correlation, evolve
from .errors import UndefinedCoherenceError
from .hilbert import (
    DensityMatrix,
    QOperator,
    SpaceSpec,
    annihilation,
    eigen_lowest_states,
    expectation,
    number_operator,
    qubit_lowering,
)
from .model import build_dimensionless_hamiltonian
from .series import CorrelationSeries, ImbalanceSeries, SpectrumSeries

__all__ = [
    "EigenScanTable",
    "WindowScan",
    "eigen_scan",
    "single_mode_window",
    "power_spectrum",
    "spectrum_peaks",
    "find_reference_state",
    "g2",
    "imbalance",
]

DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class EigenScanTable:
    """Lowest eigenvalues per frequency-mismatch point; one row per delta."""

    deltas: np.ndarray
    energies: np.ndarray  # shape (len(deltas), count)


def eigen_row(
    k: float,
    delta: float,
    count: int,
    space: SpaceSpec,
    include_quadratic: bool = True,
    j_override: float | None = None,
) -> np.ndarray:
    """Lowest ``count`` eigenvalues at a single (k, delta) point.

    A module-level function so grid sweeps can be dispatched to worker
    processes; each point is independent.
    """
    h = build_dimensionless_hamiltonian(
        space, k, delta, include_quadratic=include_quadratic, j_override=j_override
    )
    values, _ = eigen_lowest_states(h, count)
    return values


def eigen_scan(
    k: float,
    delta_grid,
    count: int,
    space: SpaceSpec,
    include_quadratic: bool = True,
    j_override: float | None = None,
) -> EigenScanTable:
    """Sweep the frequency mismatch and collect the lowest eigenvalues."""
    deltas = np.asarray(delta_grid, dtype=float)
    if deltas.size == 0:
        raise ValueError("delta grid must be nonempty")
    if not np.all(np.isfinite(deltas)):
        raise ValueError("delta grid must be finite")
    if not 0 < count <= space.total_dim:
        raise ValueError(f"count must be in [1, {space.total_dim}]")
    energies = np.empty((deltas.size, count))
    for i, delta in enumerate(deltas):
        energies[i] = eigen_row(
            k, float(delta), count, space,
            include_quadratic=include_quadratic, j_override=j_override,
        )
    return EigenScanTable(deltas=deltas, energies=energies)


@dataclass(frozen=True)
class WindowScan:
    """Inter-mode mixing of the low eigenstates across the mismatch grid.

    ``mixing`` measures, per mismatch point, how far any of the tracked
    eigenstates strays from an integer disadvantaged-mode occupation: inside
    the single-effective-mode window every low eigenstate is a pure
    privileged-mode/qubit excitation or a pure spectator photon (integer
    occupation, mixing near 0); level repulsion hybridizes the branches and
    pulls the occupation toward half-integers (mixing near 0.5).
    ``half_width`` is the extent of the contiguous low-mixing region
    around zero mismatch.
    """

    deltas: np.ndarray
    mixing: np.ndarray
    half_width: float
    threshold: float


def single_mode_window(
    k: float,
    delta_grid,
    space: SpaceSpec,
    count: int = 3,
    threshold: float = 0.25,
    include_quadratic: bool = True,
) -> WindowScan:
    """Measure how far in |delta| the low spectrum stays single-mode.

    For each mismatch the lowest ``count`` eigenstates are examined and the
    largest distance of their disadvantaged-mode occupation from an integer
    is recorded; the window ends where that mixing exceeds ``threshold``.
    The default tracks the ground state and the split first-excitation pair;
    higher levels of the strongly coupled spectrum contain near-degenerate
    spectator pairs that hybridize at any mismatch and would mask the window.
    """
    deltas = np.asarray(delta_grid, dtype=float)
    n2 = number_operator(space, 1)
    mixing = np.empty(deltas.size)
    for i, delta in enumerate(deltas):
        h = build_dimensionless_hamiltonian(
            space, k, float(delta), include_quadratic=include_quadratic
        )
        _, vectors = eigen_lowest_states(h, count)
        occ = np.real(np.einsum("ij,ik,kj->j", vectors.conj(), n2.matrix, vectors))
        mixing[i] = np.abs(occ - np.round(occ)).max()
    center = int(np.argmin(np.abs(deltas)))
    if mixing[center] >= threshold:
        half_width = 0.0
    else:
        right = center
        while right + 1 < deltas.size and mixing[right + 1] < threshold:
            right += 1
        left = center
        while left - 1 >= 0 and mixing[left - 1] < threshold:
            left -= 1
        half_width = float(min(deltas[right], -deltas[left]))
    return WindowScan(
        deltas=deltas, mixing=mixing, half_width=half_width, threshold=threshold,
    )


def power_spectrum(
    liouvillian: Liouvillian,
    rho_ss: DensityMatrix,
    mode: str = "privileged",
    tau_max: float = 1000.0,
    n_samples: int = 4096,
    ordering: str = "emission",
    method: str = "auto",
    metadata: dict | None = None,
) -> SpectrumSeries:
    """One-sided power spectrum of the stationary mode correlation.

    P(omega) = 2 Re int_0^inf C(tau) exp(-i omega tau) dtau, evaluated by FFT
    on the uniform delay grid (the tau = 0 sample carries half weight, the
    trapezoid-consistent one-sided transform). ``ordering="emission"`` uses
    <a^dag(tau) a(0)>; ``ordering="as_printed"`` evaluates <a(tau) a(0)>,
    whose transform is not sign-definite, so the nonnegativity floor is not
    enforced for it.
    """
    if n_samples < 4 or n_samples & (n_samples - 1):
        raise ValueError("n_samples must be a power of two (>= 4)")
    if mode not in ("privileged", "disadvantaged"):
        raise ValueError("mode must be 'privileged' or 'disadvantaged'")
    if ordering not in ("emission", "as_printed"):
        raise ValueError("ordering must be 'emission' or 'as_printed'")
    mode_index = 0 if mode == "privileged" else 1

    run_warnings: list[str] = []
    diss = liouvillian.dissipation
    if diss is not None:
        kappa = diss.kappa1 if mode_index == 0 else diss.kappa2
        if kappa > 0 and tau_max < 10.0 / kappa:
            msg = (
                f"tau_max={tau_max:g} is below 10/kappa={10.0 / kappa:g}; "
                "spectral lines will be window-broadened"
            )
            run_warnings.append(msg)
            _warnings.warn(msg, stacklevel=2)

    a = annihilation(liouvillian.space, mode_index)
    if ordering == "emission":
        a_op, b_op = a.dag(), a
    else:
        a_op, b_op = a, a

    d_tau = tau_max / n_samples
    taus = np.arange(n_samples) * d_tau
    corr = correlation(liouvillian, rho_ss, a_op, b_op, taus, method=method)

    c0 = abs(corr.values[0])
    tail = np.abs(corr.values[-max(1, n_samples // 20):]).max()
    decayed = not (c0 > 0 and tail > 1e-6 * c0)
    if not decayed:
        run_warnings.append(
            f"correlation not decayed at tau_max (tail {tail / c0:.2e} of C(0)); "
            "spectrum carries truncation ringing"
        )

    weighted = np.array(corr.values, dtype=complex)
    weighted[0] *= 0.5
    power = 2.0 * d_tau * np.real(np.fft.fft(weighted))
    omegas = 2.0 * math.pi * np.fft.fftfreq(n_samples, d=d_tau)
    order = np.argsort(omegas)
    omegas = omegas[order]
    power = power[order]

    meta = dict(metadata or {})
    meta.update(
        mode=mode,
        ordering=ordering,
        tau_max=tau_max,
        n_samples=n_samples,
        d_tau=d_tau,
        frequency_resolution=2.0 * math.pi / tau_max,
        c0=complex(corr.values[0]),
    )
    # The nonnegativity floor is a property of fully decayed emission
    # correlations; truncation ringing from an undecayed window (already
    # flagged above) legitimately dips below it.
    return SpectrumSeries(
        omegas, power, metadata=meta, warnings=run_warnings,
        enforce_floor=(ordering == "emission" and decayed),
    )


def spectrum_peaks(series: SpectrumSeries, min_relative_prominence: float = 0.01):
    """Local maxima of a spectrum at grid resolution.

    Peaks are detected with a prominence threshold relative to the spectrum's
    full range; returns a list of (omega, power) tuples sorted by frequency.
    """
    values = series.values
    span = values.max() - values.min()
    if span <= 0:
        return []
    idx, _ = scipy.signal.find_peaks(values, prominence=min_relative_prominence * span)
    return [(float(series.omegas[i]), float(values[i])) for i in idx]


def find_reference_state(
    liouvillian: Liouvillian,
    rho0: DensityMatrix,
    step: float | None = None,
    tol: float = 1e-6,
    cap: float | None = None,
) -> tuple[float, DensityMatrix, bool]:
    """First time at which transients have settled, and the state there.

    Walks coarse exponential steps until the trace-norm change over one step
    drops below ``tol``. The default step and cap derive from the slowest
    decay channel (cap = 50 / rate, step = cap / 100). Returns
    (t_star, state, settled); when the cap is reached without settling the
    state at the cap is returned with ``settled=False``.
    """
    if rho0.space != liouvillian.space:
        raise ValueError("initial state lives on a different space")
    if cap is None or step is None:
        rate = None
        diss = liouvillian.dissipation
        if diss is not None:
            positive = [r for r in (diss.kappa1, diss.kappa2, diss.gamma) if r > 0]
            if not positive and diss.gamma_phi > 0:
                positive = [diss.gamma_phi]
            if positive:
                rate = min(positive)
        if cap is None:
            cap = 50.0 / rate if rate else 100.0
        if step is None:
            step = cap / 100.0
    if step <= 0 or cap <= 0:
        raise ValueError("step and cap must be positive")

    prop = scipy.linalg.expm(liouvillian.matrix * step)
    d = liouvillian.space.total_dim
    x = rho0.matrix.ravel(order="F")
    t = 0.0
    rho_prev = rho0.matrix
    while True:
        x = prop @ x
        rho_next = x.reshape((d, d), order="F")
        rho_next = (rho_next + rho_next.conj().T) / 2.0
        diff = float(np.abs(np.linalg.eigvalsh(rho_next - rho_prev)).sum())
        if diff < tol:
            return t, DensityMatrix(liouvillian.space, rho_prev), True
        t += step
        rho_prev = rho_next
        if t >= cap:
            return t, DensityMatrix(liouvillian.space, rho_next), False


def g2(
    liouvillian: Liouvillian,
    rho0: DensityMatrix,
    target: str = "resonator",
    taus=None,
    normalization: str = "standard",
    reference: tuple[float, DensityMatrix] | None = None,
    settle_step: float | None = None,
    settle_tol: float = 1e-6,
    settle_cap: float | None = None,
    method: str = "auto",
) -> CorrelationSeries:
    """Second-order coherence of the privileged mode or the qubit.

    The initial state is evolved to a reference time t* where transients have
    settled (recorded in the metadata), then the regression rule is applied
    twice: G2(tau) = tr[O^dag O exp(L tau)(O rho* O^dag)]. The
    ``normalization`` switch selects the denominator: "standard" divides by
    <O^dag O>^2, "first_order" by <O^dag O>.
    """
    if target not in ("resonator", "qubit"):
        raise ValueError("target must be 'resonator' or 'qubit'")
    if normalization not in ("standard", "first_order"):
        raise ValueError("normalization must be 'standard' or 'first_order'")
    taus = np.asarray(taus, dtype=float)
    if taus.size == 0 or taus[0] != 0.0 or np.any(np.diff(taus) <= 0):
        raise ValueError("delays must start at 0 and increase strictly")

    space = liouvillian.space
    if target == "resonator":
        op = annihilation(space, 0)
    else:
        if space.qubit_count < 1:
            raise ValueError("qubit target requires a qubit in the space")
        op = qubit_lowering(space)

    settled = True
    if reference is None:
        t_star, rho_star, settled = find_reference_state(
            liouvillian, rho0, step=settle_step, tol=settle_tol, cap=settle_cap
        )
    else:
        t_star, rho_star = reference

    nbar = expectation(op.dag() @ op, rho_star).real
    if nbar < DENOMINATOR_FLOOR:
        raise UndefinedCoherenceError(
            f"occupation {nbar:.3e} at the reference time is below {DENOMINATOR_FLOOR}"
        )

    seed = op.matrix @ rho_star.matrix @ op.matrix.conj().T
    weight = op.dag() @ op
    values = _trace_scan(liouvillian, seed, [weight], taus, method=method)[0].real
    values[0] = np.trace(weight.matrix @ seed).real

    denominator = nbar**2 if normalization == "standard" else nbar
    return CorrelationSeries(
        taus,
        values / denominator,
        metadata={
            "target": target,
            "normalization": normalization,
            "t_star": t_star,
            "settled": settled,
            "reference_occupation": nbar,
        },
    )


def imbalance(
    liouvillian: Liouvillian,
    rho0: DensityMatrix,
    times,
    method: str = "adaptive",
    rtol: float | None = None,
    atol: float | None = None,
) -> ImbalanceSeries:
    """Per-mode photon numbers and normalized imbalance over time."""
    space = liouvillian.space
    if space.n_modes != 2:
        raise ValueError("imbalance requires a two-mode space")
    extra = {}
    if rtol is not None:
        extra["rtol"] = rtol
    if atol is not None:
        extra["atol"] = atol
    traj = evolve(
        liouvillian,
        rho0,
        times,
        method=method,
        observables={
            "n1": number_operator(space, 0),
            "n2": number_operator(space, 1),
        },
        **extra,
    )
    n1 = traj.expectations["n1"].real
    n2 = traj.expectations["n2"].real
    return ImbalanceSeries(
        traj.times, n1, n2,
        metadata={"method": method, "trace_drift": traj.trace_drift},
    )
