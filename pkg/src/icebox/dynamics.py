"""Time propagation, observables and spectral analysis of observable records.

The default propagator is a Lanczos (Krylov) approximation of the matrix
exponential: matrix-free, adaptive in subspace dimension, with an a-posteriori
per-substep error estimate.  A dense eigendecomposition path exists as the
oracle for small dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.signal import find_peaks, peak_widths

from .basis import COMPOSITE, SystemDims
from .errors import DomainError, NumericalError
from .operators import OperatorSpec
from .states import NORM_TOL, StateVector, global_bit

DENSE_PROPAGATOR_LIMIT = 1 << 12
_BREAKDOWN = 1e-13


@dataclass(frozen=True)
class PropagatorConfig:
    """Propagation method and accuracy knobs.

    ``step`` bounds one Lanczos substep; when omitted it is chosen so that
    ``norm_bound(H) * step <= 10``.  ``tolerance`` is the per-substep error
    budget, so the global error grows like ``tolerance * (t / step)``.
    """

    method: str = "krylov"
    step: float | None = None
    tolerance: float = 1e-10
    krylov_dim: int = 30

    def __post_init__(self):
        if self.method not in ("krylov", "dense"):
            raise DomainError(f"unknown propagator method {self.method!r}")
        if self.tolerance <= 0:
            raise DomainError("tolerance must be positive")
        if self.step is not None and self.step <= 0:
            raise DomainError("step must be positive")
        if self.krylov_dim < 2:
            raise DomainError("krylov_dim must be at least 2")


def _lanczos_substep(
    apply_h, psi: np.ndarray, tau: float, tol: float, max_dim: int
) -> tuple[np.ndarray, float, int]:
    """One step ``exp(-i tau H) psi`` in an adaptively grown Krylov subspace.

    Returns (new state, error estimate, dimension used).  Raises
    ``NumericalError`` if the subspace cap is hit before the estimate drops
    below ``tol``; callers then halve ``tau`` and retry.
    """
    beta0 = np.linalg.norm(psi)
    basis = np.empty((max_dim, len(psi)), dtype=np.complex128)
    basis[0] = psi / beta0
    alphas = np.empty(max_dim)
    betas = np.empty(max_dim)
    y = None
    err = np.inf
    k = 0
    for j in range(max_dim):
        k = j + 1
        w = apply_h(basis[j])
        alphas[j] = np.vdot(basis[j], w).real
        # full reorthogonalization (one blocked pass): the near-degenerate
        # doublets here shed orthogonality quickly without it
        w -= (basis[:k] @ w.conj()).conj() @ basis[:k]
        b = float(np.linalg.norm(w))
        t_eig, t_vec = eigh_tridiagonal(alphas[:k], betas[: k - 1])
        y = (t_vec * np.exp(-1j * tau * t_eig)) @ t_vec[0].conj()
        err = b * abs(y[-1])
        if b < _BREAKDOWN * max(1.0, abs(alphas[j])):
            err = 0.0  # invariant subspace: the result is exact
            break
        if j >= 1 and err <= tol:
            break
        if k < max_dim:
            betas[j] = b
            basis[k] = w / b
    if err > tol:
        raise NumericalError(
            "Krylov step did not converge",
            tau=tau,
            dim=k,
            error_estimate=err,
            tolerance=tol,
        )
    return beta0 * (y @ basis[:k]), err, k


def _krylov_interval(apply_h, psi, dt, step_max, tol, max_dim):
    """Propagate across ``dt`` in substeps, halving on non-convergence."""
    remaining = float(dt)
    while remaining > 1e-15:
        tau = min(remaining, step_max)
        attempts = 0
        while True:
            try:
                psi, _, _ = _lanczos_substep(apply_h, psi, tau, tol, max_dim)
                break
            except NumericalError:
                attempts += 1
                tau /= 2.0
                if attempts > 30:
                    raise
        remaining -= tau
    return psi


class DensePropagator:
    """Exact propagation through one eigendecomposition (oracle path)."""

    def __init__(self, op: OperatorSpec):
        if op.dim > DENSE_PROPAGATOR_LIMIT:
            raise DomainError(
                f"dense propagator refused for dim {op.dim} > {DENSE_PROPAGATOR_LIMIT}"
            )
        self._eigvals, self._eigvecs = np.linalg.eigh(op.dense())

    def propagate(self, psi0: np.ndarray, t: float) -> np.ndarray:
        coeff = self._eigvecs.conj().T @ psi0
        return self._eigvecs @ (np.exp(-1j * t * self._eigvals) * coeff)


def evolve(
    op: OperatorSpec,
    psi0: StateVector,
    times: Sequence[float],
    config: PropagatorConfig = PropagatorConfig(),
) -> list[StateVector]:
    """Snapshots of ``exp(-i H t) psi0`` on an increasing time grid."""
    if psi0.space != op.space or psi0.dim != op.dim:
        raise DomainError("state and operator live on different spaces")
    if abs(psi0.norm() - 1.0) > NORM_TOL:
        raise DomainError(f"initial state is not normalized (norm={psi0.norm()})")
    grid = np.asarray(times, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise DomainError("times must be a non-empty 1-d grid")
    if np.any(np.diff(grid) < 0):
        raise DomainError("times must be non-decreasing")
    if grid[0] < 0:
        raise DomainError("times must be non-negative")

    snapshots: list[StateVector] = []
    if config.method == "dense":
        prop = DensePropagator(op)
        for t in grid:
            snapshots.append(StateVector(prop.propagate(psi0.amplitudes, t), op.space, op.dims))
        return snapshots

    bound = op.norm_bound()
    step_max = config.step if config.step is not None else (10.0 / bound if bound > 0 else 1.0)
    psi = psi0.amplitudes.astype(np.complex128)
    t_now = 0.0
    for t in grid:
        dt = t - t_now
        if dt > 0:
            psi = _krylov_interval(
                op.apply, psi, dt, step_max, config.tolerance, config.krylov_dim
            )
            t_now = t
        snapshots.append(StateVector(psi, op.space, op.dims))
    return snapshots


def audit_evolution(op: OperatorSpec, snapshots: Sequence[StateVector]) -> dict:
    """Max drift of the norm and of <H> across a snapshot record."""
    norms = np.array([s.norm() for s in snapshots])
    energies = np.array([op.expectation(s.amplitudes) for s in snapshots])
    return {
        "max_norm_drift": float(np.abs(norms - 1.0).max()),
        "max_energy_drift": float(np.abs(energies - energies[0]).max()),
    }


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


def ground_state_probability(psi: StateVector, g_s: int, dims: SystemDims | None = None) -> float:
    """Probability that a system measurement lands on label ``g_s``,
    summed over every bath configuration."""
    dims = dims or psi.dims
    if psi.space != COMPOSITE:
        raise DomainError("ground-state probability needs a composite state")
    if not 0 <= g_s < dims.N_s:
        raise DomainError(f"g_s={g_s} out of range [0, {dims.N_s})")
    row = psi.amplitudes.reshape(dims.N_s, dims.N_b)[g_s]
    return float(np.real(np.vdot(row, row)))


def local_magnetization(psi: StateVector, register: str, qubit: int) -> float:
    """Expectation of sigma^z on one qubit, in [-1, 1]."""
    bit = global_bit(psi.dims, psi.space, register, qubit)
    v = psi.amplitudes.reshape(-1, 2, 1 << bit)
    up = float(np.sum(np.abs(v[:, 1, :]) ** 2))
    down = float(np.sum(np.abs(v[:, 0, :]) ** 2))
    return up - down


def magnetization_profile(psi: StateVector, register: str) -> np.ndarray:
    """sigma^z expectation for every qubit of one register."""
    n = psi.dims.n_s if register == "system" else psi.dims.n_b
    return np.array([local_magnetization(psi, register, m) for m in range(n)])


# ---------------------------------------------------------------------------
# time series and spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled observable record."""

    t0: float
    dt: float
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or len(values) < 2:
            raise DomainError("a time series needs at least two samples")
        if self.dt <= 0:
            raise DomainError("dt must be positive")
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    def to_csv(self, path) -> None:
        """Write ``t,value`` rows at full double precision."""
        with open(path, "w") as fh:
            fh.write("t,value\n")
            for t, v in zip(self.times, self.values):
                fh.write(f"{t:.17g},{float(np.real(v)):.17g}\n")


@dataclass(frozen=True)
class Peak:
    frequency: float
    magnitude: float
    width: float


@dataclass(frozen=True)
class SpectrumResult:
    """One-sided magnitude spectrum; frequencies are angular (rad / time)."""

    frequencies: np.ndarray
    magnitudes: np.ndarray
    peaks: list[Peak] = field(default_factory=list)

    def peak_frequencies(self) -> np.ndarray:
        return np.array([p.frequency for p in self.peaks])


def fourier_spectrum(
    series: TimeSeries,
    window: str = "hann",
    zero_pad: int = 4,
    prominence: float = 0.02,
) -> SpectrumResult:
    """Magnitude spectrum of a mean-subtracted record with peak extraction.

    Hann windowing and 4x zero padding are the defaults because closely
    spaced tunneling lines need the leakage control; both are overridable.
    Peaks are local maxima with prominence above ``prominence * max``.
    """
    y = np.asarray(series.values, dtype=float)
    if len(y) < 16:
        raise DomainError(f"need at least 16 samples, got {len(y)}")
    if zero_pad < 1:
        raise DomainError("zero_pad factor must be >= 1")
    y = y - y.mean()
    if window == "hann":
        y = y * np.hanning(len(y))
    elif window != "none":
        raise DomainError(f"unknown window {window!r}")
    n_fft = zero_pad * len(y)
    mags = np.abs(np.fft.rfft(y, n_fft))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n_fft, series.dt)

    peaks: list[Peak] = []
    top = mags.max()
    if top > 0:
        idx, _ = find_peaks(mags, prominence=prominence * top)
        if len(idx) > 0:
            widths = peak_widths(mags, idx, rel_height=0.5)[0]
            df = freqs[1] - freqs[0]
            peaks = [
                Peak(frequency=float(freqs[i]), magnitude=float(mags[i]), width=float(w * df))
                for i, w in zip(idx, widths)
            ]
            peaks.sort(key=lambda p: p.magnitude, reverse=True)
    return SpectrumResult(frequencies=freqs, magnitudes=mags, peaks=peaks)
