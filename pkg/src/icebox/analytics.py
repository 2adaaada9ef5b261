"""Closed-form results usable as independent oracles against the numerics.

Everything here is a pure function of model parameters: the invariant-subspace
solution of the non-local search model, its transfer probability and mean
search time, the early-time single-excitation amplitudes of the toy model,
the self-consistent wave-packet iteration, and the reflection-product
equivalence check for the projector Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, pi, sqrt

import numpy as np

from .basis import COMPOSITE, SystemDims
from .errors import DomainError, NumericalError
from .operators import build_effective_4x4
from .states import StateVector

RESONANCE_THRESHOLD = 1e-6


# ---------------------------------------------------------------------------
# non-local search model: invariant 4-state subspace
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EffectiveBasis:
    """Amplitudes on the invariant four-state basis (|Y>, |beta>, |alpha>, |G>).

    |G> is the double well, |alpha| collects the remaining states with the
    bath in its ground label, |beta> those with the system on target, and
    |Y> everything else; the four composite vectors are orthonormal.
    """

    y: complex
    beta: complex
    alpha: complex
    g: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.y, self.beta, self.alpha, self.g], dtype=np.complex128)

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def ground_probability(self) -> float:
        """Weight on the target system label: |G> plus the |beta> bundle."""
        return float(abs(self.g) ** 2 + abs(self.beta) ** 2)


def nonlocal_frequency(N_s: int, N_b: int) -> float:
    """Oscillation frequency sqrt((N_s + N_b) / N_c) of the transfer cycle."""
    return sqrt((N_s + N_b) / (N_s * N_b))


def nonlocal_wavefunction(N_s: int, N_b: int, t: float) -> EffectiveBasis:
    """Large-N closed form of the evolved state from the uniform start.

    Normalized only up to O(1/N) corrections; the exact alternative is to
    propagate the ``build_effective_4x4`` matrix.
    """
    if N_s < 2 or N_b < 2:
        raise DomainError(f"need N_s, N_b >= 2, got ({N_s}, {N_b})")
    w = nonlocal_frequency(N_s, N_b)
    rest = sqrt((N_s - 1) / N_s) * np.exp(-1j * t)
    c, s = np.cos(w * t), np.sin(w * t)
    return EffectiveBasis(
        y=rest * 1j * sqrt(N_s / (N_s + N_b)) * s,
        beta=rest * sqrt(N_s * N_b) * (c - 1.0) / (N_s + N_b),
        alpha=rest * (N_s * c + N_b) / (N_s + N_b),
        g=np.exp(-2j * t) * sqrt(1.0 / N_s),
    )


def nonlocal_ground_probability(N_s: int, N_b: int, t) -> np.ndarray | float:
    """Transfer probability ``4 N_s N_b / (N_s+N_b)^2 * sin^4(w t / 2)``."""
    if N_s < 2 or N_b < 2:
        raise DomainError(f"need N_s, N_b >= 2, got ({N_s}, {N_b})")
    w = nonlocal_frequency(N_s, N_b)
    amp = 4.0 * N_s * N_b / (N_s + N_b) ** 2
    return amp * np.sin(w * np.asarray(t) / 2.0) ** 4


def mean_search_time(N_s: int, N_b: int) -> float:
    """Expected time to hit the target: ``pi (N_s+N_b)^1.5 / (4 sqrt(N_s N_b))``.

    Minimized over the bath size at ``N_b = N_s / 2`` where it equals
    ``2.04 sqrt(N_s)``.
    """
    if N_s < 2 or N_b < 2:
        raise DomainError(f"need N_s, N_b >= 2, got ({N_s}, {N_b})")
    return pi * (N_s + N_b) ** 1.5 / (4.0 * sqrt(N_s * N_b))


def effective_eigensystem(N_s: int, N_b: int, form: str = "exact"):
    """Eigenvalues (ascending) and eigenvector columns of the 4x4 block.

    ``form="exact"`` diagonalizes the exact matrix numerically;
    ``form="large-n"`` returns the closed-form limit: energies
    ``{-2, -1-w, -1, -1+w}`` with ``w = sqrt((N_s+N_b)/N_c)`` and vectors
    written in the (|Y>, |beta>, |alpha>, |G>) order.
    """
    if form == "exact":
        mat = build_effective_4x4(N_s, N_b)
        vals, vecs = np.linalg.eigh(mat)
        return vals, vecs
    if form != "large-n":
        raise DomainError(f"unknown form {form!r}")
    if N_s < 2 or N_b < 2:
        raise DomainError(f"need N_s, N_b >= 2, got ({N_s}, {N_b})")
    w = nonlocal_frequency(N_s, N_b)
    tot = N_s + N_b
    vals = np.array([-2.0, -1.0 - w, -1.0, -1.0 + w])
    vecs = np.array(
        [
            [0.0, 1 / sqrt(2), 0.0, -1 / sqrt(2)],
            [0.0, sqrt(N_b / (2 * tot)), -sqrt(N_s / tot), sqrt(N_b / (2 * tot))],
            [0.0, sqrt(N_s / (2 * tot)), sqrt(N_b / tot), sqrt(N_s / (2 * tot))],
            [1.0, 0.0, 0.0, 0.0],
        ]
    )
    return vals, vecs


def effective_basis_vectors(dims: SystemDims, g_s: int, g_b: int) -> np.ndarray:
    """The four invariant composite vectors as rows (Y, beta, alpha, G)."""
    N_s, N_b = dims.N_s, dims.N_b
    if not 0 <= g_s < N_s:
        raise DomainError(f"g_s={g_s} out of range [0, {N_s})")
    if not 0 <= g_b < N_b:
        raise DomainError(f"g_b={g_b} out of range [0, {N_b})")
    grid = np.zeros((4, N_s, N_b))
    grid[0, :, :] = 1.0
    grid[0, g_s, :] = 0.0
    grid[0, :, g_b] = 0.0
    grid[1, g_s, :] = 1.0
    grid[1, g_s, g_b] = 0.0
    grid[2, :, g_b] = 1.0
    grid[2, g_s, g_b] = 0.0
    grid[3, g_s, g_b] = 1.0
    flat = grid.reshape(4, -1)
    return flat / np.linalg.norm(flat, axis=1, keepdims=True)


def project_effective(psi: StateVector, g_s: int, g_b: int) -> EffectiveBasis:
    """Overlap of a composite state with the invariant four-state basis."""
    if psi.space != COMPOSITE:
        raise DomainError("effective-basis projection needs a composite state")
    basis = effective_basis_vectors(psi.dims, g_s, g_b)
    amps = basis @ psi.amplitudes
    return EffectiveBasis(y=amps[0], beta=amps[1], alpha=amps[2], g=amps[3])


def evolve_effective(N_s: int, N_b: int, amps0: np.ndarray, times) -> np.ndarray:
    """Exact propagation inside the 4-state block; rows are snapshots."""
    vals, vecs = effective_eigensystem(N_s, N_b, form="exact")
    coeff = vecs.conj().T @ np.asarray(amps0, dtype=np.complex128)
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), vals))
    return (phases * coeff) @ vecs.T


# ---------------------------------------------------------------------------
# toy model: early-time single-excitation amplitudes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpinWaveSetup:
    """Couplings and detunings of the single-excitation manifold.

    ``detunings[k]`` is the energy mismatch of transferring the system
    excitation into bath mode ``k``; entries below the resonance threshold
    (times t) take the linear-in-t branch.
    """

    couplings: np.ndarray
    detunings: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        couplings = np.asarray(self.couplings, dtype=np.complex128)
        detunings = np.asarray(self.detunings, dtype=float)
        labels = np.asarray(self.labels)
        if not (len(couplings) == len(detunings) == len(labels)):
            raise DomainError("couplings, detunings and labels must have equal length")
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "detunings", detunings)
        object.__setattr__(self, "labels", labels)


def toy_model_spinwave(n_b: int, J: float, B: float, lam: float) -> SpinWaveSetup:
    """Single-excitation reduction of the toy model on a periodic chain.

    Mode k of the chain has excitation energy ``4J(1 - cos k)`` above the
    aligned ground state, transferring the system spin releases ``2B``, and
    the site-c coupling gives ``lambda_k = lam * exp(-i k c) / sqrt(n_b)``
    with c the middle site.
    """
    if n_b < 3:
        raise DomainError(f"toy model needs n_b >= 3, got {n_b}")
    c = n_b // 2
    ks = 2.0 * pi * np.arange(n_b) / n_b
    detunings = -2.0 * B + 4.0 * J * (1.0 - np.cos(ks))
    couplings = lam * np.exp(-1j * ks * c) / sqrt(n_b)
    return SpinWaveSetup(couplings=couplings, detunings=detunings, labels=ks)


def magnon_mode_amplitudes(psi: StateVector, system_index: int = 0) -> np.ndarray:
    """Overlaps with |system_index> x |one excitation in chain mode k>."""
    if psi.space != COMPOSITE:
        raise DomainError("magnon projection needs a composite state")
    n_b = psi.dims.n_b
    row = psi.amplitudes.reshape(psi.dims.N_s, psi.dims.N_b)[system_index]
    site_amps = row[1 << np.arange(n_b)]
    ks = 2.0 * pi * np.arange(n_b) / n_b
    phases = np.exp(-1j * np.outer(ks, np.arange(n_b)))
    return phases @ site_amps / sqrt(n_b)


def spinwave_perturbative(setup: SpinWaveSetup, t: float) -> tuple[complex, np.ndarray]:
    """First-order amplitudes ``(b_g, b_k array)`` at time t.

    ``b_k = (lambda_k / dE_k)(exp(-i dE_k t) - 1)`` with the resonant branch
    ``b_k = -i lambda_k t`` whenever ``|dE_k| t`` is below the threshold, and
    ``b_g = 1 - 2 sum_k (|lambda_k|^2 / dE_k^2) sin^2(dE_k t / 2)``.
    """
    if t < 0:
        raise DomainError("time must be non-negative")
    de = setup.detunings
    lam = setup.couplings
    resonant = np.abs(de) * t < RESONANCE_THRESHOLD
    safe = np.where(resonant, 1.0, de)
    b_k = np.where(
        resonant,
        -1j * lam * t,
        lam / safe * (np.exp(-1j * de * t) - 1.0),
    )
    weights = np.where(
        resonant,
        np.abs(lam) ** 2 * t * t / 2.0,
        2.0 * np.abs(lam) ** 2 / safe**2 * np.sin(de * t / 2.0) ** 2,
    )
    b_g = 1.0 - float(weights.sum())
    return complex(b_g), b_k


# ---------------------------------------------------------------------------
# wave-packet iteration over Hamming shells
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IterationSolution:
    """Self-consistent shell amplitudes at one iteration order.

    ``ratios[h-1]`` holds b_h = a_h / a_{h-1} for h = 1..h_max and
    ``amplitudes[h]`` the a_h chain products, normalized with binomial shell
    degeneracies: sum_h C(n_s, h) a_h^2 = 1.
    """

    order: int
    n_s: int
    lam: float
    ratios: np.ndarray
    amplitudes: np.ndarray
    energy: float
    normalization: float


def wavepacket_iteration(
    n_s: int, lam: float, order: int, h_max: int | None = None
) -> IterationSolution:
    """Iterated tight-binding solution of the single-well shell recurrence.

    Starting from b_h = 0, each sweep maps
    ``b_h <- h lam / (1 + n_s lam b_1 - (n_s - h) lam b_{h+1})`` and the
    well energy is ``E = -1 - n_s lam b_1``.  Orders beyond 3 are not
    implemented; the series is only controlled deep in the localized regime.
    """
    if order not in (1, 2, 3):
        raise DomainError(f"iteration order must be 1, 2 or 3, got {order}")
    if n_s < 1:
        raise DomainError(f"need n_s >= 1, got {n_s}")
    h_max = n_s if h_max is None else h_max
    if not 1 <= h_max <= n_s:
        raise DomainError(f"h_max={h_max} out of range [1, {n_s}]")

    hs = np.arange(1, n_s + 1, dtype=float)
    b = np.zeros(n_s + 1)  # b[h-1] is the current b_h; one slot of padding
    for _ in range(order):
        b1 = b[0]
        denom = 1.0 + n_s * lam * b1 - (n_s - hs) * lam * b[1 : n_s + 1]
        bad = np.nonzero(np.abs(denom) < 1e-14)[0]
        if len(bad) > 0:
            raise NumericalError(
                "vanishing denominator in the shell iteration", h=int(bad[0] + 1)
            )
        b = np.concatenate([hs * lam / denom, [0.0]])
    ratios = b[:h_max]
    energy = -1.0 - n_s * lam * b[0]

    chain = np.concatenate([[1.0], np.cumprod(ratios)])
    weights = np.array([comb(n_s, h) for h in range(h_max + 1)], dtype=float)
    normalization = float(weights @ chain**2)
    amplitudes = chain / sqrt(normalization)
    return IterationSolution(
        order=order,
        n_s=n_s,
        lam=lam,
        ratios=ratios,
        amplitudes=amplitudes,
        energy=float(energy),
        normalization=normalization,
    )


def first_order_amplitude_stirling(n_s: int, h: int, normalization: float) -> float:
    """Stirling form of the first-order chain ``a_h ~ (h!/n_s^h)`` at lam = 1/n_s.

    Valid for 1 <= h and h/n_s < 0.2.
    """
    if h < 1:
        raise DomainError("the Stirling form needs h >= 1")
    return sqrt(2.0 * pi * h / normalization) * (h / (np.e * n_s)) ** h


# ---------------------------------------------------------------------------
# reflection-product equivalence for the projector Hamiltonian
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroverReport:
    """Per-step comparison of the two search walks from the uniform state.

    Arrays are indexed by step count 0..steps: the product of reflections
    ``U = R_xi R_g`` versus ``exp(-i pi H)`` with ``H = -|g><g| - |xi><xi|``.
    ``step_fidelity[m]`` is ``|<psi_U(m)|psi_H(m)>|``.
    """

    n_qubits: int
    target: int
    steps: int
    step_fidelity: np.ndarray
    success_unitary: np.ndarray
    success_hamiltonian: np.ndarray


def grover_equivalence(n_qubits: int, target: int, steps: int) -> GroverReport:
    """Run both walks densely and report fidelities and success probabilities."""
    if not 1 <= n_qubits <= 12:
        raise DomainError(f"dense regime is 1 <= n <= 12 qubits, got {n_qubits}")
    dim = 1 << n_qubits
    if not 0 <= target < dim:
        raise DomainError(f"target {target} out of range [0, {dim})")
    if steps < 0:
        raise DomainError("steps must be non-negative")

    xi = np.full(dim, 1.0 / sqrt(dim))
    s = xi[target]  # overlap <xi|target>
    psi_u = xi.astype(np.complex128)
    psi_h = xi.astype(np.complex128)

    g_axis = np.zeros(dim, dtype=np.complex128)
    g_axis[target] = 1.0
    xi_axis = xi.astype(np.complex128)
    # both walks act as the identity outside span{|g>, |xi>}; exp(-i pi H) is
    # applied exactly via the eigenpairs (|g> +/- |xi>) with energies -(1 +/- s)
    v_plus = (g_axis + xi_axis) / np.linalg.norm(g_axis + xi_axis)
    v_minus = (g_axis - xi_axis) / np.linalg.norm(g_axis - xi_axis)
    phase_plus = np.exp(1j * pi * (1.0 + s))
    phase_minus = np.exp(1j * pi * (1.0 - s))

    def reflect(vec: np.ndarray, axis: np.ndarray) -> np.ndarray:
        return vec - 2.0 * axis * np.vdot(axis, vec)

    def step_hamiltonian(vec: np.ndarray) -> np.ndarray:
        cp, cm = np.vdot(v_plus, vec), np.vdot(v_minus, vec)
        rest = vec - cp * v_plus - cm * v_minus
        return rest + phase_plus * cp * v_plus + phase_minus * cm * v_minus

    fid = [1.0]
    succ_u = [float(abs(psi_u[target]) ** 2)]
    succ_h = [float(abs(psi_h[target]) ** 2)]
    for _ in range(steps):
        psi_u = reflect(reflect(psi_u, g_axis), xi_axis)
        psi_h = step_hamiltonian(psi_h)
        fid.append(float(abs(np.vdot(psi_u, psi_h))))
        succ_u.append(float(abs(psi_u[target]) ** 2))
        succ_h.append(float(abs(psi_h[target]) ** 2))
    return GroverReport(
        n_qubits=n_qubits,
        target=target,
        steps=steps,
        step_fidelity=np.array(fid),
        success_unitary=np.array(succ_u),
        success_hamiltonian=np.array(succ_h),
    )
