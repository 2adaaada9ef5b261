"""Parity-block machinery for the locally coupled search model.

With equal registers the total Hamiltonian commutes with every
``s^z_m sigma^z_m`` pair, so the bitwise label ``nu = i_s XOR j_b`` is
conserved and the composite dynamics splits into 2^n_s independent blocks,
each an n_s-dimensional-hypercube double well.  This module reduces states
into blocks, solves for the two lowest block eigenpairs matrix-free, groups
eigenvector amplitudes by Hamming shell, and fits the frequency-versus-size
scaling law.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt
from typing import Callable, Sequence

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .basis import COMPOSITE, SystemDims, hamming_distance
from .errors import DomainError, NumericalError, UnsupportedInputError
from .operators import SubspaceProblem, build_reduced_hamiltonian, interaction_strength
from .states import StateVector

DENSE_GAP_LIMIT = 64  # below this the two lowest eigenpairs come from eigh


# ---------------------------------------------------------------------------
# block decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockComponent:
    """One parity block's share of a decomposed initial state."""

    nu: int
    j_s: int
    weight: float
    reduced_state: np.ndarray


def block_project(psi: StateVector, nu: int, dims: SystemDims | None = None) -> np.ndarray:
    """Amplitudes of one parity block, indexed by the system label.

    The bath label is implied: ``j_b = i_s XOR nu``.
    """
    dims = dims or psi.dims
    if dims.n_s != dims.n_b:
        raise DomainError("parity blocks need equal register sizes")
    if psi.space != COMPOSITE:
        raise DomainError("block projection needs a composite state")
    grid = psi.amplitudes.reshape(dims.N_s, dims.N_b)
    idx = np.arange(dims.N_s)
    return grid[idx, idx ^ nu].copy()


def block_embed(reduced: np.ndarray, nu: int, dims: SystemDims) -> StateVector:
    """Lift block amplitudes back to the composite space (zero elsewhere)."""
    if dims.n_s != dims.n_b:
        raise DomainError("parity blocks need equal register sizes")
    grid = np.zeros((dims.N_s, dims.N_b), dtype=np.complex128)
    idx = np.arange(dims.N_s)
    grid[idx, idx ^ nu] = reduced
    return StateVector(grid.reshape(-1), COMPOSITE, dims)


def decompose_initial_state(
    dims: SystemDims, g_b: int = 0, state: StateVector | None = None
) -> list[BlockComponent]:
    """Split the uniform-system start into its parity-block components.

    Only the canonical initial state (equal weight on every ``|i_s, g_b>``)
    is supported here; each block then holds exactly one basis state with
    weight 1/sqrt(N_s).  Anything else should be evolved in the full space.
    """
    if dims.n_s != dims.n_b:
        raise DomainError("parity blocks need equal register sizes")
    if not 0 <= g_b < dims.N_b:
        raise DomainError(f"g_b={g_b} out of range [0, {dims.N_b})")
    if state is not None:
        expected = np.zeros((dims.N_s, dims.N_b), dtype=np.complex128)
        expected[:, g_b] = 1.0 / sqrt(dims.N_s)
        if not np.allclose(state.amplitudes.reshape(dims.N_s, dims.N_b), expected, atol=1e-12):
            raise UnsupportedInputError(
                "decomposition only supports the uniform-system state over |i_s, g_b>"
            )
    weight = 1.0 / sqrt(dims.N_s)
    out = []
    for j_s in range(dims.N_s):
        reduced = np.zeros(dims.N_s, dtype=np.complex128)
        reduced[j_s] = 1.0
        out.append(BlockComponent(nu=j_s ^ g_b, j_s=j_s, weight=weight, reduced_state=reduced))
    return out


# ---------------------------------------------------------------------------
# two lowest eigenpairs of one block
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapResult:
    """Two lowest eigenpairs of a block and the tunneling frequency.

    ``omega = (e1 - e0) / 2`` so that the well-to-well transfer probability
    oscillates as ``sin^2(omega t)``; the raw level splitting is ``2 omega``.
    """

    problem: SubspaceProblem
    e0: float
    e1: float
    ground: np.ndarray
    excited: np.ndarray
    residuals: tuple[float, float]

    @property
    def omega(self) -> float:
        return (self.e1 - self.e0) / 2.0


def _sector_eigensolve(problem: SubspaceProblem, tolerance: float, maxiter: int):
    """Lowest eigenpair in each well-exchange parity sector.

    The block Hamiltonian commutes with the relabeling ``i -> i XOR
    (g_s XOR j_s)`` that swaps the two wells, so the doublet splits into one
    even and one odd state; solving per sector turns a nearly degenerate
    pair into two well-separated extremal problems.
    """
    n_states = problem.dim
    mask = problem.g_s ^ problem.j_s
    apply_h = problem.operator.apply
    idx = np.arange(n_states)
    reps = idx[idx < (idx ^ mask)]
    inv_sqrt2 = 1.0 / sqrt(2.0)

    results = []
    for sign in (+1.0, -1.0):

        def matvec(x, sign=sign):
            full = np.zeros(n_states)
            full[reps] = x * inv_sqrt2
            full[reps ^ mask] = sign * x * inv_sqrt2
            out = apply_h(full)
            return (out[reps] + sign * out[reps ^ mask]) * inv_sqrt2

        op = LinearOperator((len(reps), len(reps)), matvec=matvec, dtype=np.float64)
        try:
            vals, vecs = eigsh(op, k=1, which="SA", tol=tolerance, maxiter=maxiter)
        except ArpackNoConvergence as exc:
            raise NumericalError(
                "block eigensolver did not converge",
                n_s=problem.n_s,
                l_j=problem.l_j,
                sector=int(sign),
                converged_eigenvalues=len(exc.eigenvalues),
                maxiter=maxiter,
            ) from exc
        full = np.zeros(n_states)
        full[reps] = vecs[:, 0] * inv_sqrt2
        full[reps ^ mask] = sign * vecs[:, 0] * inv_sqrt2
        results.append((float(vals[0]), full))
    results.sort(key=lambda pair: pair[0])
    return results


def subspace_gap(
    problem: SubspaceProblem, tolerance: float = 1e-10, maxiter: int = 5000
) -> GapResult:
    """Two lowest eigenpairs of one parity block, matrix-free.

    The hop term couples each vertex to its n_s single-bit-flip neighbours;
    no matrix is formed at any size.  Residual norms ``|H v - E v|`` are
    reported so callers can audit convergence.
    """
    if not 1 <= problem.l_j <= problem.n_s:
        raise DomainError(f"need 1 <= l_j <= n_s, got l_j={problem.l_j}")
    if problem.lam < 0:
        raise DomainError("negative hop strength")

    if problem.lam == 0.0:
        ground = np.zeros(problem.dim)
        excited = np.zeros(problem.dim)
        ground[problem.g_s] = 1.0
        excited[problem.j_s] = 1.0
        return GapResult(problem, -1.0, -1.0, ground, excited, (0.0, 0.0))

    if problem.dim <= DENSE_GAP_LIMIT:
        dense = problem.operator.dense().real
        vals, vecs = np.linalg.eigh(dense)
        pairs = [(float(vals[i]), vecs[:, i].copy()) for i in range(2)]
    else:
        pairs = _sector_eigensolve(problem, tolerance, maxiter)

    (e0, v0), (e1, v1) = pairs[0], pairs[1]
    res = tuple(
        float(np.linalg.norm(problem.operator.apply(v) - e * v)) for e, v in ((e0, v0), (e1, v1))
    )
    return GapResult(problem, e0, e1, v0, v1, res)


def well_packets(gap: GapResult) -> tuple[np.ndarray, np.ndarray]:
    """Localized combinations of the doublet, (packet at g_s, packet at j_s).

    Signs are fixed so the g_s packet has maximal positive amplitude at g_s.
    """
    g_s = gap.problem.g_s
    plus = (gap.ground + gap.excited) / sqrt(2.0)
    minus = (gap.ground - gap.excited) / sqrt(2.0)
    chi_g = plus if abs(plus[g_s]) >= abs(minus[g_s]) else minus
    chi_j = minus if chi_g is plus else plus
    if chi_g[g_s] < 0:
        chi_g = -chi_g
    if chi_j[gap.problem.j_s] < 0:
        chi_j = -chi_j
    return chi_g, chi_j


# ---------------------------------------------------------------------------
# Hamming-shell statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShellProfile:
    """Per-shell statistics of the g_s-well packet.

    ``amplitudes[h]`` holds the C(n_s, h) packet amplitudes at Hamming
    distance h from g_s.  ``spreads`` is the within-shell standard deviation
    (a bulk measure; max-min would be dominated by the few vertices touching
    the second well).  ``flagged`` lists shells whose relative spread is
    large, which happens near the second well.
    """

    n_s: int
    g_s: int
    l_j: int
    amplitudes: list[np.ndarray]
    medians: np.ndarray
    spreads: np.ndarray
    flagged: list[int]

    @property
    def well_component(self) -> float:
        """Squared packet amplitude on the g_s vertex itself."""
        return float(self.amplitudes[0][0] ** 2)

    def rows(self):
        """Flat (h, m, amplitude) rows, e.g. for CSV serialization."""
        for h, amps in enumerate(self.amplitudes):
            for m, a in enumerate(amps):
                yield h, m, float(a)


def shell_profile(gap: GapResult, spread_threshold: float = 0.1) -> ShellProfile:
    """Group the g_s-well packet by Hamming distance from g_s."""
    problem = gap.problem
    chi_g, _ = well_packets(gap)
    n_states = problem.dim
    dist = np.array([hamming_distance(problem.g_s, i) for i in range(n_states)])
    amplitudes = [np.sort(chi_g[dist == h]) for h in range(problem.n_s + 1)]
    medians = np.array([float(np.median(a)) for a in amplitudes])
    spreads = np.array([float(a.std()) for a in amplitudes])
    flagged = [
        h
        for h in range(problem.n_s + 1)
        if medians[h] != 0 and spreads[h] > spread_threshold * abs(medians[h])
    ]
    return ShellProfile(
        n_s=problem.n_s,
        g_s=problem.g_s,
        l_j=problem.l_j,
        amplitudes=amplitudes,
        medians=medians,
        spreads=spreads,
        flagged=flagged,
    )


def shell_sizes(n_s: int) -> np.ndarray:
    return np.array([comb(n_s, h) for h in range(n_s + 1)])


# ---------------------------------------------------------------------------
# frequency-versus-size scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares slope of log2(omega) against log2(N_s).

    Reference slopes: -0.5 is the square-root search walk, -1 is exhaustive
    classical enumeration.
    """

    points: list[tuple[int, float]]
    slope: float
    intercept: float
    residual: float
    reference_slopes: tuple[float, float] = (-0.5, -1.0)
    failures: list[int] | None = None


def fit_scaling(points: Sequence[tuple[int, float]]) -> ScalingFit:
    """Fit log2(omega) = slope * n_s + intercept over (n_s, omega) samples."""
    if len(points) < 4:
        raise DomainError(f"need at least 4 sample points, got {len(points)}")
    x = np.array([float(p[0]) for p in points])
    y = np.log2([float(p[1]) for p in points])
    coeffs, res, *_ = np.polyfit(x, y, 1, full=True)
    residual = float(res[0]) if len(res) else 0.0
    return ScalingFit(
        points=[(int(p[0]), float(p[1])) for p in points],
        slope=float(coeffs[0]),
        intercept=float(coeffs[1]),
        residual=residual,
    )


def scaling_study(
    n_range: Sequence[int],
    gamma: Sequence[float],
    l_rule: Callable[[int], int] | None = None,
    tolerance: float = 1e-10,
    maxiter: int = 5000,
) -> ScalingFit:
    """Tunneling frequency at mid-range Hamming distance versus qubit count.

    Individual eigensolve failures are recorded and skipped; the fit runs on
    whatever succeeded, provided at least 4 points survive.
    """
    l_rule = l_rule or (lambda n: n // 2)
    points: list[tuple[int, float]] = []
    failures: list[int] = []
    last_error: NumericalError | None = None
    for n_s in n_range:
        lam = interaction_strength(n_s, gamma)
        l_j = l_rule(n_s)
        problem = build_reduced_hamiltonian(n_s, 0, (1 << l_j) - 1, lam)
        try:
            gap = subspace_gap(problem, tolerance=tolerance, maxiter=maxiter)
        except NumericalError as exc:
            failures.append(n_s)
            last_error = exc
            continue
        points.append((n_s, gap.omega))
    if len(points) < 4:
        raise NumericalError(
            "too few gap computations succeeded for a scaling fit",
            succeeded=len(points),
            failed=failures,
        ) from last_error
    fit = fit_scaling(points)
    return ScalingFit(
        points=fit.points,
        slope=fit.slope,
        intercept=fit.intercept,
        residual=fit.residual,
        failures=failures or None,
    )


def plateau_window(omegas: dict[int, float], n_s: int) -> tuple[float, float]:
    """Averaging window between the two slowest relevant tunneling times.

    Uses ``(1 / omega_{n_s//2}, 1 / omega_{n_s//2 + 1})``; frequencies decay
    with distance so the window is ascending.
    """
    half = n_s // 2
    if half not in omegas or (half + 1) not in omegas:
        raise DomainError(f"need omegas for l = {half} and {half + 1}")
    return 1.0 / omegas[half], 1.0 / omegas[half + 1]


def ground_probability_estimate(
    n_s: int,
    omegas: dict[int, float],
    t,
    amplitude_0: float = 1.0,
    amplitude_l: float | dict[int, float] = 1.0,
):
    """Block-sum estimate of the transfer probability from the uniform start.

    ``(1/N_s) (A_0 + sum_l C(n_s, l) A_l sin^2(omega_l t))`` over distances
    l = 1..n_s//2.  The oscillation amplitudes A_l are order-one factors the
    two-level reduction leaves unresolved; they default to 1 and can be
    overridden per distance.  Time-averaged over the plateau window, the
    estimate tends to ``mean(A_l) / 4``.
    """
    half = n_s // 2
    missing = [l for l in range(1, half + 1) if l not in omegas]
    if missing:
        raise DomainError(f"missing omegas for distances {missing}")
    t = np.asarray(t, dtype=float)
    total = np.full_like(t, float(amplitude_0))
    for l in range(1, half + 1):
        a_l = amplitude_l[l] if isinstance(amplitude_l, dict) else amplitude_l
        total = total + comb(n_s, l) * a_l * np.sin(omegas[l] * t) ** 2
    return total / (1 << n_s)
