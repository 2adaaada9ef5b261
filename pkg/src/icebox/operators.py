"""Hamiltonians as symbolic term sums with matrix-free apply.

Every constructor returns an :class:`OperatorSpec` whose ``apply`` works on
plain amplitude arrays without materializing a matrix; ``dense()`` is
available below a hard dimension guard and exists so tests can audit
hermiticity and matrix-free agreement against an independent assembly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Sequence, Union

import numpy as np

from .basis import BATH, COMPOSITE, SYSTEM, SystemDims, hamming_distance
from .errors import DomainError

DENSE_DIM_LIMIT = 1 << 14


@dataclass(frozen=True)
class XxxBond:
    """Contributes ``-J (sx sx + sy sy + sz sz)`` on one pair of bath qubits."""

    qubit_a: int
    qubit_b: int
    strength: float


@dataclass(frozen=True)
class OnSiteField:
    """Contributes ``strength * sigma^z`` on one qubit."""

    register: str
    qubit: int
    strength: float


@dataclass(frozen=True)
class BasisProjector:
    """Contributes ``weight * |state><state|`` on one register basis state."""

    register: str
    state: int
    weight: float


@dataclass(frozen=True)
class UniformProjector:
    """Contributes ``weight * |xi><xi|``, xi the uniform superposition."""

    weight: float


@dataclass(frozen=True)
class PairCoupling:
    """Contributes ``strength * s^axis (system qubit) sigma^axis (bath qubit)``."""

    axis: str
    system_qubit: int
    bath_qubit: int
    strength: float


@dataclass(frozen=True)
class HypercubeHop:
    """Contributes ``strength * sum_m sigma^x_m`` over every qubit of a register."""

    register: str
    strength: float


Term = Union[XxxBond, OnSiteField, BasisProjector, UniformProjector, PairCoupling, HypercubeHop]


def _two_bit_views(arr: np.ndarray, p: int, q: int):
    """Reshape so axes 1 and 3 index bits p and q (p > q)."""
    hi = 1 << (p - q - 1)
    lo = 1 << q
    return arr.reshape(-1, 2, hi, 2, lo)


class OperatorSpec:
    """Hermitian operator over one space, stored as a sum of tagged terms.

    Immutable after construction; ``apply`` never mutates its input and the
    term order fixes a deterministic accumulation order.
    """

    def __init__(self, dims: SystemDims, space: str, terms: Sequence[Term]):
        self.dims = dims
        self.space = space
        self.terms = tuple(terms)
        self._n_qubits = dims.qubits(space)
        self._dim = dims.dim(space)
        for term in self.terms:
            self._validate(term)

    # -- construction helpers ------------------------------------------------

    def _bit(self, register: str, qubit: int) -> int:
        if self.space == COMPOSITE:
            return qubit + (self.dims.n_b if register == SYSTEM else 0)
        return qubit

    def _validate(self, term: Term) -> None:
        dims, space = self.dims, self.space

        def check_register(register, qubit):
            if register not in (SYSTEM, BATH):
                raise DomainError(f"unknown register {register!r}")
            if space != COMPOSITE and register != space:
                raise DomainError(f"{register} term invalid in {space} space")
            n_reg = dims.n_s if register == SYSTEM else dims.n_b
            if not 0 <= qubit < n_reg:
                raise DomainError(f"{register} qubit {qubit} out of range [0, {n_reg})")

        if isinstance(term, XxxBond):
            check_register(BATH, term.qubit_a)
            check_register(BATH, term.qubit_b)
            if term.qubit_a == term.qubit_b:
                raise DomainError(f"bond ({term.qubit_a}, {term.qubit_b}) is a self-loop")
        elif isinstance(term, OnSiteField):
            check_register(term.register, term.qubit)
        elif isinstance(term, BasisProjector):
            if term.register not in (SYSTEM, BATH):
                raise DomainError(f"unknown register {term.register!r}")
            if space != COMPOSITE and term.register != space:
                raise DomainError(f"{term.register} projector invalid in {space} space")
            n_reg = dims.N_s if term.register == SYSTEM else dims.N_b
            if not 0 <= term.state < n_reg:
                raise DomainError(f"projector state {term.state} out of range [0, {n_reg})")
        elif isinstance(term, PairCoupling):
            if space != COMPOSITE:
                raise DomainError("pair coupling needs the composite space")
            if term.axis not in ("x", "y", "z"):
                raise DomainError(f"unknown Pauli axis {term.axis!r}")
            check_register(SYSTEM, term.system_qubit)
            check_register(BATH, term.bath_qubit)
        elif isinstance(term, HypercubeHop):
            if term.register not in (SYSTEM, BATH):
                raise DomainError(f"unknown register {term.register!r}")
            if space != COMPOSITE and term.register != space:
                raise DomainError(f"{term.register} hop invalid in {space} space")
        elif isinstance(term, UniformProjector):
            pass
        else:
            raise DomainError(f"unknown term type {type(term).__name__}")

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other: "OperatorSpec") -> "OperatorSpec":
        if not isinstance(other, OperatorSpec):
            return NotImplemented
        if other.dims != self.dims or other.space != self.space:
            raise DomainError("can only add operators over the same space")
        return OperatorSpec(self.dims, self.space, self.terms + other.terms)

    def promoted(self) -> "OperatorSpec":
        """The same terms re-validated on the composite space (P -> P x I)."""
        return OperatorSpec(self.dims, COMPOSITE, self.terms)

    @property
    def dim(self) -> int:
        return self._dim

    # -- application -----------------------------------------------------------

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Matrix-free ``H @ x``; dtype follows the input."""
        if x.shape != (self._dim,):
            raise DomainError(f"vector shape {x.shape} does not match dim {self._dim}")
        y = np.zeros_like(x)
        for term in self.terms:
            self._apply_term(term, x, y)
        return y

    def _apply_term(self, term: Term, x: np.ndarray, y: np.ndarray) -> None:
        if isinstance(term, XxxBond):
            p = self._bit(BATH, max(term.qubit_a, term.qubit_b))
            q = self._bit(BATH, min(term.qubit_a, term.qubit_b))
            j = term.strength
            v = _two_bit_views(x, p, q)
            w = _two_bit_views(y, p, q)
            # aligned pairs: sz sz = +1, flip part vanishes
            w[:, 0, :, 0, :] -= j * v[:, 0, :, 0, :]
            w[:, 1, :, 1, :] -= j * v[:, 1, :, 1, :]
            # anti-aligned: sz sz = -1, (sx sx + sy sy) swaps with weight 2
            w[:, 0, :, 1, :] += j * v[:, 0, :, 1, :] - 2.0 * j * v[:, 1, :, 0, :]
            w[:, 1, :, 0, :] += j * v[:, 1, :, 0, :] - 2.0 * j * v[:, 0, :, 1, :]
        elif isinstance(term, OnSiteField):
            b = term.strength
            lo = 1 << self._bit(term.register, term.qubit)
            v = x.reshape(-1, 2, lo)
            w = y.reshape(-1, 2, lo)
            w[:, 0, :] -= b * v[:, 0, :]
            w[:, 1, :] += b * v[:, 1, :]
        elif isinstance(term, BasisProjector):
            if self.space == COMPOSITE:
                v = x.reshape(self.dims.N_s, self.dims.N_b)
                w = y.reshape(self.dims.N_s, self.dims.N_b)
                if term.register == SYSTEM:
                    w[term.state, :] += term.weight * v[term.state, :]
                else:
                    w[:, term.state] += term.weight * v[:, term.state]
            else:
                y[term.state] += term.weight * x[term.state]
        elif isinstance(term, UniformProjector):
            y += (term.weight / self._dim) * x.sum()
        elif isinstance(term, PairCoupling):
            p = self._bit(SYSTEM, term.system_qubit)
            q = self._bit(BATH, term.bath_qubit)
            c = term.strength
            v = _two_bit_views(x, p, q)
            w = _two_bit_views(y, p, q)
            if term.axis == "x":
                w[:, 0, :, 0, :] += c * v[:, 1, :, 1, :]
                w[:, 1, :, 1, :] += c * v[:, 0, :, 0, :]
                w[:, 0, :, 1, :] += c * v[:, 1, :, 0, :]
                w[:, 1, :, 0, :] += c * v[:, 0, :, 1, :]
            elif term.axis == "y":
                # i^2 factors make sy sy real: -1 on equal bits, +1 on unequal
                w[:, 0, :, 0, :] -= c * v[:, 1, :, 1, :]
                w[:, 1, :, 1, :] -= c * v[:, 0, :, 0, :]
                w[:, 0, :, 1, :] += c * v[:, 1, :, 0, :]
                w[:, 1, :, 0, :] += c * v[:, 0, :, 1, :]
            else:  # z
                w[:, 0, :, 0, :] += c * v[:, 0, :, 0, :]
                w[:, 1, :, 1, :] += c * v[:, 1, :, 1, :]
                w[:, 0, :, 1, :] -= c * v[:, 0, :, 1, :]
                w[:, 1, :, 0, :] -= c * v[:, 1, :, 0, :]
        elif isinstance(term, HypercubeHop):
            c = term.strength
            n_reg = self.dims.n_s if term.register == SYSTEM else self.dims.n_b
            for m in range(n_reg):
                lo = 1 << self._bit(term.register, m)
                v = x.reshape(-1, 2, lo)
                w = y.reshape(-1, 2, lo)
                w[:, 0, :] += c * v[:, 1, :]
                w[:, 1, :] += c * v[:, 0, :]

    def expectation(self, x: np.ndarray) -> float:
        return float(np.real(np.vdot(x, self.apply(x))))

    def norm_bound(self) -> float:
        """Cheap upper bound on the spectral norm (sum of term norms)."""
        total = 0.0
        for term in self.terms:
            if isinstance(term, XxxBond):
                total += 3.0 * abs(term.strength)
            elif isinstance(term, OnSiteField):
                total += abs(term.strength)
            elif isinstance(term, (BasisProjector, UniformProjector)):
                total += abs(term.weight)
            elif isinstance(term, PairCoupling):
                total += abs(term.strength)
            elif isinstance(term, HypercubeHop):
                n_reg = self.dims.n_s if term.register == SYSTEM else self.dims.n_b
                total += n_reg * abs(term.strength)
        return total

    # -- dense auditing ----------------------------------------------------------

    def dense(self) -> np.ndarray:
        """Materialize the full matrix; refused above 2^14 dimensions."""
        if self._dim > DENSE_DIM_LIMIT:
            raise DomainError(
                f"dense materialization refused for dim {self._dim} > {DENSE_DIM_LIMIT}"
            )
        mat = np.zeros((self._dim, self._dim), dtype=np.complex128)
        e = np.zeros(self._dim, dtype=np.complex128)
        for col in range(self._dim):
            e[col] = 1.0
            mat[:, col] = self.apply(e)
            e[col] = 0.0
        return mat

    def hermiticity_defect(self) -> float:
        mat = self.dense()
        return float(np.abs(mat - mat.conj().T).max())

    def describe(self) -> list[dict]:
        """Declarative term list (tag + parameters), e.g. for run reports."""
        out = []
        for term in self.terms:
            entry = {"term": type(term).__name__}
            entry.update({k: getattr(term, k) for k in term.__dataclass_fields__})
            out.append(entry)
        return out

    def __repr__(self) -> str:
        return f"OperatorSpec(space={self.space!r}, dim={self._dim}, terms={len(self.terms)})"


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def _chain_edges(n_b: int, periodic: bool) -> list[tuple[int, int]]:
    last = n_b if periodic else n_b - 1
    return [(m, (m + 1) % n_b) for m in range(last)]


def build_xxx_bath(
    n_b: int,
    J: float,
    topology: str = "chain-periodic",
    edges: Sequence[tuple[int, int]] | None = None,
) -> OperatorSpec:
    """Ferromagnetic exchange bath ``-J sum_<m,m'> (xx + yy + zz)``.

    The all-down and all-up configurations are exact eigenstates with
    eigenvalue ``-J * (number of bonds)``.
    """
    if n_b < 2:
        raise DomainError(f"exchange bath needs n_b >= 2, got {n_b}")
    if topology == "chain-periodic":
        if n_b < 3:
            raise DomainError("periodic chain needs n_b >= 3")
        edge_list = _chain_edges(n_b, periodic=True)
    elif topology == "chain-open":
        edge_list = _chain_edges(n_b, periodic=False)
    elif topology == "edge-list":
        if edges is None:
            raise DomainError("topology 'edge-list' requires explicit edges")
        edge_list = [tuple(e) for e in edges]
    else:
        raise DomainError(f"unknown topology {topology!r}")

    seen = set()
    for a, b in edge_list:
        if a == b:
            raise DomainError(f"self-loop edge ({a}, {b})")
        if not (0 <= a < n_b and 0 <= b < n_b):
            raise DomainError(f"edge ({a}, {b}) references a qubit outside [0, {n_b})")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise DomainError(f"duplicate edge {key}")
        seen.add(key)

    dims = SystemDims(n_s=1, n_b=n_b)
    terms = [XxxBond(a, b, J) for a, b in edge_list]
    return OperatorSpec(dims, BATH, terms)


def build_toy_model(n_b: int, J: float, B: float, lam: float) -> OperatorSpec:
    """One field-split spin coupled to the middle of a periodic exchange chain.

    ``H = B s^z + H_bath(XXX, periodic) + lam s^y sigma^y_mid`` on the
    ``1 + n_b`` qubit composite space.  J and B must be positive so the
    aligned-down chain is the bath ground state and ``|0>`` the system ground
    state; otherwise the register cannot act as an energy sink.
    """
    if n_b < 3:
        raise DomainError(f"toy model needs n_b >= 3, got {n_b}")
    if J <= 0 or B <= 0:
        raise DomainError(f"need ferromagnetic J > 0 and splitting B > 0, got J={J}, B={B}")
    dims = SystemDims(n_s=1, n_b=n_b)
    terms: list[Term] = [OnSiteField(SYSTEM, 0, B)]
    terms += [XxxBond(a, b, J) for a, b in _chain_edges(n_b, periodic=True)]
    terms.append(PairCoupling("y", 0, n_b // 2, lam))
    return OperatorSpec(dims, COMPOSITE, terms)


def build_projector_hamiltonians(
    g_s: int, g_b: int, dims: SystemDims
) -> tuple[OperatorSpec, OperatorSpec]:
    """Rank-one well Hamiltonians ``(-|g_s><g_s|, -|g_b><g_b|)``.

    Each lives on its own register space (spectrum: -1 once, 0 elsewhere);
    use :meth:`OperatorSpec.promoted` to lift onto the composite space.
    """
    if not 0 <= g_s < dims.N_s:
        raise DomainError(f"g_s={g_s} out of range [0, {dims.N_s})")
    if not 0 <= g_b < dims.N_b:
        raise DomainError(f"g_b={g_b} out of range [0, {dims.N_b})")
    h_s = OperatorSpec(dims, SYSTEM, [BasisProjector(SYSTEM, g_s, -1.0)])
    h_b = OperatorSpec(dims, BATH, [BasisProjector(BATH, g_b, -1.0)])
    return h_s, h_b


def build_nonlocal_interaction(dims: SystemDims) -> OperatorSpec:
    """Rank-one attraction toward the uniform composite superposition."""
    return OperatorSpec(dims, COMPOSITE, [UniformProjector(-1.0)])


def build_nonlocal_model(dims: SystemDims, g_s: int, g_b: int = 0) -> OperatorSpec:
    """Full search Hamiltonian: both well projectors plus the uniform attraction."""
    h_s, h_b = build_projector_hamiltonians(g_s, g_b, dims)
    return h_s.promoted() + h_b.promoted() + build_nonlocal_interaction(dims)


def interaction_strength(n_s: int, gamma: Sequence[float]) -> float:
    """Polynomial-in-1/n coupling ``sum_k gamma_k / n_s^k`` (k starts at 1)."""
    if len(gamma) == 0:
        raise DomainError("gamma coefficient list must not be empty")
    return float(sum(g / n_s ** (k + 1) for k, g in enumerate(gamma)))


def build_local_interaction(
    n_s: int, gamma: Sequence[float]
) -> tuple[OperatorSpec, float]:
    """Pairwise ``-lam sum_m s^x_m sigma^x_m`` coupling; returns (operator, lam).

    Requires matching register sizes (n_b = n_s).
    """
    lam = interaction_strength(n_s, gamma)
    dims = SystemDims(n_s=n_s, n_b=n_s)
    terms = [PairCoupling("x", m, m, -lam) for m in range(n_s)]
    return OperatorSpec(dims, COMPOSITE, terms), lam


def build_local_model(n_s: int, gamma: Sequence[float], g_s: int, g_b: int = 0) -> OperatorSpec:
    """Full locally-coupled search Hamiltonian on the 2n_s-qubit space."""
    dims = SystemDims(n_s=n_s, n_b=n_s)
    h_s, h_b = build_projector_hamiltonians(g_s, g_b, dims)
    h_i, _ = build_local_interaction(n_s, gamma)
    return h_s.promoted() + h_b.promoted() + h_i


@dataclass(frozen=True)
class SubspaceProblem:
    """One parity block of the local model, reduced to the system register.

    ``operator`` is the block Hamiltonian: wells at ``g_s`` and ``j_s`` of
    depth -1 (merged to a single depth -2 well when they coincide) plus a
    ``-lam sum_m s^x_m`` hypercube hop.
    """

    n_s: int
    g_s: int
    j_s: int
    l_j: int
    lam: float
    nu: int
    operator: OperatorSpec

    @property
    def dim(self) -> int:
        return 1 << self.n_s


def build_reduced_hamiltonian(
    n_s: int, g_s: int, j_s: int, lam: float, g_b: int = 0
) -> SubspaceProblem:
    """Reduce one parity block to a double-well hypercube problem."""
    dims = SystemDims(n_s=n_s, n_b=0)
    n_states = 1 << n_s
    for name, idx in (("g_s", g_s), ("j_s", j_s)):
        if not 0 <= idx < n_states:
            raise DomainError(f"{name}={idx} out of range [0, {n_states})")
    if g_s == j_s:
        wells: list[Term] = [BasisProjector(SYSTEM, g_s, -2.0)]
    else:
        wells = [BasisProjector(SYSTEM, g_s, -1.0), BasisProjector(SYSTEM, j_s, -1.0)]
    op = OperatorSpec(dims, SYSTEM, wells + [HypercubeHop(SYSTEM, -lam)])
    return SubspaceProblem(
        n_s=n_s,
        g_s=g_s,
        j_s=j_s,
        l_j=hamming_distance(g_s, j_s),
        lam=lam,
        nu=j_s ^ g_b,
        operator=op,
    )


@dataclass(frozen=True)
class RadialModel:
    """Shell-resolved tight-binding reduction over Hamming distance h = 0..n_s.

    As written the recurrence couples shell h to h-1 with weight ``-h lam``
    and to h+1 with ``-(n_s-h) lam`` -- a non-symmetric matrix.  Rescaling
    amplitudes by sqrt(C(n_s, h)) symmetrizes it without changing the
    spectrum, which is how the eigensolve is done.
    """

    n_s: int
    lam: float

    @property
    def matrix(self) -> np.ndarray:
        n = self.n_s
        mat = np.zeros((n + 1, n + 1))
        mat[0, 0] = -1.0
        for h in range(1, n + 1):
            mat[h, h - 1] = -h * self.lam
        for h in range(n):
            mat[h, h + 1] = -(n - h) * self.lam
        return mat

    def symmetric_tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_s
        diag = np.zeros(n + 1)
        diag[0] = -1.0
        off = np.array([-self.lam * sqrt((h + 1) * (n - h)) for h in range(n)])
        return diag, off

    def eigenvalues(self) -> np.ndarray:
        from scipy.linalg import eigh_tridiagonal

        diag, off = self.symmetric_tridiagonal()
        return eigh_tridiagonal(diag, off, eigvals_only=True)

    def ground(self) -> tuple[float, np.ndarray]:
        """Lowest eigenpair; amplitudes are per-shell a_h with binomial weights.

        Normalization: sum_h C(n_s, h) a_h^2 = 1, overall sign a_0 > 0.
        """
        from math import comb

        from scipy.linalg import eigh_tridiagonal

        diag, off = self.symmetric_tridiagonal()
        w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
        s = v[:, 0]
        if s[0] < 0:
            s = -s
        weights = np.array([sqrt(comb(self.n_s, h)) for h in range(self.n_s + 1)])
        return float(w[0]), s / weights


def build_radial_tridiagonal(n_s: int, lam: float) -> RadialModel:
    if n_s < 1:
        raise DomainError(f"need n_s >= 1, got {n_s}")
    return RadialModel(n_s=n_s, lam=lam)


def build_effective_4x4(N_s: int, N_b: int) -> np.ndarray:
    """Exact Hamiltonian of the non-local model restricted to its invariant
    4-dimensional subspace, in basis order (|Y>, |beta>, |alpha>, |G>)."""
    if N_s < 2 or N_b < 2:
        raise DomainError(f"need N_s, N_b >= 2, got ({N_s}, {N_b})")
    N_c = N_s * N_b
    q = N_c - N_s - N_b + 1
    mat = np.array(
        [
            [q, sqrt(q * (N_b - 1)), sqrt(q * (N_s - 1)), sqrt(q)],
            [sqrt(q * (N_b - 1)), N_c + N_b - 1, sqrt((N_s - 1) * (N_b - 1)), sqrt(N_b - 1)],
            [sqrt(q * (N_s - 1)), sqrt((N_s - 1) * (N_b - 1)), N_c + N_s - 1, sqrt(N_s - 1)],
            [sqrt(q), sqrt(N_b - 1), sqrt(N_s - 1), 2 * N_c + 1],
        ]
    )
    return -mat / N_c
