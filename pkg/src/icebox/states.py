"""Complex state vectors over labelled bases, plus single-qubit Pauli action."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BATH, COMPOSITE, SPACES, SYSTEM, SystemDims
from .errors import DomainError

NORM_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over the basis of one space tag.

    Treat instances as immutable: the amplitude buffer is write-protected so
    states can be shared read-only across threads.
    """

    amplitudes: np.ndarray
    space: str
    dims: SystemDims

    def __post_init__(self):
        if self.space not in SPACES:
            raise DomainError(f"unknown space tag {self.space!r}")
        arr = np.asarray(self.amplitudes, dtype=np.complex128)
        expected = self.dims.dim(self.space)
        if arr.shape != (expected,):
            raise DomainError(
                f"amplitude array has shape {arr.shape}, expected ({expected},)"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.space, self.dims)

    def inner(self, other: "StateVector") -> complex:
        if other.space != self.space or other.dim != self.dim:
            raise DomainError("inner product between mismatched bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probability(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)


def basis_state(dims: SystemDims, space: str, index: int) -> StateVector:
    dim = dims.dim(space)
    if not 0 <= index < dim:
        raise DomainError(f"basis index {index} out of range [0, {dim})")
    amp = np.zeros(dim, dtype=np.complex128)
    amp[index] = 1.0
    return StateVector(amp, space, dims)


def composite_basis_state(dims: SystemDims, i_s: int, j_b: int) -> StateVector:
    return basis_state(dims, COMPOSITE, dims.composite_index(i_s, j_b))


def uniform_state(dims: SystemDims, space: str) -> StateVector:
    dim = dims.dim(space)
    amp = np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)
    return StateVector(amp, space, dims)


def uniform_over_system(dims: SystemDims, bath_index: int = 0) -> StateVector:
    """Equal-weight superposition of every system label, bath pinned to one state."""
    if not 0 <= bath_index < dims.N_b:
        raise DomainError(f"bath index {bath_index} out of range [0, {dims.N_b})")
    amp = np.zeros((dims.N_s, dims.N_b), dtype=np.complex128)
    amp[:, bath_index] = 1.0 / np.sqrt(dims.N_s)
    return StateVector(amp.reshape(-1), COMPOSITE, dims)


def global_bit(dims: SystemDims, space: str, register: str, qubit: int) -> int:
    """Bit position of (register, qubit) inside an integer label of ``space``."""
    if register not in (SYSTEM, BATH):
        raise DomainError(f"unknown register {register!r}")
    n_reg = dims.n_s if register == SYSTEM else dims.n_b
    if not 0 <= qubit < n_reg:
        raise DomainError(f"{register} qubit {qubit} out of range [0, {n_reg})")
    if space == COMPOSITE:
        return qubit + (dims.n_b if register == SYSTEM else 0)
    if space != register:
        raise DomainError(f"register {register!r} not present in space {space!r}")
    return qubit


def pauli_on_bit(arr: np.ndarray, bit: int, axis: str) -> np.ndarray:
    """Apply one Pauli matrix to bit ``bit`` of a 2^n amplitude array.

    Sign convention: sigma^z|1> = +|1>, sigma^z|0> = -|0>, sigma^y|0> = i|1>,
    sigma^y|1> = -i|0>.
    """
    out = np.empty_like(arr)
    lo = 1 << bit
    src = arr.reshape(-1, 2, lo)
    dst = out.reshape(-1, 2, lo)
    if axis == "x":
        dst[:, 0, :] = src[:, 1, :]
        dst[:, 1, :] = src[:, 0, :]
    elif axis == "y":
        dst[:, 0, :] = -1j * src[:, 1, :]
        dst[:, 1, :] = 1j * src[:, 0, :]
    elif axis == "z":
        dst[:, 0, :] = -src[:, 0, :]
        dst[:, 1, :] = src[:, 1, :]
    else:
        raise DomainError(f"unknown Pauli axis {axis!r}")
    return out


def apply_pauli(state: StateVector, axis: str, qubit: int, register: str) -> StateVector:
    """Pauli matrix on one qubit of one register; norm-preserving."""
    bit = global_bit(state.dims, state.space, register, qubit)
    return StateVector(pauli_on_bit(state.amplitudes, bit, axis), state.space, state.dims)
