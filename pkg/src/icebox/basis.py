"""Register dimensions, integer basis labels and bit utilities.

Conventions, fixed once for the whole package:

* ``|0>`` is spin-down, ``|1>`` is spin-up.
* Qubit ``m`` of a register is bit ``m`` of that register's integer label
  (little-endian).
* A composite basis state ``|i_s, j_b>`` has index ``i_s * N_b + j_b``:
  system bits are the high bits, so tracing out the bath is a contiguous
  stride-``N_b`` reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

SYSTEM = "system"
BATH = "bath"
COMPOSITE = "composite"
EFFECTIVE4 = "effective4"

SPACES = (SYSTEM, BATH, COMPOSITE, EFFECTIVE4)


@dataclass(frozen=True)
class SystemDims:
    """Qubit counts of the two registers and derived basis dimensions."""

    n_s: int
    n_b: int = 0

    def __post_init__(self):
        if self.n_s < 1:
            raise DomainError(f"need at least one system qubit, got n_s={self.n_s}")
        if self.n_b < 0:
            raise DomainError(f"negative bath qubit count n_b={self.n_b}")

    @property
    def N_s(self) -> int:
        return 1 << self.n_s

    @property
    def N_b(self) -> int:
        return 1 << self.n_b

    @property
    def N_c(self) -> int:
        return self.N_s * self.N_b

    def qubits(self, space: str) -> int:
        if space == SYSTEM:
            return self.n_s
        if space == BATH:
            return self.n_b
        if space == COMPOSITE:
            return self.n_s + self.n_b
        raise DomainError(f"space {space!r} has no qubit register")

    def dim(self, space: str) -> int:
        if space == EFFECTIVE4:
            return 4
        return 1 << self.qubits(space)

    def composite_index(self, i_s: int, j_b: int) -> int:
        if not 0 <= i_s < self.N_s:
            raise DomainError(f"system index {i_s} out of range [0, {self.N_s})")
        if not 0 <= j_b < self.N_b:
            raise DomainError(f"bath index {j_b} out of range [0, {self.N_b})")
        return i_s * self.N_b + j_b

    def split_composite(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.N_c:
            raise DomainError(f"composite index {index} out of range [0, {self.N_c})")
        return divmod(index, self.N_b)


def _check_index(value: int, n_qubits: int | None, name: str) -> None:
    if value < 0:
        raise DomainError(f"{name} must be non-negative, got {value}")
    if n_qubits is not None and value >= (1 << n_qubits):
        raise DomainError(f"{name}={value} out of range for {n_qubits} qubits")


def hamming_distance(a: int, b: int, n_qubits: int | None = None) -> int:
    """Number of bit positions where the labels ``a`` and ``b`` differ."""
    _check_index(a, n_qubits, "a")
    _check_index(b, n_qubits, "b")
    return (a ^ b).bit_count()


def xor_parity(i_s: int, j_b: int, n_qubits: int | None = None) -> int:
    """Bitwise XOR of a system and a bath label.

    Self-inverse: ``xor_parity(i_s, xor_parity(i_s, j_b)) == j_b``.  Requires
    equal register sizes, so a single ``n_qubits`` bounds both labels.
    """
    _check_index(i_s, n_qubits, "i_s")
    _check_index(j_b, n_qubits, "j_b")
    return i_s ^ j_b
