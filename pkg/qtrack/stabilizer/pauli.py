"""Phase-free Pauli operators in binary symplectic form.

An n-qubit Pauli string is stored as two packed bit vectors (x, z). Qubit 1
is the most significant bit, matching the textual form "ZZI" where the
first letter acts on qubit 1. Per qubit:

    (x, z) = (0, 0) -> I,  (1, 0) -> X,  (1, 1) -> Y,  (0, 1) -> Z

Phases are dropped: every product is taken modulo the global phase.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..core.errors import CodeDefinitionError

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}


@dataclass(frozen=True, slots=True)
class PauliString:
    """A phase-free n-qubit Pauli operator."""

    n: int
    x: int
    z: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"qubit count must be positive, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"bit vectors do not fit in {self.n} qubits")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse a string over {I, X, Y, Z}, qubit 1 first (e.g. "ZZI")."""
        label = label.strip().upper()
        if not label or any(ch not in _LETTER_BITS for ch in label):
            raise ValueError(f"invalid Pauli label: {label!r}")
        x = z = 0
        for ch in label:
            bx, bz = _LETTER_BITS[ch]
            x = (x << 1) | bx
            z = (z << 1) | bz
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        """The operator `letter` on `qubit` (1-based) and identity elsewhere."""
        if not 1 <= qubit <= n:
            raise ValueError(f"qubit {qubit} out of range for n={n}")
        labels = ["I"] * n
        labels[qubit - 1] = letter
        return cls.from_label("".join(labels))

    @property
    def label(self) -> str:
        return "".join(_BITS_LETTER[self.qubit_bits(q)] for q in range(1, self.n + 1))

    def qubit_bits(self, qubit: int) -> tuple[int, int]:
        """The (x, z) bits acting on `qubit` (1-based)."""
        shift = self.n - qubit
        return (self.x >> shift) & 1, (self.z >> shift) & 1

    @property
    def x_bits(self) -> tuple[int, ...]:
        return tuple(self.qubit_bits(q)[0] for q in range(1, self.n + 1))

    @property
    def z_bits(self) -> tuple[int, ...]:
        return tuple(self.qubit_bits(q)[1] for q in range(1, self.n + 1))

    @property
    def weight(self) -> int:
        """Number of qubits acted on non-trivially."""
        return (self.x | self.z).bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def sort_key(self) -> tuple[int, int]:
        """Lexicographic order over (x, z) read as integers."""
        return self.x, self.z

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __str__(self) -> str:
        return self.label


def _check_lengths(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.label} has {a.n}, {b.label} has {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Phase-free product: componentwise XOR of the x and z parts."""
    _check_lengths(a, b)
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic inner product of a and b is even."""
    _check_lengths(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) % 2 == 0


def check_commuting(generators: Sequence[PauliString]) -> None:
    """Raise CodeDefinitionError unless the generators mutually commute."""
    for i, gi in enumerate(generators):
        for gj in generators[i + 1 :]:
            if not commutes(gi, gj):
                raise CodeDefinitionError(f"generators {gi} and {gj} anticommute")


def syndrome(error: PauliString, generators: Sequence[PauliString]) -> tuple[int, ...]:
    """
    Commutation pattern of `error` with each generator.

    Bit k is 1 iff the error anticommutes with generator k (outcome -1).

    Raises:
        CodeDefinitionError: if the generators do not mutually commute
    """
    check_commuting(generators)
    return syndrome_bits(error, generators)


def syndrome_bits(error: PauliString, generators: Sequence[PauliString]) -> tuple[int, ...]:
    """Syndrome without the commutation check, for validated codes."""
    return tuple(0 if commutes(error, g) else 1 for g in generators)


def syndrome_index(bits: Iterable[int]) -> int:
    """Pack syndrome bits into an index; generator k contributes 2**k."""
    return sum(bit << k for k, bit in enumerate(bits))


def all_paulis(n: int) -> list[PauliString]:
    """All 4**n phase-free strings, in (x, z) lexicographic order."""
    return [PauliString(n, x, z) for x in range(1 << n) for z in range(1 << n)]


def generated_group(generators: Sequence[PauliString]) -> list[PauliString]:
    """Every product of a subset of `generators` (duplicates removed)."""
    if not generators:
        return []
    elements = {PauliString.identity(generators[0].n)}
    for g in generators:
        elements |= {multiply(e, g) for e in elements}
    return sorted(elements, key=lambda p: p.sort_key)
