"""Pauli strings in the (x, z) bit representation.

A Hermitian Pauli string is ``P^(x,z) = (x) i^{x_j z_j} X^{x_j} Z^{z_j}``; a
``PauliString`` additionally carries a sign in {+1, -1}.  Per-qubit labels use
``label = x + 2 z`` so that I, X, Z, Y map to 0, 1, 2, 3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LABEL_CHARS = "IXZY"
_CHAR_TO_LABEL = {c: i for i, c in enumerate(LABEL_CHARS)}

PAULI_MATRICES = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[1, 0], [0, -1]],
        [[0, -1j], [1j, 0]],
    ],
    dtype=complex,
)


def labels_to_xz(labels):
    labels = np.asarray(labels, dtype=np.int64)
    return (labels & 1).astype(np.uint8), ((labels >> 1) & 1).astype(np.uint8)


def xz_to_labels(x, z):
    return np.asarray(x, dtype=np.int64) + 2 * np.asarray(z, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class PauliString:
    """Signed n-qubit Hermitian Pauli string."""

    x: np.ndarray
    z: np.ndarray
    sign: int = 1

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.uint8).ravel() & 1
        z = np.asarray(self.z, dtype=np.uint8).ravel() & 1
        if x.shape != z.shape:
            raise ValueError(f"x and z lengths differ: {x.size} != {z.size}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        x.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_label(cls, text: str) -> "PauliString":
        """Parse strings such as ``"XIZ"``, ``"-ZZ"`` or ``"+Y"``."""
        text = text.strip()
        sign = 1
        if text[:1] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        try:
            labels = [_CHAR_TO_LABEL[c] for c in text.upper()]
        except KeyError as exc:
            raise ValueError(f"invalid Pauli character in {text!r}") from exc
        x, z = labels_to_xz(labels)
        return cls(x, z, sign)

    @classmethod
    def from_labels(cls, labels, sign: int = 1) -> "PauliString":
        x, z = labels_to_xz(labels)
        return cls(x, z, sign)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def single(cls, n: int, qubit: int, char: str) -> "PauliString":
        labels = np.zeros(n, dtype=np.int64)
        labels[qubit] = _CHAR_TO_LABEL[char]
        return cls.from_labels(labels)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def labels(self) -> np.ndarray:
        return xz_to_labels(self.x, self.z)

    @property
    def signature(self) -> np.ndarray:
        return (self.x | self.z).astype(np.uint8)

    @property
    def weight(self) -> int:
        return int(self.signature.sum())

    def is_identity(self) -> bool:
        return not self.signature.any()

    def unsigned(self) -> "PauliString":
        return PauliString(self.x, self.z, 1)

    def __neg__(self) -> "PauliString":
        return PauliString(self.x, self.z, -self.sign)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.sign == other.sign
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.sign, self.x.tobytes(), self.z.tobytes()))

    def __str__(self) -> str:
        body = "".join(LABEL_CHARS[l] for l in self.labels)
        return ("-" if self.sign < 0 else "+") + body

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def commutes(self, other: "PauliString") -> bool:
        return commutator_bit(self, other) == 0

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; qubit 0 is the most significant tensor factor."""
        out = np.array([[1.0 + 0j]])
        for l in self.labels:
            out = np.kron(out, PAULI_MATRICES[l])
        return self.sign * out


def commutator_bit(p: PauliString, q: PauliString) -> int:
    """0 if p and q commute, 1 if they anticommute (symplectic product)."""
    return int((np.dot(p.x, q.z) + np.dot(p.z, q.x)) % 2)


def multiply(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, r)`` with ``p q = phase * r`` and r unsigned Hermitian."""
    # XZ-ordered form: i^a X^x Z^z
    a1 = (0 if p.sign > 0 else 2) + int(np.dot(p.x, p.z))
    a2 = (0 if q.sign > 0 else 2) + int(np.dot(q.x, q.z))
    x = p.x ^ q.x
    z = p.z ^ q.z
    a = a1 + a2 + 2 * int(np.dot(p.z, q.x)) - int(np.dot(x, z))
    return 1j ** (a % 4), PauliString(x, z, 1)


def in_pm_Z(p: PauliString) -> bool:
    """True iff p is a signed tensor product of I and Z factors."""
    return not p.x.any()


def basis_expectation(p: PauliString, b) -> int:
    """<b|p|b> for a computational basis state b, in {-1, 0, +1}."""
    b = np.asarray(b, dtype=np.uint8)
    if b.shape != p.z.shape:
        raise ValueError(f"bit string of length {b.size} for {p.n}-qubit Pauli")
    if p.x.any():
        return 0
    return p.sign * (-1) ** int(np.dot(p.z, b) % 2)


def support_extent(p: PauliString) -> int:
    """Largest circular distance between two supported qubits.

    This is the length of the shortest arc of the ring containing the support,
    minus one; 0 for single-qubit support and -1 for the identity.
    """
    support = np.flatnonzero(p.signature)
    n = p.n
    if support.size == 0:
        return -1
    if support.size == 1:
        return 0
    gaps = np.diff(np.concatenate([support, [support[0] + n]]))
    return int(n - gaps.max())
