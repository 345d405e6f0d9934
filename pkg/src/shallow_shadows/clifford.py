"""Clifford tableaux and exhaustive one- and two-qubit Clifford groups.

Local groups are stored as conjugation tables: for group element ``g`` and
local Pauli label ``L`` (``L = l_0 + 4 l_1`` for two qubits), ``image[g, L]``
is the label of ``U P_L U^dag`` and ``sign[g, L]`` its sign.  A table fixes the
unitary up to global phase, so the 24 and 11520 distinct tables are exactly
the one- and two-qubit Clifford groups.
"""

from __future__ import annotations

import functools
import os
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pauli import PAULI_MATRICES, PauliString

CACHE_ENV = "SHALLOW_SHADOWS_CACHE"
_CACHE_VERSION = 1

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def cache_dir() -> Path:
    path = Path(os.environ.get(CACHE_ENV, Path.home() / ".cache" / "shallow_shadows"))
    path.mkdir(parents=True, exist_ok=True)
    return path


def local_pauli_matrix(label: int, k: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(k):
        out = np.kron(out, PAULI_MATRICES[(label >> (2 * q)) & 3])
    return out


def generator_unitaries(k: int) -> list[np.ndarray]:
    """Dense generators whose products give the k-qubit Clifford group."""
    if k == 1:
        return [_H, _S]
    if k == 2:
        eye = np.eye(2)
        return [np.kron(_H, eye), np.kron(eye, _H), np.kron(_S, eye), np.kron(eye, _S), _CNOT]
    raise ValueError("only 1- and 2-qubit groups are enumerated")


def conjugation_table(u: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (image, sign) arrays of length 4^k for the dense Clifford u."""
    dim = 2**k
    paulis = [local_pauli_matrix(L, k) for L in range(4**k)]
    image = np.empty(4**k, dtype=np.int64)
    sign = np.empty(4**k, dtype=np.int8)
    for L, p in enumerate(paulis):
        m = u @ p @ u.conj().T
        for L2, q in enumerate(paulis):
            c = np.trace(q @ m) / dim
            if abs(abs(c) - 1) < 1e-9:
                if abs(c.imag) > 1e-9:
                    raise ValueError("matrix is not a Clifford unitary")
                image[L], sign[L] = L2, 1 if c.real > 0 else -1
                break
        else:
            raise ValueError("matrix is not a Clifford unitary")
    return image, sign


@dataclass(frozen=True)
class LocalCliffordGroup:
    """All k-qubit Cliffords (mod phase) as conjugation tables.

    ``parent``/``generator`` record a BFS tree so that any element can be
    rebuilt as a product of generators (used by dense test oracles).
    """

    k: int
    image: np.ndarray
    sign: np.ndarray
    inv_image: np.ndarray
    inv_sign: np.ndarray
    parent: np.ndarray
    generator: np.ndarray

    def __len__(self) -> int:
        return self.image.shape[0]

    def word(self, g: int) -> list[int]:
        out = []
        while self.parent[g] >= 0:
            out.append(int(self.generator[g]))
            g = int(self.parent[g])
        return out[::-1]

    def unitary(self, g: int) -> np.ndarray:
        gens = generator_unitaries(self.k)
        u = np.eye(2**self.k, dtype=complex)
        for w in self.word(g):
            u = gens[w] @ u
        return u


def _enumerate(k: int) -> LocalCliffordGroup:
    gens = [conjugation_table(u, k) for u in generator_unitaries(k)]
    n_labels = 4**k
    ident = (np.arange(n_labels), np.ones(n_labels, dtype=np.int8))
    seen = {ident[0].tobytes() + ident[1].tobytes(): 0}
    images, signs, parents, generators = [ident[0]], [ident[1]], [-1], [-1]
    queue = deque([0])
    while queue:
        g = queue.popleft()
        img, sgn = images[g], signs[g]
        for w, (gi, gs) in enumerate(gens):
            new_img = gi[img]
            new_sgn = (sgn * gs[img]).astype(np.int8)
            key = new_img.tobytes() + new_sgn.tobytes()
            if key not in seen:
                seen[key] = len(images)
                images.append(new_img)
                signs.append(new_sgn)
                parents.append(g)
                generators.append(w)
                queue.append(len(images) - 1)
    image = np.array(images, dtype=np.int64)
    sign = np.array(signs, dtype=np.int8)
    inv_image = np.empty_like(image)
    inv_sign = np.empty_like(sign)
    rows = np.arange(image.shape[0])[:, None]
    inv_image[rows, image] = np.arange(n_labels)[None, :]
    inv_sign[rows, image] = sign
    return LocalCliffordGroup(
        k, image, sign, inv_image, inv_sign, np.array(parents), np.array(generators)
    )


@functools.lru_cache(maxsize=None)
def clifford_group(k: int) -> LocalCliffordGroup:
    """The k-qubit Clifford group (k = 1 or 2), cached on disk."""
    path = cache_dir() / f"clifford{k}_v{_CACHE_VERSION}.npz"
    if path.exists():
        try:
            with np.load(path) as data:
                return LocalCliffordGroup(k, *(data[f] for f in _GROUP_FIELDS))
        except (OSError, KeyError, ValueError):
            pass
    group = _enumerate(k)
    tmp = path.with_suffix(f".{os.getpid()}.tmp.npz")
    np.savez(tmp, **{f: getattr(group, f) for f in _GROUP_FIELDS})
    os.replace(tmp, path)
    return group


_GROUP_FIELDS = ("image", "sign", "inv_image", "inv_sign", "parent", "generator")


def label_kernel(k: int) -> np.ndarray:
    """K[out, in] = Pr_U[U P_in U^dag = +-P_out] over the k-qubit Clifford group."""
    group = clifford_group(k)
    n_labels = 4**k
    counts = np.zeros((n_labels, n_labels))
    for L in range(n_labels):
        counts[:, L] = np.bincount(group.image[:, L], minlength=n_labels)
    return counts / len(group)


def pair_label_kernel(k: int) -> np.ndarray:
    """Kernel on ordered pairs of k-qubit Paulis, shape (16^k, 16^k).

    Entry ``[(h, h'), (g, g')]`` (flattened as ``h * 4^k + h'``) is the
    probability that a uniform Clifford maps ``P_g`` to ``+-P_h`` and ``P_g'``
    to ``+-P_h'`` simultaneously.
    """
    path = cache_dir() / f"pairkernel{k}_v{_CACHE_VERSION}.npy"
    if path.exists():
        try:
            return np.load(path)
        except (OSError, ValueError):
            pass
    group = clifford_group(k)
    n_labels = 4**k
    size = n_labels * n_labels
    kernel = np.zeros((size, size))
    for g in range(n_labels):
        out = group.image[:, g][:, None] * n_labels + group.image  # (|G|, g')
        for gp in range(n_labels):
            kernel[:, g * n_labels + gp] = np.bincount(out[:, gp], minlength=size)
    kernel /= len(group)
    tmp = path.with_suffix(f".{os.getpid()}.tmp.npy")
    np.save(tmp, kernel)
    os.replace(tmp, path)
    return kernel


def symplectic_form(n: int) -> np.ndarray:
    j = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    j[:n, n:] = np.eye(n, dtype=np.uint8)
    j[n:, :n] = np.eye(n, dtype=np.uint8)
    return j


def _popcount_rows(a: np.ndarray) -> np.ndarray:
    return a.sum(axis=-1, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class CliffordTableau:
    """Clifford unitary U stored by the images of X_1..X_n, Z_1..Z_n.

    Row ``i`` of ``symplectic`` is the (x | z) bit vector of ``U G_i U^dag``
    and ``phases[i]`` is 1 when that image carries a minus sign.
    """

    symplectic: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.symplectic, dtype=np.uint8) & 1
        p = np.asarray(self.phases, dtype=np.uint8).ravel() & 1
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise ValueError(f"symplectic must be 2n x 2n, got {s.shape}")
        if p.size != s.shape[0]:
            raise ValueError("phases must have length 2n")
        s.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "symplectic", s)
        object.__setattr__(self, "phases", p)

    @property
    def n(self) -> int:
        return self.symplectic.shape[0] // 2

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8))

    def is_symplectic(self) -> bool:
        s = self.symplectic.astype(np.int64)
        j = symplectic_form(self.n).astype(np.int64)
        return bool(np.array_equal((s @ j @ s.T) % 2, j) and np.array_equal((s.T @ j @ s) % 2, j))

    def conjugate_xz(self, x, z, signbits):
        """Vectorised U P U^dag for Paulis given as (B, n) bit arrays."""
        n = self.n
        x = np.atleast_2d(np.asarray(x, dtype=np.int64))
        z = np.atleast_2d(np.asarray(z, dtype=np.int64))
        signbits = np.atleast_1d(np.asarray(signbits, dtype=np.int64))
        if x.shape[1] != n:
            raise ValueError(f"Pauli on {x.shape[1]} qubits, tableau on {n}")
        s = self.symplectic.astype(np.int64)
        rx, rz = s[:, :n], s[:, n:]
        row_phase = 2 * self.phases.astype(np.int64) + _popcount_rows(rx & rz)
        upper = np.triu((rz @ rx.T) % 2, k=1)
        c = np.concatenate([x, z], axis=1)
        out = (c @ s) % 2
        ox, oz = out[:, :n], out[:, n:]
        phase = (
            2 * signbits
            + _popcount_rows(x & z)
            + c @ row_phase
            + 2 * np.einsum("bi,ij,bj->b", c, upper, c)
            - _popcount_rows(ox & oz)
        ) % 4
        if np.any(phase % 2):
            raise ValueError("tableau is not a valid Clifford (non-Hermitian image)")
        return ox.astype(np.uint8), oz.astype(np.uint8), (phase // 2).astype(np.uint8)

    def conjugate(self, p: PauliString) -> PauliString:
        if p.n != self.n:
            raise ValueError(f"Pauli on {p.n} qubits, tableau on {self.n}")
        x, z, s = self.conjugate_xz(p.x[None], p.z[None], [0 if p.sign > 0 else 1])
        return PauliString(x[0], z[0], -1 if s[0] else 1)

    def then(self, other: "CliffordTableau") -> "CliffordTableau":
        """Tableau of ``other * self`` (apply self first)."""
        n = self.n
        x, z, s = other.conjugate_xz(
            self.symplectic[:, :n], self.symplectic[:, n:], self.phases
        )
        return CliffordTableau(np.concatenate([x, z], axis=1), s)

    def inverse(self) -> "CliffordTableau":
        n = self.n
        j = symplectic_form(n).astype(np.int64)
        s_inv = (j @ self.symplectic.astype(np.int64).T @ j) % 2
        x, z = s_inv[:, :n], s_inv[:, n:]
        _, _, s = self.conjugate_xz(x, z, np.zeros(2 * n, dtype=np.int64))
        return CliffordTableau(s_inv, s)

    def is_local(self) -> bool:
        """True when the symplectic part is a direct sum of per-qubit blocks."""
        n = self.n
        s = self.symplectic
        mask = np.zeros((2 * n, 2 * n), dtype=bool)
        for q in range(n):
            idx = [q, q + n]
            mask[np.ix_(idx, idx)] = True
        return not s[~mask].any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return np.array_equal(self.symplectic, other.symplectic) and np.array_equal(
            self.phases, other.phases
        )

    def __hash__(self) -> int:
        return hash((self.symplectic.tobytes(), self.phases.tobytes()))


def _gf2_basis(vectors: np.ndarray) -> np.ndarray:
    """Row basis of the GF(2) span of ``vectors``."""
    rows = [v.copy() for v in vectors]
    basis = []
    for col in range(vectors.shape[1] if len(vectors) else 0):
        pivot = next((r for r in rows if r[col]), None)
        if pivot is None:
            continue
        rows = [r ^ pivot if r[col] else r for r in rows if r is not pivot]
        basis.append(pivot)
    return np.array(basis, dtype=np.uint8)


def random_symplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random element of Sp(2n, 2) as images of X_1..X_n, Z_1..Z_n."""
    j = symplectic_form(n).astype(np.int64)

    def form(a, b):
        return int(a.astype(np.int64) @ j @ b.astype(np.int64)) % 2

    basis = np.eye(2 * n, dtype=np.uint8)
    xs, zs = [], []
    for _ in range(n):
        dim = basis.shape[0]
        while True:
            coeffs = rng.integers(0, 2, size=dim, dtype=np.uint8)
            if coeffs.any():
                break
        v = (coeffs @ basis) % 2
        while True:
            w = (rng.integers(0, 2, size=dim, dtype=np.uint8) @ basis) % 2
            if form(v, w) == 1:
                break
        xs.append(v.astype(np.uint8))
        zs.append(w.astype(np.uint8))
        projected = np.array(
            [(u + form(u, w) * v + form(u, v) * w) % 2 for u in basis], dtype=np.uint8
        )
        basis = _gf2_basis(projected)
    return np.array(xs + zs, dtype=np.uint8)


def random_clifford(n: int, rng: np.random.Generator) -> CliffordTableau:
    """Uniform n-qubit Clifford (mod global phase)."""
    return CliffordTableau(random_symplectic(n, rng), rng.integers(0, 2, size=2 * n))
