"""Stabilizer states and computational-basis measurement after a Clifford."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliString, commutator_bit, labels_to_xz, multiply


def _to_mask(bits) -> int:
    return int(sum(1 << i for i, v in enumerate(bits) if v))


def _row_product(r1, r2):
    """Product of commuting Hermitian Paulis given as (x, z, signbit) int masks."""
    x1, z1, s1 = r1
    x2, z2, s2 = r2
    x, z = x1 ^ x2, z1 ^ z2
    a = (
        2 * (s1 + s2)
        + (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        + 2 * (z1 & x2).bit_count()
        - (x & z).bit_count()
    ) % 4
    if a % 2:
        raise ValueError("product of anticommuting generators")
    return x, z, a // 2


@dataclass(frozen=True, eq=False)
class StabilizerState:
    """Stabilizer group <g_1, ..., g_k> on n qubits; pure when k = n."""

    generators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("need at least one generator (use identity-free groups)")
        n = gens[0].n
        for g in gens:
            if g.n != n:
                raise ValueError("generators act on different qubit counts")
        for i, g in enumerate(gens):
            for h in gens[i + 1:]:
                if commutator_bit(g, h):
                    raise ValueError(f"generators {g} and {h} anticommute")
        if _gf2_rank(gens) != len(gens):
            raise ValueError("generators are not independent")
        # a commuting independent set can still generate -I through signs
        if len(gens) <= 16 and any(p.is_identity() and p.sign < 0 for p in _group_elements(gens)):
            raise ValueError("generators produce -I")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def from_strings(cls, strings) -> "StabilizerState":
        return cls(tuple(PauliString.from_label(s) for s in strings))

    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        return cls(tuple(PauliString.single(n, j, "Z") for j in range(n)))

    @classmethod
    def ghz(cls, n: int) -> "StabilizerState":
        gens = [PauliString.from_labels(np.ones(n, dtype=int))]
        for j in range(n - 1):
            lab = np.zeros(n, dtype=int)
            lab[j] = lab[j + 1] = 2
            gens.append(PauliString.from_labels(lab))
        return cls(tuple(gens))

    @classmethod
    def named(cls, name: str, n: int) -> "StabilizerState":
        builders = {"zero": cls.zero, "ghz": cls.ghz}
        if name not in builders:
            raise ValueError(f"unknown state {name!r}; expected one of {sorted(builders)}")
        return builders[name](n)

    @property
    def n(self) -> int:
        return self.generators[0].n

    @property
    def k(self) -> int:
        return len(self.generators)

    @property
    def is_pure(self) -> bool:
        return self.k == self.n

    def labels(self) -> tuple[np.ndarray, np.ndarray]:
        lab = np.array([g.labels for g in self.generators])
        sg = np.array([g.sign for g in self.generators])
        return lab, sg

    def elements(self) -> list[PauliString]:
        """All 2^k group elements (identity first)."""
        return _group_elements(self.generators)

    def projector(self) -> np.ndarray:
        """Dense projector onto the stabilized subspace (small n only)."""
        dim = 2**self.n
        out = np.eye(dim, dtype=complex)
        for g in self.generators:
            out = out @ (np.eye(dim) + g.to_matrix()) / 2
        return out

    def density_matrix(self) -> np.ndarray:
        p = self.projector()
        return p / np.trace(p).real


def _gf2_rank(gens) -> int:
    rows = [_to_mask(np.concatenate([g.x, g.z])) for g in gens]
    rank = 0
    while rows:
        pivot = max(rows)
        rows.remove(pivot)
        if pivot == 0:
            continue
        rank += 1
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
    return rank


def _group_elements(gens) -> list[PauliString]:
    n = gens[0].n
    out = [PauliString.identity(n)]
    for g in gens:
        new = []
        for p in out:
            phase, r = multiply(p, g)
            new.append(r if phase.real > 0 else -r)
        out += new
    return out


def measure_generators(labels: np.ndarray, signs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample b from the pure stabilizer state with the given generators.

    The Z-type subgroup (found by eliminating the X parts) fixes parities of b;
    b is uniform over the affine solution space of those constraints.
    """
    n = labels.shape[-1]
    x, z = labels_to_xz(labels)
    rows = [(_to_mask(x[i]), _to_mask(z[i]), int(signs[i] < 0)) for i in range(len(labels))]
    for col in range(n):
        bit = 1 << col
        piv = next((r for r in rows if r[0] & bit), None)
        if piv is None:
            continue
        rows.remove(piv)
        rows = [_row_product(r, piv) if r[0] & bit else r for r in rows]
    # remaining rows are Z-type: parity(z & b) = s; reduce to RREF
    cons = [(r[1], r[2]) for r in rows]
    pivots = []
    for col in range(n):
        bit = 1 << col
        piv = next((c for c in cons if c[0] & bit), None)
        if piv is None:
            continue
        cons.remove(piv)
        cons = [(c[0] ^ piv[0], c[1] ^ piv[1]) if c[0] & bit else c for c in cons]
        pivots = [(p[0] ^ piv[0], p[1] ^ piv[1], p[2]) if p[0] & bit else p for p in pivots]
        pivots.append(piv + (bit,))
    if any(c[1] for c in cons):
        raise ValueError("inconsistent stabilizer constraints")
    pivot_mask = 0
    for p in pivots:
        pivot_mask |= p[2]
    b = int(rng.integers(0, 1 << n)) & ~pivot_mask
    for zmask, s, bit in pivots:
        if s ^ ((zmask & b).bit_count() & 1):
            b |= bit
    return np.array([(b >> q) & 1 for q in range(n)], dtype=np.uint8)


def measure_all(state: StabilizerState, circuit, rng: np.random.Generator) -> np.ndarray:
    """Measure U rho U^dag in the computational basis.

    ``circuit`` is a ``CliffordTableau`` or an unbatched ``BrickworkCircuit``.
    """
    if not state.is_pure:
        raise ValueError("measure_all needs a pure stabilizer state (k = n)")
    lab, sg = state.labels()
    if hasattr(circuit, "conjugate_labels"):
        if circuit.n != state.n:
            raise ValueError(f"circuit on {circuit.n} qubits, state on {state.n}")
        lab, sg = circuit.conjugate_labels(lab, sg)
    else:
        if circuit.n != state.n:
            raise ValueError(f"tableau on {circuit.n} qubits, state on {state.n}")
        x, z = labels_to_xz(lab)
        ox, oz, os_ = circuit.conjugate_xz(x, z, (sg < 0).astype(np.int64))
        lab, sg = ox.astype(np.int64) + 2 * oz, np.where(os_, -1, 1)
    return measure_generators(lab, sg, rng)
