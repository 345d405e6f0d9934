"""Circular brickwork Clifford circuits and Pauli propagation through them.

A circuit of depth d has a layer of n single-qubit Cliffords followed by d
layers of n/2 two-qubit Cliffords.  Odd layers act on qubit pairs
(0,1), (2,3), ...; even layers are shifted by one and include the wrap-around
pair (n-1, 0).  Gates are stored as indices into the enumerated local groups
so that circuits are cheap to sample, serialize and batch.

Gate-index arrays may carry leading batch dimensions, in which case every
propagation routine acts on a batch of independent circuits at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import CliffordTableau, clifford_group, random_clifford
from .pauli import PauliString, labels_to_xz, xz_to_labels

INF = math.inf


def parse_depth(d) -> float | int:
    if isinstance(d, str):
        if d.strip().lower() in ("inf", "infinity", "oo"):
            return INF
        d = int(d)
    if d == INF:
        return INF
    if int(d) != d or d < 0:
        raise ValueError(f"depth must be a non-negative integer or inf, got {d!r}")
    return int(d)


def stream_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Counter-based generator for (seed, stream) so shards are reproducible."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(ss))


def layer_pairs(n: int, layer: int) -> np.ndarray:
    """Qubit pairs of two-qubit layer ``layer`` (1-based), shape (n/2, 2)."""
    if layer % 2 == 1:
        first = np.arange(0, n, 2)
    else:
        first = np.arange(1, n + 1, 2)
    return np.stack([first % n, (first + 1) % n], axis=1)


@dataclass(frozen=True)
class BrickworkSpec:
    n: int
    d: float | int
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError(f"brickwork needs an even number of qubits >= 2, got {self.n}")
        object.__setattr__(self, "d", parse_depth(self.d))

    @property
    def is_global(self) -> bool:
        return self.d == INF

    @property
    def layout(self) -> list[np.ndarray]:
        if self.is_global:
            raise ValueError("d=inf has no brickwork layout")
        out = [np.arange(self.n)[:, None]]
        out += [layer_pairs(self.n, i) for i in range(1, self.d + 1)]
        return out


@dataclass(frozen=True, eq=False)
class BrickworkCircuit:
    """Sampled circuit: gate indices per layer, or a global tableau for d=inf."""

    spec: BrickworkSpec
    layers: tuple = field(default=())
    global_tableau: CliffordTableau | None = None

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def batch_shape(self) -> tuple:
        if self.global_tableau is not None:
            return ()
        return self.layers[0].shape[:-1]

    def conjugate_labels(self, labels, signs=None, inverse: bool = False):
        """Propagate Pauli labels: U P U^dag (or U^dag P U when ``inverse``).

        ``labels`` has shape (..., B, n) with the leading dims broadcast
        against the circuit batch; returns (labels, signs) of shape
        (..., B, n) and (..., B) with signs in {+1, -1}.
        """
        labels = np.asarray(labels, dtype=np.int64)
        if signs is None:
            signs = np.ones(labels.shape[:-1], dtype=np.int64)
        signs = np.asarray(signs, dtype=np.int64)
        if self.global_tableau is not None:
            tab = self.global_tableau.inverse() if inverse else self.global_tableau
            flat = labels.reshape(-1, self.n)
            x, z = labels_to_xz(flat)
            sb = (signs.reshape(-1) < 0).astype(np.int64)
            ox, oz, os_ = tab.conjugate_xz(x, z, sb)
            out = xz_to_labels(ox, oz).reshape(labels.shape)
            return out, np.where(os_.reshape(signs.shape), -1, 1)
        batch = self.batch_shape
        shape = np.broadcast_shapes(batch + (1, 1), labels.shape)
        labels = np.array(np.broadcast_to(labels, shape))
        signs = np.array(np.broadcast_to(signs, shape[:-1]))
        order = range(len(self.layers))
        if inverse:
            order = reversed(order)
        g1, g2 = clifford_group(1), clifford_group(2)
        for i in order:
            gates = self.layers[i][..., None, :]  # broadcast over B
            if i == 0:
                image, sign = (g1.inv_image, g1.inv_sign) if inverse else (g1.image, g1.sign)
                signs = signs * np.prod(sign[gates, labels], axis=-1)
                labels = image[gates, labels]
                continue
            image, sign = (g2.inv_image, g2.inv_sign) if inverse else (g2.image, g2.sign)
            pairs = layer_pairs(self.n, i)
            a, b = pairs[:, 0], pairs[:, 1]
            local = labels[..., a] + 4 * labels[..., b]
            signs = signs * np.prod(sign[gates, local], axis=-1)
            new = image[gates, local]
            labels[..., a] = new & 3
            labels[..., b] = new >> 2
        return labels, signs

    def conjugate(self, p: PauliString, inverse: bool = False) -> PauliString:
        if self.batch_shape:
            raise ValueError("conjugate on a single Pauli needs an unbatched circuit")
        lab, sg = self.conjugate_labels(p.labels[None], [p.sign], inverse=inverse)
        return PauliString.from_labels(lab[0], int(sg[0]))

    def tableau(self) -> CliffordTableau:
        if self.global_tableau is not None:
            return self.global_tableau
        n = self.n
        rows = np.zeros((2 * n, n), dtype=np.int64)
        rows[np.arange(n), np.arange(n)] = 1
        rows[n + np.arange(n), np.arange(n)] = 2
        lab, sg = self.conjugate_labels(rows)
        x, z = labels_to_xz(lab)
        return CliffordTableau(np.concatenate([x, z], axis=1), (sg < 0).astype(np.uint8))

    def unitary(self) -> np.ndarray:
        """Dense 2^n x 2^n unitary (up to phase); qubit 0 most significant."""
        if self.global_tableau is not None or self.batch_shape:
            raise ValueError("dense unitary only for unbatched brickwork circuits")
        n = self.n
        g1, g2 = clifford_group(1), clifford_group(2)
        u = np.eye(2**n, dtype=complex)
        for i, gates in enumerate(self.layers):
            if i == 0:
                layer = np.array([[1.0 + 0j]])
                for g in gates:
                    layer = np.kron(layer, g1.unitary(int(g)))
                u = layer @ u
                continue
            for (a, b), g in zip(layer_pairs(n, i), gates):
                u = _embed_two_qubit(g2.unitary(int(g)), a, b, n) @ u
        return u

    def to_dict(self) -> dict:
        if self.global_tableau is not None:
            t = self.global_tableau
            return {"symplectic": t.symplectic.tolist(), "phases": t.phases.tolist()}
        return {"layers": [np.asarray(l).tolist() for l in self.layers]}

    @classmethod
    def from_dict(cls, spec: BrickworkSpec, data: dict) -> "BrickworkCircuit":
        if "symplectic" in data:
            return cls(spec, (), CliffordTableau(np.array(data["symplectic"]), np.array(data["phases"])))
        layers = tuple(np.asarray(l, dtype=np.int64) for l in data["layers"])
        _check_layers(spec, layers)
        return cls(spec, layers)


def _check_layers(spec: BrickworkSpec, layers) -> None:
    if len(layers) != spec.d + 1:
        raise ValueError(f"expected {spec.d + 1} layers, got {len(layers)}")
    for i, l in enumerate(layers):
        width, size = (spec.n, 24) if i == 0 else (spec.n // 2, 11520)
        if l.shape[-1] != width or l.min() < 0 or l.max() >= size:
            raise ValueError(f"layer {i} has invalid gate indices")


def _embed_two_qubit(u: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    """Dense action of a 4x4 gate on qubits (a, b); a is the first factor of u."""
    t = u.reshape(2, 2, 2, 2)
    full = np.eye(2**n, dtype=complex).reshape([2] * (2 * n))
    # contract gate output legs into positions a, b
    full = np.moveaxis(full, (a, b), (0, 1))
    full = np.tensordot(t, full, axes=([2, 3], [0, 1]))
    full = np.moveaxis(full, (0, 1), (a, b))
    return full.reshape(2**n, 2**n)


def sample_circuit(spec: BrickworkSpec, rng: np.random.Generator | None = None, size=None) -> BrickworkCircuit:
    """Draw gates uniformly from the local Clifford groups.

    ``size`` adds a leading batch dimension (brickwork only).
    """
    if rng is None:
        rng = stream_rng(spec.seed, 0)
    if spec.is_global:
        if size is not None:
            raise ValueError("batched sampling is not available for d=inf")
        return BrickworkCircuit(spec, (), random_clifford(spec.n, rng))
    batch = () if size is None else (int(size),)
    layers = [rng.integers(0, 24, size=batch + (spec.n,))]
    for _ in range(spec.d):
        layers.append(rng.integers(0, 11520, size=batch + (spec.n // 2,)))
    return BrickworkCircuit(spec, tuple(layers))


def sample_brickwork(spec: BrickworkSpec, rng: np.random.Generator | None = None) -> CliffordTableau:
    return sample_circuit(spec, rng).tableau()


def stack_circuits(circuits) -> BrickworkCircuit:
    circuits = list(circuits)
    spec = circuits[0].spec
    if spec.is_global:
        raise ValueError("cannot stack global Clifford circuits")
    layers = tuple(np.stack([c.layers[i] for c in circuits]) for i in range(len(circuits[0].layers)))
    return BrickworkCircuit(spec, layers)


def monte_carlo_t(lam: PauliString, spec: BrickworkSpec, shots: int, rng: np.random.Generator | None = None,
                  chunk: int = 20000) -> tuple[float, float]:
    """Fraction of sampled U with U P U^dag in +-Z, with its binomial stderr."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if lam.n != spec.n:
        raise ValueError(f"Pauli on {lam.n} qubits, circuit on {spec.n}")
    if rng is None:
        rng = stream_rng(spec.seed, 0)
    hits = 0
    if spec.is_global:
        for _ in range(shots):
            out = sample_circuit(spec, rng).conjugate(lam)
            hits += not out.x.any()
    else:
        done = 0
        while done < shots:
            m = min(chunk, shots - done)
            circ = sample_circuit(spec, rng, size=m)
            lab, _ = circ.conjugate_labels(lam.labels[None])
            hits += int(np.all((lab & 1) == 0, axis=-1).sum())
            done += m
    p = hits / shots
    return p, math.sqrt(p * (1 - p) / shots)
