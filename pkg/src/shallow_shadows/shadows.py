"""Snapshots of brickwork-Clifford measurements and shadow estimation.

A snapshot is ``sigma = U^dag |b><b| U``.  Writing ``O = sum_lam beta_lam P_lam``
and ``M^{-1}(P_lam) = P_lam / t_lam``, the single-snapshot estimate is

    o(U, b) = sum_lam beta_lam v_lam <b|U P_lam U^dag|b>,   v ~ 1/t.

Sparse observables propagate each term forward through U.  Shallow
observables (coefficients given as an MPS) use that sigma is a stabilizer
state: its 2^n Pauli components are the signed elements of the group
generated by ``U^dag (-1)^{b_q} Z_q U``, so the estimate is a signed sum of
``beta * v`` over those elements.  The tensor-network route (Pauli MPS of
sigma with bond 4^{d-1}) gives the same number and is kept for checking.
"""

from __future__ import annotations

import functools
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import (
    brickwork_pair_mps,
    build_t_mps,
    lift_to_pauli_mps,
    pair_signature,
    split_pair_sites,
    t_closed_form,
    t_values,
)
from .circuits import INF, BrickworkCircuit, BrickworkSpec, parse_depth, sample_circuit, stack_circuits, stream_rng
from .clifford import clifford_group
from .inverse import InversionResult, cost_exhaustive, exact_inverse
from .mps import PeriodicMPS, add, dot, hadamard
from .pauli import LABEL_CHARS, PAULI_MATRICES, PauliString
from .stabilizer import StabilizerState, measure_all

DENSE_TABLE_MAX_QUBITS = 10


# ---------------------------------------------------------------------------
# snapshots


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Outcome bits plus what is needed to rebuild U.

    Either (seed, stream_id), in which case U is regenerated from the RNG
    stream that produced it, or an explicit ``gates`` dict.
    """

    n: int
    d: float | int
    bits: np.ndarray
    seed: int | None = None
    stream_id: int | None = None
    gates: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "d", parse_depth(self.d))
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.shape != (self.n,) or np.any(bits > 1):
            raise ValueError(f"outcome must be {self.n} bits")
        object.__setattr__(self, "bits", bits)
        if self.gates is None and (self.seed is None or self.stream_id is None):
            raise ValueError("snapshot needs seed and stream_id, or explicit gates")

    @property
    def spec(self) -> BrickworkSpec:
        return BrickworkSpec(self.n, self.d, 0 if self.seed is None else int(self.seed))

    def circuit(self) -> BrickworkCircuit:
        if self.gates is not None:
            return BrickworkCircuit.from_dict(self.spec, self.gates)
        return sample_circuit(self.spec, stream_rng(self.seed, self.stream_id))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Snapshot):
            return NotImplemented
        return (
            (self.n, self.d, self.seed, self.stream_id) == (other.n, other.d, other.seed, other.stream_id)
            and np.array_equal(self.bits, other.bits)
            and self.gates == other.gates
        )


def acquire(state: StabilizerState, spec: BrickworkSpec, count: int, first_stream: int = 0) -> list[Snapshot]:
    """Simulate ``count`` snapshots; snapshot i uses stream ``first_stream + i`` of ``spec.seed``.

    The circuit is drawn first from the stream and the outcome after, so a
    record only needs (seed, stream_id, bits).
    """
    if not state.is_pure:
        raise ValueError("acquisition needs a pure stabilizer state")
    if state.n != spec.n:
        raise ValueError(f"state on {state.n} qubits, circuit on {spec.n}")
    out = []
    for i in range(first_stream, first_stream + int(count)):
        rng = stream_rng(spec.seed, i)
        circ = sample_circuit(spec, rng)
        b = measure_all(state, circ, rng)
        out.append(Snapshot(spec.n, spec.d, b, seed=spec.seed, stream_id=i))
    return out


class SnapshotSet:
    """Snapshots of a single (n, d) with the batched circuit cached."""

    def __init__(self, snapshots):
        snaps = list(snapshots.snapshots if isinstance(snapshots, SnapshotSet) else snapshots)
        if not snaps:
            raise ValueError("no snapshots")
        n, d = snaps[0].n, snaps[0].d
        if any(s.n != n or s.d != d for s in snaps):
            raise ValueError("snapshots mix different (n, d)")
        self.snapshots = snaps
        self.n, self.d = n, d
        self.bits = np.stack([s.bits for s in snaps]).astype(np.int64)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return SnapshotSet(self.snapshots[idx])
        return self.snapshots[idx]

    @property
    def is_global(self) -> bool:
        return self.d == INF

    @functools.cached_property
    def circuits(self) -> list[BrickworkCircuit]:
        return [s.circuit() for s in self.snapshots]

    @functools.cached_property
    def stacked(self) -> BrickworkCircuit:
        if self.is_global:
            raise ValueError("global circuits are not stacked")
        return stack_circuits(self.circuits)

    def stabilizer_group(self, start: int = 0, stop: int | None = None):
        """Signed Pauli components of each sigma, labels (M, 2^n, n) and signs (M, 2^n)."""
        stop = len(self) if stop is None else stop
        n = self.n
        zs = 2 * np.eye(n, dtype=np.int64)
        signs = 1 - 2 * self.bits[start:stop]  # (M, n)
        if self.is_global:
            lab, sg = [], []
            for i in range(start, stop):
                l, s = self.circuits[i].conjugate_labels(zs, signs[i - start], inverse=True)
                lab.append(l)
                sg.append(s)
            lab, sg = np.stack(lab), np.stack(sg)
        else:
            circ = self.stacked
            if start or stop != len(self):
                circ = BrickworkCircuit(circ.spec, tuple(l[start:stop] for l in circ.layers))
            lab, sg = circ.conjugate_labels(np.broadcast_to(zs, (stop - start, n, n)), signs, inverse=True)
        return group_elements(lab, sg)


def _sign_of_product(l1, s1, l2, s2):
    """Labels and signs of products of commuting signed Pauli strings (broadcast)."""
    x1, z1 = l1 & 1, l1 >> 1
    x2, z2 = l2 & 1, l2 >> 1
    x, z = x1 ^ x2, z1 ^ z2
    a = (x1 & z1).sum(-1) + (x2 & z2).sum(-1) + 2 * (z1 & x2).sum(-1) - (x & z).sum(-1)
    a = a % 4
    if np.any(a % 2):
        raise ValueError("product of anticommuting Paulis")
    return x + 2 * z, s1 * s2 * (1 - a)  # a in {0, 2}


def group_elements(labels, signs):
    """All 2^k products of k commuting generators, batched over leading axes.

    labels (..., k, n), signs (..., k) -> (..., 2^k, n), (..., 2^k); element
    index bit i says whether generator i is included.
    """
    labels = np.asarray(labels, dtype=np.int64)
    signs = np.asarray(signs, dtype=np.int64)
    *batch, k, n = labels.shape
    el = np.zeros((*batch, 1, n), dtype=np.int64)
    sg = np.ones((*batch, 1), dtype=np.int64)
    for i in range(k):
        nl, ns = _sign_of_product(el, sg, labels[..., i : i + 1, :], signs[..., i : i + 1])
        el = np.concatenate([el, nl], axis=-2)
        sg = np.concatenate([sg, ns], axis=-1)
    return el, sg


def label_index(labels) -> np.ndarray:
    """Row-major index of label strings in the 4^n dense table (qubit 0 first)."""
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[-1]
    return labels @ (4 ** np.arange(n - 1, -1, -1, dtype=np.int64))


def all_labels(n: int) -> np.ndarray:
    idx = np.arange(4**n, dtype=np.int64)
    return (idx[:, None] // 4 ** np.arange(n - 1, -1, -1, dtype=np.int64)) % 4


# ---------------------------------------------------------------------------
# observables


class SparseObservable:
    """O = sum_k beta_k P_k with real coefficients and unsigned Pauli strings.

    Signs of signed input strings are folded into the coefficients and
    repeated strings are merged.
    """

    def __init__(self, terms, n: int | None = None):
        merged: dict[tuple, float] = {}
        for coef, p in terms:
            if isinstance(p, str):
                p = PauliString.from_label(p)
            key = tuple(int(v) for v in p.labels)
            merged[key] = merged.get(key, 0.0) + float(coef) * p.sign
        if not merged:
            if n is None:
                raise ValueError("empty observable needs n")
            merged[(0,) * n] = 0.0
        lengths = {len(k) for k in merged}
        if len(lengths) != 1:
            raise ValueError("terms act on different numbers of qubits")
        self.labels = np.array(list(merged.keys()), dtype=np.int64)
        self.coeffs = np.array(list(merged.values()))
        if n is not None and self.labels.shape[1] != n:
            raise ValueError(f"terms on {self.labels.shape[1]} qubits, expected {n}")

    @property
    def n(self) -> int:
        return self.labels.shape[1]

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def terms(self) -> list[tuple[float, PauliString]]:
        return [(float(c), PauliString.from_labels(l)) for c, l in zip(self.coeffs, self.labels)]

    @property
    def identity_coeff(self) -> float:
        mask = ~self.labels.any(axis=1)
        return float(self.coeffs[mask].sum())

    def traceless(self) -> "SparseObservable":
        keep = self.labels.any(axis=1)
        return SparseObservable(zip(self.coeffs[keep], map(PauliString.from_labels, self.labels[keep])), n=self.n)

    def to_matrix(self) -> np.ndarray:
        if self.n > 12:
            raise ValueError("dense matrix limited to n <= 12")
        out = np.zeros((2**self.n, 2**self.n), dtype=complex)
        for c, l in zip(self.coeffs, self.labels):
            out += c * PauliString.from_labels(l).to_matrix()
        return out

    def norm_inf(self) -> float:
        """Operator norm; exact for n <= 12, else the bound sum |beta|."""
        if self.n <= 12:
            return float(np.max(np.abs(np.linalg.eigvalsh(self.to_matrix()))))
        return float(np.abs(self.coeffs).sum())

    def to_shallow(self) -> "ShallowObservable":
        n = self.n
        mps = None
        for c, l in zip(self.coeffs, self.labels):
            vecs = [np.eye(4)[q] for q in l]
            vecs[0] = vecs[0] * c
            term = PeriodicMPS.product(vecs)
            mps = term if mps is None else add(mps, term)
        return ShallowObservable(mps if mps is not None else PeriodicMPS.constant(n, 4, 0.0))

    def to_dict(self) -> dict:
        return {"n": self.n, "terms": [[float(c), _label_str(l)] for c, l in zip(self.coeffs, self.labels)]}

    @classmethod
    def from_dict(cls, data) -> "SparseObservable":
        terms = data["terms"] if isinstance(data, dict) else data
        return cls([(c, PauliString.from_label(s)) for c, s in terms], n=data.get("n") if isinstance(data, dict) else None)

    def __repr__(self) -> str:
        return f"SparseObservable(n={self.n}, terms={len(self)})"


def _label_str(labels) -> str:
    return "".join(LABEL_CHARS[int(v)] for v in labels)


def cluster_hamiltonian(n: int) -> SparseObservable:
    """H = sum_i (Z_{i-1} Z_i Z_{i+1} + X_i) on a ring."""
    terms = []
    for i in range(n):
        zzz = np.zeros(n, dtype=int)
        zzz[[(i - 1) % n, i, (i + 1) % n]] = 2
        x = np.zeros(n, dtype=int)
        x[i] = 1
        terms += [(1.0, PauliString.from_labels(zzz)), (1.0, PauliString.from_labels(x))]
    return SparseObservable(terms)


class ShallowObservable:
    """Observable with Pauli coefficients beta_lam given by an n-site phys-4 MPS."""

    def __init__(self, beta: PeriodicMPS, norm_inf: float | None = None):
        if any(p != 4 for p in beta.phys_dims):
            raise ValueError("coefficient MPS must have physical dimension 4 on every site")
        self.beta = beta
        self._norm_inf = norm_inf

    @property
    def n(self) -> int:
        return self.beta.n_sites

    @property
    def identity_coeff(self) -> float:
        return float(self.beta.evaluate(np.zeros(self.n, dtype=int)))

    def traceless(self) -> "ShallowObservable":
        c = self.identity_coeff
        if c == 0.0:
            return self
        delta = PeriodicMPS.product([np.eye(4)[0]] * self.n).scaled(-c)
        return ShallowObservable(add(self.beta, delta))

    def coefficients(self) -> np.ndarray:
        return self.beta.to_dense()

    def to_matrix(self) -> np.ndarray:
        if self.n > 10:
            raise ValueError("dense matrix limited to n <= 10")
        return coefficients_to_matrix(self.coefficients())

    def norm_inf(self) -> float:
        if self._norm_inf is not None:
            return self._norm_inf
        if self.n > 10:
            raise ValueError("operator norm of a large MPO must be supplied")
        return float(np.max(np.abs(np.linalg.eigvalsh(self.to_matrix()))))


def coefficients_to_matrix(coef) -> np.ndarray:
    """sum_lam coef[lam] P_lam for a dense 4^n coefficient vector."""
    coef = np.asarray(coef, dtype=float)
    if coef.size == 1:
        return np.array([[coef.item()]], dtype=complex)
    blocks = coef.reshape(4, -1)
    out = 0
    for l in range(4):
        if np.any(blocks[l]):
            out = out + np.kron(PAULI_MATRICES[l], coefficients_to_matrix(blocks[l]))
    if isinstance(out, int):
        m = int(round(np.sqrt(coef.size)))
        return np.zeros((m, m), dtype=complex)
    return out


def ghz_projector(n: int) -> ShallowObservable:
    """|GHZ><GHZ| as a bond-4 Pauli-coefficient MPS.

    beta = 2^-n on {I,Z} strings with an even number of Z, and
    2^-n cos(pi #Y / 2) on {X,Y} strings.
    """
    site = np.zeros((4, 4, 4))
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    site[0, :2, :2] = np.eye(2)
    site[2, :2, :2] = sx
    site[1, 2:, 2:] = np.eye(2)
    site[3, 2:, 2:] = rot
    sites = [site / 2 for _ in range(n)]
    sites[0] = sites[0] / 2
    return ShallowObservable(PeriodicMPS(sites), norm_inf=1.0)


# ---------------------------------------------------------------------------
# inverse channel coefficients


class InverseSource:
    """v ~ 1/t on Pauli labels for one (n, d).

    ``inverse`` may be None (exact 1/t), an ``InversionResult`` (must be
    heralded) or a raw pair-signature MPS.
    """

    def __init__(self, n: int, d, inverse=None, herald_tol: float | None = None):
        self.n, self.d = n, parse_depth(d)
        self.V = None
        self.herald_epsilon = 0.0
        if isinstance(inverse, InversionResult):
            if not inverse.heralded:
                raise ValueError(f"inverse is not heralded (C0 = {inverse.final_cost:.3e})")
            self.V = inverse.V
            self.herald_epsilon = inverse.herald_epsilon
        elif isinstance(inverse, PeriodicMPS):
            self.V = inverse
            if self.d in (0, INF):
                raise ValueError("d=0 and d=inf use closed-form inverses")
            if n // 2 <= 12:
                self.herald_epsilon = float(np.sqrt(cost_exhaustive(build_t_mps(n, self.d), inverse)[0]))
            else:
                self.herald_epsilon = float("nan")
        elif inverse is not None:
            raise TypeError("inverse must be None, an InversionResult or a PeriodicMPS")
        if self.V is not None and 2 * self.V.n_sites != n:
            raise ValueError(f"inverse covers {2 * self.V.n_sites} qubits, expected {n}")
        if herald_tol is not None and not self.herald_epsilon <= herald_tol:
            raise ValueError(f"herald epsilon {self.herald_epsilon} above tolerance {herald_tol}")

    @property
    def exact(self) -> bool:
        return self.V is None

    def on_labels(self, labels) -> np.ndarray:
        labels = np.atleast_2d(np.asarray(labels, dtype=np.int64))
        if self.V is not None:
            return self.V.evaluate_many(pair_signature(labels))
        return 1.0 / t_values(self.n, self.d, labels)

    def dense(self) -> np.ndarray:
        """v on all 4^n labels (qubit 0 most significant)."""
        if self.n > DENSE_TABLE_MAX_QUBITS:
            raise ValueError(f"dense 4^n table limited to n <= {DENSE_TABLE_MAX_QUBITS}")
        labels = all_labels(self.n)
        if self.d in (0, INF):
            return 1.0 / np.asarray(t_closed_form(self.n, self.d, (labels > 0).sum(-1)), dtype=float)
        sig = pair_signature(labels)
        sig_idx = sig @ (2 ** np.arange(sig.shape[1] - 1, -1, -1))
        table = self.V.to_dense() if self.V is not None else 1.0 / build_t_mps(self.n, self.d).to_dense()
        return table[sig_idx]

    @functools.cached_property
    def lifted(self) -> PeriodicMPS:
        """v as an n-site phys-4 MPS."""
        n = self.n
        if self.d == 0:
            return PeriodicMPS.product([np.array([1.0, 3.0, 3.0, 3.0])] * n)
        if self.d == INF:
            const = PeriodicMPS.constant(n, 4, 2.0**n + 1)
            ident = PeriodicMPS.product([np.eye(4)[0]] * n).scaled(-(2.0**n))
            return add(const, ident)
        v = self.V if self.V is not None else exact_inverse(build_t_mps(n, self.d)).V
        return lift_to_pauli_mps(v)


def _as_source(n, d, inverse) -> InverseSource:
    return inverse if isinstance(inverse, InverseSource) else InverseSource(n, d, inverse)


# ---------------------------------------------------------------------------
# per-snapshot estimates


def sparse_values(obs: SparseObservable, snaps, inverse=None, chunk: int = 4096) -> np.ndarray:
    """Single-snapshot estimates sum_k beta_k v_k <b|U P_k U^dag|b>.

    ``inverse`` may also be an array of per-term v values.
    """
    snaps = snaps if isinstance(snaps, SnapshotSet) else SnapshotSet(snaps)
    if obs.n != snaps.n:
        raise ValueError(f"observable on {obs.n} qubits, snapshots on {snaps.n}")
    if isinstance(inverse, np.ndarray) or isinstance(inverse, (list, tuple)):
        v = np.asarray(inverse, dtype=float)
        if v.shape != obs.coeffs.shape:
            raise ValueError("per-term inverse values must match the number of terms")
    else:
        v = _as_source(obs.n, snaps.d, inverse).on_labels(obs.labels)
    w = obs.coeffs * v
    out = np.empty(len(snaps))
    for start in range(0, len(snaps), chunk):
        stop = min(start + chunk, len(snaps))
        bits = snaps.bits[start:stop]
        if snaps.is_global:
            rows = [snaps.circuits[i].conjugate_labels(obs.labels) for i in range(start, stop)]
            lab = np.stack([r[0] for r in rows])
            sg = np.stack([r[1] for r in rows])
        else:
            circ = snaps.stacked
            circ = BrickworkCircuit(circ.spec, tuple(l[start:stop] for l in circ.layers))
            lab, sg = circ.conjugate_labels(obs.labels)
        diag = ~np.any(lab & 1, axis=-1)
        parity = np.einsum("mrn,mn->mr", lab >> 1, bits) & 1
        out[start:stop] = (diag * sg * (1 - 2 * parity)) @ w
    return out


def shallow_values(obs: ShallowObservable, snaps, inverse=None, chunk: int = 512) -> np.ndarray:
    """Single-snapshot estimates sum over sigma's stabilizer group of sign * beta * v."""
    snaps = snaps if isinstance(snaps, SnapshotSet) else SnapshotSet(snaps)
    if obs.n != snaps.n:
        raise ValueError(f"observable on {obs.n} qubits, snapshots on {snaps.n}")
    src = _as_source(obs.n, snaps.d, inverse)
    table = None
    if obs.n <= DENSE_TABLE_MAX_QUBITS:
        table = obs.coefficients() * src.dense()
    else:
        weighted = hadamard(obs.beta, src.lifted)
    out = np.empty(len(snaps))
    for start in range(0, len(snaps), chunk):
        stop = min(start + chunk, len(snaps))
        lab, sg = snaps.stabilizer_group(start, stop)
        if table is not None:
            vals = table[label_index(lab)]
        else:
            vals = weighted.evaluate_many(lab.reshape(-1, obs.n)).reshape(sg.shape)
        out[start:stop] = (sg * vals).sum(-1)
    return out


def inverted_snapshot_values(observables, snaps, inverse=None) -> np.ndarray:
    """Same estimates with M^{-1} applied to each snapshot instead of each observable.

    Cheaper when there are more observables than snapshots: v is evaluated
    on the 2^n components of each sigma and every observable only needs its
    beta there.  Returns (n_observables, n_snapshots).
    """
    snaps = snaps if isinstance(snaps, SnapshotSet) else SnapshotSet(snaps)
    src = _as_source(snaps.n, snaps.d, inverse)
    lab, sg = snaps.stabilizer_group()
    flat = lab.reshape(-1, snaps.n)
    coef = (sg * src.on_labels(flat).reshape(sg.shape))  # components of M^{-1}(sigma) times 2^n
    out = []
    for obs in observables:
        if isinstance(obs, SparseObservable):
            idx = {tuple(l): c for l, c in zip(obs.labels.tolist(), obs.coeffs)}
            beta = np.array([idx.get(tuple(l), 0.0) for l in flat.tolist()])
        else:
            beta = obs.beta.evaluate_many(flat)
        out.append((coef * beta.reshape(sg.shape)).sum(-1))
    return np.array(out)


def estimate_values(observables, snaps, inverse=None, direction: str = "auto") -> np.ndarray:
    """Per-snapshot estimates for several observables, shape (n_obs, n_snapshots).

    ``direction`` chooses whether M^{-1} is applied to the observables or to
    the snapshots; "auto" picks the side with fewer objects.
    """
    observables = list(observables)
    snaps = snaps if isinstance(snaps, SnapshotSet) else SnapshotSet(snaps)
    if direction == "auto":
        direction = "snapshot" if len(observables) > len(snaps) else "observable"
    if direction == "snapshot":
        return inverted_snapshot_values(observables, snaps, inverse)
    if direction != "observable":
        raise ValueError("direction must be 'auto', 'observable' or 'snapshot'")
    src = _as_source(snaps.n, snaps.d, inverse)
    rows = []
    for obs in observables:
        f = sparse_values if isinstance(obs, SparseObservable) else shallow_values
        rows.append(f(obs, snaps, src))
    return np.array(rows)


def snapshot_to_pauli_mps(snap: Snapshot) -> PeriodicMPS:
    """Pauli coefficients alpha_lam = 2^-n <b|U P_lam U^dag|b> of sigma as an MPS.

    |b><b| is a product of (I +- Z)/2; each gate acts on Pauli labels as a
    signed permutation, so the network has 4-dimensional legs and the pair
    sites carry bond 4^{d-1}.
    """
    if snap.d == INF:
        raise ValueError("no brickwork MPS for d=inf")
    circ = snap.circuit()
    n, d = snap.n, snap.d
    g1, g2 = clifford_group(1), clifford_group(2)
    maps = []
    for q in range(n):
        g = int(circ.layers[0][q])
        p = np.zeros((4, 4))
        p[np.arange(4), g1.image[g]] = g1.sign[g]
        maps.append(p)
    kernels = {}

    def gate(t, j):
        g = int(circ.layers[t][j])
        if g not in kernels:
            k = np.zeros((4, 4, 4, 4))
            loc = np.arange(16)
            img = g2.image[g]
            k[img & 3, img >> 2, loc & 3, loc >> 2] = g2.sign[g]
            kernels[g] = k
        return kernels[g]

    finals = [np.array([0.5, 0.0, 0.5 * (1 - 2 * int(b)), 0.0]) for b in snap.bits]
    pair = brickwork_pair_mps(n, d, maps, gate, finals)
    ident = [np.arange(4)] * (n // 2)
    return split_pair_sites(pair, ident, ident)


def mps_value(obs: ShallowObservable, snap: Snapshot, inverse=None) -> float:
    """Single-snapshot estimate by tensor contraction: 2^n sum beta v alpha."""
    src = _as_source(obs.n, snap.d, inverse)
    alpha = snapshot_to_pauli_mps(snap)
    return 2.0**obs.n * dot(hadamard(obs.beta, src.lifted), alpha)


# ---------------------------------------------------------------------------
# aggregation


def median_of_means(values, K: int = 1) -> float:
    values = np.asarray(values, dtype=float).ravel()
    if K < 1:
        raise ValueError("K must be >= 1")
    if values.size % K:
        raise ValueError(f"K={K} does not divide {values.size} values")
    return float(np.median(values.reshape(K, -1).mean(axis=1)))


@dataclass
class EstimationReport:
    estimate: float
    block_means: list
    herald_epsilon: float
    variance_bound: float | None
    n_snapshots: int
    K: int
    sample_variance: float
    bias_bound: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def stderr(self) -> float:
        return float(np.sqrt(self.sample_variance / self.n_snapshots))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["stderr"] = self.stderr
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def report(values, K: int = 1, herald_epsilon: float = 0.0, variance_bound=None, norm_inf=None,
           **extra) -> EstimationReport:
    values = np.asarray(values, dtype=float)
    if K < 1 or values.size % K:
        raise ValueError(f"K={K} must divide {values.size} snapshots")
    blocks = values.reshape(K, -1).mean(axis=1)
    bias = herald_epsilon * norm_inf if norm_inf is not None else 0.0
    return EstimationReport(
        estimate=float(np.median(blocks)),
        block_means=[float(b) for b in blocks],
        herald_epsilon=float(herald_epsilon),
        variance_bound=None if variance_bound is None else float(variance_bound),
        n_snapshots=int(values.size),
        K=int(K),
        sample_variance=float(values.var(ddof=1)) if values.size > 1 else 0.0,
        bias_bound=float(bias),
        extra=extra,
    )


def estimate_sparse(obs: SparseObservable, snaps, inverse=None, K: int = 1, variance_bound=None) -> EstimationReport:
    snaps = snaps if isinstance(snaps, SnapshotSet) else SnapshotSet(snaps)
    src = inverse if isinstance(inverse, (np.ndarray, list, tuple)) else _as_source(obs.n, snaps.d, inverse)
    vals = sparse_values(obs, snaps, src)
    eps = 0.0 if isinstance(src, (np.ndarray, list, tuple)) else src.herald_epsilon
    norm = obs.norm_inf() if eps else None
    return report(vals, K, eps, variance_bound, norm)


def estimate_shallow(obs: ShallowObservable, snaps, inverse=None, K: int = 1, variance_bound=None) -> EstimationReport:
    snaps = snaps if isinstance(snaps, SnapshotSet) else SnapshotSet(snaps)
    src = _as_source(obs.n, snaps.d, inverse)
    vals = shallow_values(obs, snaps, src)
    norm = obs.norm_inf() if src.herald_epsilon else None
    return report(vals, K, src.herald_epsilon, variance_bound, norm)
