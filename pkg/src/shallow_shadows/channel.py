"""Measurement-channel eigenvalues t and pair probabilities tau as tensor networks.

For a brickwork ensemble of depth d the channel is diagonal in the Pauli
basis with eigenvalue ``t_lam = Pr_U[U P_lam U^dag in +-Z]``.  Conjugating a
Pauli by random local Cliffords is a Markov chain on Pauli labels, so t (and
its two-Pauli analogue tau) are sums over paths through the brickwork.  The
chain is lumpable: only the signature (identity or not) of each qubit
matters for t, and for tau only the class of the per-qubit label pair
(II, IP, PI, PP, PQ).  All networks are grouped into pair sites covering
qubits (2j, 2j+1), giving bond dimension D^{d-1} for per-qubit state size D.
"""

from __future__ import annotations

import functools

import numpy as np

from .circuits import INF, layer_pairs, parse_depth
from .clifford import label_kernel, pair_label_kernel
from .mps import PeriodicMPS, hadamard
from .pauli import PauliString, labels_to_xz

# signature-level two-qubit kernel, columns indexed by OR of the input bits
B_PRIME = np.array([[1.0, 0.0], [0.0, 0.2], [0.0, 0.2], [0.0, 0.6]])
W_FINAL = np.array([1.0, 1.0 / 3.0])

SIG_OF_LABEL = np.array([0, 1, 1, 1])
TAU_MAX_DEPTH = 3


def _check_n(n: int) -> None:
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and >= 2, got {n}")


# ---------------------------------------------------------------------------
# generic brickwork network -> pair-site MPS


def brickwork_pair_mps(n: int, d: int, phys_maps, gate, finals) -> PeriodicMPS:
    """Contract a brickwork Markov network into n/2 pair sites.

    phys_maps[q]: (p_q, D) map from the physical index of qubit q to its
    time-0 variable; gate(t, j): (D, D, D, D) kernel ``[out_a, out_b, in_a,
    in_b]`` of the layer-t gate in slot j; finals[q]: (D,) weight on the
    time-d variable.  Site j has physical index ``x_a * p_b + x_b`` and bonds
    carrying v(2j, 1..d-1) on the left and v(2j+2, 1..d-1) on the right.
    """
    _check_n(n)
    sites = []
    for j in range(n // 2):
        a, b, c = 2 * j, 2 * j + 1, (2 * j + 2) % n
        pa, pb = phys_maps[a].shape[0], phys_maps[b].shape[0]
        if d == 0:
            va = phys_maps[a] @ finals[a]
            vb = phys_maps[b] @ finals[b]
            sites.append(np.outer(va, vb).reshape(pa * pb, 1, 1))
            continue
        A = lambda t: 2 + t  # noqa: E731
        B = lambda t: 3 + d + t  # noqa: E731
        C = lambda t: 4 + 2 * d + t  # noqa: E731
        ops = [phys_maps[a], [0, A(0)], phys_maps[b], [1, B(0)]]
        for t in range(1, d + 1):
            k = gate(t, j)
            if t % 2:
                ops += [k, [A(t), B(t), A(t - 1), B(t - 1)]]
            else:
                ops += [k, [B(t), C(t), B(t - 1), C(t - 1)]]
        ops += [finals[b], [B(d)]]
        if d % 2:
            ops += [finals[a], [A(d)]]
        else:
            ops += [finals[c], [C(d)]]
        out = [0, 1] + [A(t) for t in range(1, d)] + [C(t) for t in range(1, d)]
        tensor = np.einsum(*ops, out, optimize="greedy")
        chi = int(np.prod(tensor.shape[2 : 2 + d - 1], dtype=np.int64))
        sites.append(tensor.reshape(pa * pb, chi, chi))
    return PeriodicMPS(sites)


def split_pair_sites(pair: PeriodicMPS, maps_a, maps_b=None) -> PeriodicMPS:
    """Refine pair sites into qubit sites.

    The pair tensor is indexed by (class_a, class_b); ``maps_a[j]`` (length
    p_a) and ``maps_b[j]`` send a qubit's physical digit to its class.  The
    first qubit copies its class into the bond, so the inner bond is
    ``chi * n_class_a``.
    """
    sites = []
    for j, s in enumerate(pair.sites):
        ma = np.asarray(maps_a[j])
        mb = np.asarray(maps_b[j]) if maps_b is not None else None
        chi_l, chi_r = s.shape[1], s.shape[2]
        ca = int(ma.max()) + 1
        cb = s.shape[0] // ca
        t = s.reshape(ca, cb, chi_l, chi_r)
        left = np.zeros((ma.size, chi_l, chi_l * ca))
        for x, c in enumerate(ma):
            left[x, np.arange(chi_l), np.arange(chi_l) * ca + c] = 1.0
        if mb is None:
            right = t.transpose(1, 2, 0, 3)
        else:
            right = t[:, mb].transpose(1, 2, 0, 3)
        sites += [left, right.reshape(right.shape[0], chi_l * ca, chi_r)]
    return PeriodicMPS(sites)


# ---------------------------------------------------------------------------
# t: single-Pauli eigenvalues


def _t_gate(t, j):
    return B_PRIME[:, [0, 1, 1, 1]].reshape(2, 2, 2, 2)


@functools.lru_cache(maxsize=64)
def build_t_mps(n: int, d: int) -> PeriodicMPS:
    """Eigenvalue MPS over pair signatures h_j = OR of the signature of (2j, 2j+1).

    N = n/2 sites, physical dimension 2, bond 2^{d-1}.
    """
    _check_n(n)
    d = parse_depth(d)
    if d == INF or d < 1:
        raise ValueError("build_t_mps needs finite d >= 1; d=0 and d=inf are closed forms")
    eye = np.eye(2)
    full = brickwork_pair_mps(n, d, [eye] * n, _t_gate, [W_FINAL] * n)
    # first gate sees only OR(s_a, s_b): keep entries (0,0) and (0,1)
    return PeriodicMPS([s[:2] for s in full.sites])


def pair_signature(lam) -> np.ndarray:
    """h_j = 1 iff qubit 2j or 2j+1 carries a non-identity factor."""
    if isinstance(lam, PauliString):
        sig = lam.signature.astype(np.int64)
    else:
        sig = SIG_OF_LABEL[np.asarray(lam, dtype=np.int64)]
    return sig[..., 0::2] | sig[..., 1::2]


def t_closed_form(n: int, d, weight) -> np.ndarray | float:
    d = parse_depth(d)
    weight = np.asarray(weight)
    if d == 0:
        return 3.0 ** (-weight)
    if d == INF:
        return np.where(weight == 0, 1.0, 1.0 / (2.0**n + 1.0))
    raise ValueError("closed forms exist only for d=0 and d=inf")


def t_value(n: int, d, lam) -> float:
    """t_{lam,d}; lam is a PauliString or a label array."""
    d = parse_depth(d)
    labels = lam.labels if isinstance(lam, PauliString) else np.asarray(lam)
    if labels.shape[-1] != n:
        raise ValueError(f"Pauli on {labels.shape[-1]} qubits, expected {n}")
    return float(t_values(n, d, labels[None])[0])


def t_values(n: int, d, labels) -> np.ndarray:
    """Vectorised t over a (M, n) array of Pauli labels."""
    d = parse_depth(d)
    labels = np.atleast_2d(np.asarray(labels, dtype=np.int64))
    if d == 0 or d == INF:
        return np.asarray(t_closed_form(n, d, (labels > 0).sum(axis=-1)), dtype=float)
    return build_t_mps(n, d).evaluate_many(pair_signature(labels))


def lift_to_pauli_mps(sig_mps: PeriodicMPS) -> PeriodicMPS:
    """Qubit-level MPS (phys 4, n sites) of a pair-signature MPS.

    ``evaluate(out, lam) = evaluate(sig_mps, pair_signature(lam))``.
    """
    or_map = np.array([[0, 1], [1, 1]])  # OR(s_a, s_b)
    sites = []
    for s in sig_mps.sites:
        expanded = s[or_map.ravel()].reshape(4, s.shape[1], s.shape[2])
        sites.append(expanded)
    pair = PeriodicMPS(sites)
    maps = [SIG_OF_LABEL] * len(sites)
    return split_pair_sites(pair, maps, maps)


def apply_channel(alpha: PeriodicMPS, t_mps: PeriodicMPS | None = None, invert: bool = False,
                  inverse: PeriodicMPS | None = None) -> PeriodicMPS:
    """Pointwise multiply Pauli coefficients by t (or by v ~ 1/t when ``invert``).

    ``t_mps`` / ``inverse`` are pair-signature MPS and are lifted here.
    """
    if invert:
        if inverse is None:
            raise ValueError("inverting the channel needs an inverse MPS")
        factor = inverse
    else:
        if t_mps is None:
            raise ValueError("need a t MPS")
        factor = t_mps
    if 2 * factor.n_sites != alpha.n_sites:
        raise ValueError(f"factor covers {2 * factor.n_sites} qubits, alpha {alpha.n_sites}")
    return hadamard(alpha, lift_to_pauli_mps(factor))


# ---------------------------------------------------------------------------
# tau: pair probabilities


def pair_index(p, q):
    """Per-qubit pair digit u = p + 4 q for labels p (first Pauli), q (second)."""
    return np.asarray(p) + 4 * np.asarray(q)


def _pair_classes() -> np.ndarray:
    u = np.arange(16)
    p, q = u % 4, u // 4
    cls = np.full(16, 4)
    cls[(p == 0) & (q == 0)] = 0
    cls[(p == 0) & (q > 0)] = 1
    cls[(p > 0) & (q == 0)] = 2
    cls[(p > 0) & (p == q)] = 3
    return cls


PAIR_CLASS = _pair_classes()
TAU_FINAL_CLASS = np.array([1.0, 1 / 3, 1 / 3, 1 / 3, 0.0])


def tau_final_full() -> np.ndarray:
    u = np.arange(16)
    p, q = u % 4, u // 4
    return (((p & 1) == 0) & ((q & 1) == 0)).astype(float)


@functools.lru_cache(maxsize=None)
def gamma_kernel() -> np.ndarray:
    """Two-qubit pair kernel G[u_oa, u_ob, u_ia, u_ib] over 16-valued digits."""
    g = pair_label_kernel(2).reshape((4,) * 8)  # [hb, ha, h'b, h'a, gb, ga, g'b, g'a]
    return g.transpose(3, 1, 2, 0, 7, 5, 6, 4).reshape(16, 16, 16, 16)


@functools.lru_cache(maxsize=None)
def lambda_kernel() -> np.ndarray:
    """Single-qubit pair kernel [u_out, u_in]."""
    return pair_label_kernel(1).reshape(4, 4, 4, 4).transpose(1, 0, 3, 2).reshape(16, 16)


@functools.lru_cache(maxsize=None)
def gamma_class_kernel() -> np.ndarray:
    """Gamma lumped onto per-qubit pair classes, shape (5, 5, 5, 5)."""
    g = gamma_kernel()
    onehot = np.eye(5)[PAIR_CLASS]  # (16, 5)
    summed = np.einsum("abcd,ax,by->xycd", g, onehot, onehot)
    out = np.zeros((5, 5, 5, 5))
    for ca in range(5):
        for cb in range(5):
            block = summed[:, :, PAIR_CLASS == ca][:, :, :, PAIR_CLASS == cb]
            ref = block[:, :, 0, 0]
            if not np.allclose(block, ref[:, :, None, None], atol=1e-12):
                raise AssertionError("pair kernel is not lumpable on classes")
            out[:, :, ca, cb] = ref
    return out


@functools.lru_cache(maxsize=16)
def build_tau_class_mps(n: int, d: int) -> PeriodicMPS:
    """tau over pair classes: N = n/2 sites, physical (5*5), bond 5^{d-1}."""
    _check_n(n)
    d = parse_depth(d)
    if d == INF or d < 1:
        raise ValueError("tau MPS needs finite d >= 1")
    g = gamma_class_kernel()
    return brickwork_pair_mps(n, d, [np.eye(5)] * n, lambda t, j: g, [TAU_FINAL_CLASS] * n)


def build_tau_mps(n: int, d: int, compressed: bool = True, max_depth: int = TAU_MAX_DEPTH) -> PeriodicMPS:
    """tau_{(lam, lam'), d} as an n-site MPS with physical digit u = lam_q + 4 lam'_q.

    ``compressed=False`` builds the direct network over all 16 pair digits
    with the full Gamma kernel (bond 16^{d-1}); it is limited to
    ``d <= max_depth``.
    """
    d = parse_depth(d)
    if compressed:
        pair = build_tau_class_mps(n, d)
        maps = [PAIR_CLASS] * (n // 2)
        return split_pair_sites(pair, maps, maps)
    if d == INF or d < 1:
        raise ValueError("tau MPS needs finite d >= 1")
    if d > max_depth:
        raise ValueError(f"uncompressed tau MPS limited to d <= {max_depth} (bond 16^(d-1))")
    g = gamma_kernel()
    pair = brickwork_pair_mps(n, d, [np.eye(16)] * n, lambda t, j: g, [tau_final_full()] * n)
    maps = [np.arange(16)] * (n // 2)
    return split_pair_sites(pair, maps, maps)


def _tau_closed(n: int, d, lam: np.ndarray, lamp: np.ndarray) -> np.ndarray:
    p, q = lam, lamp
    if d == 0:
        per = np.where((p == 0) & (q == 0), 1.0, np.where((p == 0) | (q == 0) | (p == q), 1 / 3, 0.0))
        return per.prod(axis=-1)
    # d = inf: depends on identity / equality / commutation only
    px, pz = labels_to_xz(p)
    qx, qz = labels_to_xz(q)
    anti = ((px & qz).astype(int).sum(-1) + (pz & qx).astype(int).sum(-1)) % 2
    p_id = (p == 0).all(-1)
    q_id = (q == 0).all(-1)
    equal = (p == q).all(-1)
    t_inf = 1.0 / (2.0**n + 1)
    dim = 2.0**n
    pair = (dim - 1) * (dim - 2) / ((4.0**n - 1) * (4.0**n / 2 - 2))
    out = np.where(anti == 1, 0.0, pair)
    out = np.where(equal | p_id | q_id, t_inf, out)
    return np.where(p_id & q_id, 1.0, out)


def tau_values(n: int, d, lam, lamp) -> np.ndarray:
    """Vectorised tau over label arrays of shape (M, n)."""
    d = parse_depth(d)
    lam = np.atleast_2d(np.asarray(lam, dtype=np.int64))
    lamp = np.atleast_2d(np.asarray(lamp, dtype=np.int64))
    if d == 0 or d == INF:
        return _tau_closed(n, d, lam, lamp)
    pair = build_tau_class_mps(n, d)
    cls = PAIR_CLASS[pair_index(lam, lamp)]
    return pair.evaluate_many(cls[:, 0::2] * 5 + cls[:, 1::2])


def tau_value(n: int, d, lam: PauliString, lamp: PauliString) -> float:
    return float(tau_values(n, d, lam.labels[None], lamp.labels[None])[0])


# ---------------------------------------------------------------------------
# dense verification oracle


def _apply_two(f: np.ndarray, k4: np.ndarray, a: int, b: int) -> np.ndarray:
    out = np.tensordot(k4, f, axes=([0, 1], [a, b]))
    return np.moveaxis(out, (0, 1), (a, b))


def _apply_one(f: np.ndarray, k2: np.ndarray, q: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(k2, f, axes=([0], [q])), 0, q)


class DenseMarkovOracle:
    """Full-distribution Markov chain over Pauli labels (n <= 6).

    Kernels come straight from the enumerated one- and two-qubit Clifford
    groups and include the single-qubit layer, so no signature or class
    lumping is involved.  Tables are indexed with qubit 0 as the first axis.
    """

    def __init__(self, n: int, d: int):
        _check_n(n)
        self.n = n
        self.d = parse_depth(d)
        if self.d == INF:
            raise ValueError("dense oracle needs finite depth")
        k1 = label_kernel(1)
        k2 = label_kernel(2).reshape(4, 4, 4, 4).transpose(1, 0, 3, 2)  # [oa, ob, ia, ib]
        self.single = k1
        self.two = k2
        self.pair_single = lambda_kernel()
        self.pair_two = gamma_kernel()

    def _backward(self, f, k1, k2):
        for t in range(self.d, 0, -1):
            for a, b in layer_pairs(self.n, t):
                f = _apply_two(f, k2, a, b)
        for q in range(self.n):
            f = _apply_one(f, k1, q)
        return f

    @functools.cached_property
    def t_table(self) -> np.ndarray:
        f = np.ones((4,) * self.n)
        ind = np.array([1.0, 0.0, 1.0, 0.0])
        for q in range(self.n):
            shape = [1] * self.n
            shape[q] = 4
            f = f * ind.reshape(shape)
        return self._backward(f, self.single, self.two)

    def t(self, lam) -> float:
        labels = lam.labels if isinstance(lam, PauliString) else np.asarray(lam)
        return float(self.t_table[tuple(labels)])

    @functools.cached_property
    def tau_table(self) -> np.ndarray:
        if self.n > 6:
            raise ValueError("pair oracle limited to n <= 6")
        fin = tau_final_full()
        f = np.ones((16,) * self.n)
        for q in range(self.n):
            shape = [1] * self.n
            shape[q] = 16
            f = f * fin.reshape(shape)
        return self._backward(f, self.pair_single, self.pair_two)

    def tau(self, lam, lamp) -> float:
        p = lam.labels if isinstance(lam, PauliString) else np.asarray(lam)
        q = lamp.labels if isinstance(lamp, PauliString) else np.asarray(lamp)
        return float(self.tau_table[tuple(pair_index(p, q))])


def t_exact_dense(n: int, d, lam) -> float:
    """Convenience wrapper around the dense oracle."""
    return DenseMarkovOracle(n, d).t(lam)


__all__ = [
    "B_PRIME",
    "W_FINAL",
    "DenseMarkovOracle",
    "apply_channel",
    "brickwork_pair_mps",
    "build_t_mps",
    "build_tau_mps",
    "build_tau_class_mps",
    "pair_index",
    "gamma_class_kernel",
    "gamma_kernel",
    "lift_to_pauli_mps",
    "pair_signature",
    "split_pair_sites",
    "t_closed_form",
    "t_value",
    "t_values",
    "tau_value",
    "tau_values",
]
