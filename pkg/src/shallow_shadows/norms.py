"""Shadow norms and sample-complexity bounds.

For O = sum_lam beta_lam P_lam the single-snapshot estimator has second moment

    ||O||^2_{s,sigma} = sum_{lam,lam'} beta beta' tau_{lam,lam'} / (t t') tr(sigma P_lam P_lam')
                      = sum_lam beta^2 / t  +  tr(sigma O~),

with O~ collecting the off-diagonal (lam != lam') terms.  The first part is
the locally scrambled norm; worst-case bounds control tr(sigma O~) either by
the triangle inequality over terms or by ||O~||_F.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import build_tau_mps, t_values, tau_values
from .circuits import INF, BrickworkSpec, parse_depth
from .mps import PeriodicMPS, dot, dot_env_size, hadamard
from .pauli import PauliString
from .shadows import (
    InverseSource,
    ShallowObservable,
    SparseObservable,
    SnapshotSet,
    _as_source,
    acquire,
    all_labels,
    shallow_values,
    sparse_values,
)
from .stabilizer import StabilizerState

METHODS = ("pauli-exact", "sparse-triangle", "frobenius-bound", "stabilizer-exact", "statmech-bound")
FROBENIUS_MAX_ENV = 1 << 26
STABILIZER_MAX_K = 10


@dataclass
class NormReport:
    ls_norm_sq: float
    worst_case_upper_sq: float
    method: str
    n: int | None = None
    d: float | int | None = None
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.ls_norm_sq > self.worst_case_upper_sq * (1 + 1e-9) + 1e-12:
            raise ValueError("locally scrambled norm exceeds the worst-case bound")

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["d"] == INF:
            out["d"] = "inf"
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# ---------------------------------------------------------------------------
# Pauli and sparse observables


def pauli_norm_sq(lam: PauliString, d) -> float:
    """||P_lam||^2 = 1 / t_lam (identity excluded)."""
    if lam.is_identity():
        raise ValueError("the identity has a deterministic estimate; its shadow norm is not defined here")
    return 1.0 / float(t_values(lam.n, d, lam.labels[None])[0])


def _traceless_terms(obs: SparseObservable):
    keep = obs.labels.any(axis=1) & (obs.coeffs != 0)
    return obs.labels[keep], obs.coeffs[keep]


def ls_norm_sq(obs, d, inverse=None) -> float:
    """sum_{lam != I} beta^2 v with v = 1/t (exact) or the supplied inverse."""
    d = parse_depth(d)
    if isinstance(obs, SparseObservable):
        labels, coeffs = _traceless_terms(obs)
        if coeffs.size == 0:
            return 0.0
        src = _as_source(obs.n, d, inverse)
        return float(np.sum(coeffs**2 * src.on_labels(labels)))
    src = _as_source(obs.n, d, inverse)
    beta = obs.traceless().beta
    return float(dot(hadamard(beta, beta), src.lifted))


def sparse_upper_sq(obs: SparseObservable, d) -> float:
    """(sum_k |beta_k| / sqrt(t_k))^2, the triangle inequality over terms."""
    labels, coeffs = _traceless_terms(obs)
    if coeffs.size == 0:
        raise ValueError("observable has no non-identity terms")
    t = t_values(obs.n, d, labels)
    return float(np.sum(np.abs(coeffs) / np.sqrt(t)) ** 2)


def sparse_report(obs: SparseObservable, d) -> NormReport:
    labels, coeffs = _traceless_terms(obs)
    if coeffs.size == 1:
        ls = pauli_norm_sq(PauliString.from_labels(labels[0]), d) * coeffs[0] ** 2
        return NormReport(ls, ls, "pauli-exact", obs.n, parse_depth(d))
    return NormReport(ls_norm_sq(obs, d), sparse_upper_sq(obs, d), "sparse-triangle", obs.n, parse_depth(d))


# ---------------------------------------------------------------------------
# O~ and the Frobenius bound


def _product_phase(p, q):
    """Per-qubit P_p P_q = i^k P_{p^q}; returns k mod 4 (broadcast)."""
    p, q = np.asarray(p), np.asarray(q)
    x1, z1, x2, z2 = p & 1, p >> 1, q & 1, q >> 1
    x, z = x1 ^ x2, z1 ^ z2
    return (x1 * z1 + x2 * z2 + 2 * (z1 & x2) - x * z) % 4


def otilde_terms(obs: SparseObservable, d, include_diagonal: bool = False):
    """Pauli expansion of O~ = sum_{lam != lam'} beta beta' tau/(t t') P_lam P_lam'.

    Uses exact t and tau; identity terms of ``obs`` are kept, so callers
    wanting the traceless convention should pass ``obs.traceless()``.
    Returns (labels, coeffs) with repeated products merged.
    """
    labels, coeffs = obs.labels, obs.coeffs
    r = len(coeffs)
    i, j = np.meshgrid(np.arange(r), np.arange(r), indexing="ij")
    mask = np.ones((r, r), bool) if include_diagonal else i != j
    i, j = i[mask], j[mask]
    if i.size == 0:
        return np.zeros((0, obs.n), dtype=np.int64), np.zeros(0)
    t = t_values(obs.n, d, labels)
    tau = tau_values(obs.n, d, labels[i], labels[j])
    k = _product_phase(labels[i], labels[j]).sum(-1) % 4
    # anticommuting pairs have tau = 0 and odd k
    phase = np.where(k == 0, 1.0, np.where(k == 2, -1.0, 0.0))
    c = coeffs[i] * coeffs[j] * tau / (t[i] * t[j]) * phase
    prod = labels[i] ^ labels[j]
    uniq, inv = np.unique(prod, axis=0, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inv.ravel(), c)
    return uniq, merged


def otilde_dense(obs: SparseObservable, d) -> np.ndarray:
    """Dense O~ matrix (small n)."""
    labels, coeffs = otilde_terms(obs, d)
    if coeffs.size == 0:
        return np.zeros((2**obs.n,) * 2, dtype=complex)
    out = np.zeros((2**obs.n,) * 2, dtype=complex)
    for c, l in zip(coeffs, labels):
        out += c * PauliString.from_labels(l).to_matrix()
    return out


def _delta_contract(f: PeriodicMPS) -> PeriodicMPS:
    """gamma_mu = sum_{lam ^ lam' = mu} phase(lam, lam') F(lam, lam') as an MPS.

    F has pair digits u = p + 4 q.  The per-qubit phases i^k are carried by
    2x2 rotation matrices; since the total phase is real for every surviving
    pair, the trace of the rotation chain equals 2 Re(i^K), so the result
    evaluates to 2 gamma_mu.
    """
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    powers = [np.linalg.matrix_power(rot, k) for k in range(4)]
    sites = []
    for s in f.sites:
        _, cl, cr = s.shape
        out = np.zeros((4, cl * 2, cr * 2))
        for u in range(16):
            p, q = u % 4, u // 4
            k = int(_product_phase(p, q))
            out[p ^ q] += np.kron(s[u], powers[k])
        sites.append(out)
    return PeriodicMPS(sites)


def _pair_mps(a: PeriodicMPS, b: PeriodicMPS) -> PeriodicMPS:
    """G(lam, lam') = a(lam) b(lam') on pair digits u = p + 4 q."""
    sites = []
    for sa, sb in zip(a.sites, b.sites):
        t = np.einsum("pij,qkl->qpikjl", sa, sb)
        sites.append(t.reshape(16, sa.shape[1] * sb.shape[1], sa.shape[2] * sb.shape[2]))
    return PeriodicMPS(sites)


def frobenius_bound_sq(obs, d, inverse=None, max_env: int = FROBENIUS_MAX_ENV) -> NormReport:
    """||O||^2_s <= ||O||^2_LS + ||O~||_F.

    Sparse observables: exact pair enumeration.  Shallow observables: the
    network beta (x) beta (x) tau (x) v (x) v closed with the XOR tensor,
    then ||O~||_F^2 = ||O~'||_F^2 - 2^n L^2 where O~' also keeps the
    diagonal lam = lam' terms, whose sum is L * I.
    """
    d = parse_depth(d)
    if isinstance(obs, SparseObservable):
        obs_t = obs.traceless()
        _, coeffs = otilde_terms(obs_t, d)
        frob = math.sqrt(2**obs.n * float(np.sum(coeffs**2)))
        ls = ls_norm_sq(obs_t, d)
        return NormReport(ls, ls + frob, "frobenius-bound", obs.n, d,
                          {"otilde_frobenius": frob, "route": "enumeration"})
    if d == 0 or d == INF:
        raise ValueError("the contraction route needs a brickwork depth d >= 1")
    n = obs.n
    src = _as_source(n, d, inverse)
    beta = obs.traceless().beta
    v = src.lifted
    tau = build_tau_mps(n, d)
    f = hadamard(hadamard(_pair_mps(beta, beta), _pair_mps(v, v)), tau)
    gamma2 = _delta_contract(f)
    # ring contraction holds chi_0^2 chi_j^2 numbers; densifying holds 4^n chi_0 chi_j
    ring_cost = dot_env_size(gamma2, gamma2)
    dense_cost = 4**n * gamma2.bond_dims[0] * gamma2.max_bond
    if min(ring_cost, dense_cost) > max_env:
        raise ValueError(
            f"Frobenius contraction needs {min(ring_cost, dense_cost)} intermediate entries (cap {max_env}); "
            f"bonds: beta {beta.max_bond}, v {v.max_bond}, tau {tau.max_bond}"
        )
    diag_sites = [s[[p + 4 * p for p in range(4)]] for s in f.sites]
    diag = PeriodicMPS(diag_sites).sum_all()  # sum_lam beta^2 t v^2
    if ring_cost <= dense_cost:
        gamma_sq = gamma2.frobenius_sq() / 4.0
    else:
        gamma_sq = float(np.sum(gamma2.to_dense() ** 2)) / 4.0
    prime_sq = 2.0**n * gamma_sq
    otilde_sq = prime_sq - 2.0**n * diag**2
    frob = math.sqrt(max(otilde_sq, 0.0))
    ls = float(dot(hadamard(beta, beta), v))
    return NormReport(ls, ls + frob, "frobenius-bound", n, d, {
        "otilde_frobenius": frob,
        "otilde_prime_frobenius_sq": prime_sq,
        "diagonal_sum": diag,
        "contraction_bond": gamma2.max_bond,
        "herald_epsilon": src.herald_epsilon,
        "route": "contraction",
    })


def frobenius_dense_check(obs: ShallowObservable, d) -> float:
    """||O~||_F from the dense 4^n x 4^n pair enumeration (tiny n only)."""
    n = obs.n
    if n > 4:
        raise ValueError("dense pair enumeration limited to n <= 4")
    beta = obs.traceless().coefficients()
    labels = all_labels(n)
    nz = np.flatnonzero(beta)
    sparse = SparseObservable([(beta[k], PauliString.from_labels(labels[k])) for k in nz], n=n)
    _, coeffs = otilde_terms(sparse, d)
    return math.sqrt(2**n * float(np.sum(coeffs**2)))


# ---------------------------------------------------------------------------
# stabilizer projectors


def stabilizer_projector_norm_sq(state: StabilizerState, d, max_k: int = STABILIZER_MAX_K) -> float:
    """Worst-case squared shadow norm of the projector onto the stabilized space.

    4^{-k} sum_{lam, lam' in the group} tau / (t t'), identity included; the
    signs of the group elements drop out.
    """
    k = state.k
    if k > max_k:
        raise ValueError(f"k={k} exceeds the enumeration limit {max_k} (4^k pairs)")
    labels = np.array([p.labels for p in state.elements()], dtype=np.int64)
    n = state.n
    t = t_values(n, d, labels)
    i, j = np.meshgrid(np.arange(len(labels)), np.arange(len(labels)), indexing="ij")
    i, j = i.ravel(), j.ravel()
    total = 0.0
    for start in range(0, i.size, 1 << 16):
        sl = slice(start, start + (1 << 16))
        tau = tau_values(n, d, labels[i[sl]], labels[j[sl]])
        total += float(np.sum(tau / (t[i[sl]] * t[j[sl]])))
    return total / 4.0**k


def stabilizer_projector(state: StabilizerState) -> SparseObservable:
    """Pi = 2^-k sum_{s in S} s as a sparse observable."""
    return SparseObservable([(2.0**-state.k, p) for p in state.elements()])


# ---------------------------------------------------------------------------
# Monte Carlo state-dependent norm


def mc_state_dep_norm_sq(obs, rho: StabilizerState, d, shots: int, seed: int = 0, inverse=None,
                         first_stream: int = 0) -> tuple[float, float]:
    """Mean and stderr of the squared single-snapshot estimate under rho."""
    snaps = SnapshotSet(acquire(rho, BrickworkSpec(rho.n, d, seed), shots, first_stream))
    if isinstance(obs, SparseObservable):
        vals = sparse_values(obs, snaps, inverse)
    else:
        vals = shallow_values(obs, snaps, inverse)
    sq = vals**2
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(shots))


def second_moment_terms(obs: SparseObservable, rho: StabilizerState, d) -> tuple[float, float]:
    """(ls_norm_sq, tr(rho O~)) from exact t and tau with a dense O~."""
    ot = otilde_dense(obs, d)
    ls = float(np.sum(obs.coeffs**2 / t_values(obs.n, d, obs.labels)))
    return ls, float(np.trace(rho.density_matrix() @ ot).real)


# ---------------------------------------------------------------------------
# closed-form lower bound on t


class BoundPreconditionError(ValueError):
    pass


def statmech_depth_threshold(n: int, alpha: float, c: float) -> float:
    """Smallest admissible depth (alpha ln n + ln(1/c)) / ln(25/16)."""
    return (alpha * math.log(n) + math.log(1.0 / c)) / math.log(25.0 / 16.0)


def statmech_correction(n: int, alpha: float, c: float) -> float:
    return 1.0 / (1.0 + (16.0 / 25.0) / ((18.0 / (25.0 * c)) * n ** (alpha - 1.0) - 1.0))


def statmech_t_lower_bound(n: int, d: int, ext: int, alpha: float, c: float) -> float:
    """t_{lam,d} >= 1/(2^{min(ext + 2d, n)} + 1) * correction, for qualifying (d, alpha, c).

    ``ext`` is the support extent of lam (largest circular distance between
    supported qubits).  Raises ``BoundPreconditionError`` when the depth or
    size condition fails, instead of returning an unjustified number.
    """
    if alpha <= 1.0:
        raise BoundPreconditionError(f"alpha must exceed 1, got {alpha}")
    if c <= 0.0:
        raise BoundPreconditionError(f"c must be positive, got {c}")
    d = parse_depth(d)
    if d == INF:
        raise BoundPreconditionError("the bound is stated for finite depth")
    need = statmech_depth_threshold(n, alpha, c)
    if d < need:
        raise BoundPreconditionError(f"depth {d} below the threshold {need:.3f} for n={n}, alpha={alpha}, c={c}")
    n_min = (25.0 * c / 18.0) ** (1.0 / (alpha - 1.0))
    if not n > n_min:
        raise BoundPreconditionError(f"n={n} must exceed (25c/18)^(1/(alpha-1)) = {n_min:.4g}")
    return 1.0 / (2.0 ** min(ext + 2 * d, n) + 1.0) * statmech_correction(n, alpha, c)


# ---------------------------------------------------------------------------
# CSV output


def write_csv(path, rows, fieldnames=None) -> None:
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for r in rows:
            w.writerow({k: ("inf" if v == INF else v) for k, v in r.items()})


def pauli_norm_sweep(n: int, ks, depths) -> list[dict]:
    """1/t for Z^{(x)k} on the first k qubits over a depth grid."""
    rows = []
    for d in depths:
        labels = np.zeros((len(ks), n), dtype=np.int64)
        for r, k in enumerate(ks):
            labels[r, :k] = 2
        inv = 1.0 / t_values(n, d, labels)
        rows += [{"n": n, "k": int(k), "d": d, "norm_sq": float(x)} for k, x in zip(ks, inv)]
    return rows
