"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import time

import numpy as np
import pytest

from shallow_shadows.channel import DenseMarkovOracle, build_t_mps, t_values, tau_values
from shallow_shadows.circuits import BrickworkSpec, monte_carlo_t, stream_rng
from shallow_shadows.clifford import random_clifford
from shallow_shadows.experiments import ghz_fidelity, hamiltonian
from shallow_shadows.inverse import InversionConfig, cost_exhaustive, invert
from shallow_shadows.norms import (
    mc_state_dep_norm_sq,
    pauli_norm_sweep,
    stabilizer_projector,
    stabilizer_projector_norm_sq,
    statmech_t_lower_bound,
    second_moment_terms,
)
from shallow_shadows.pauli import PauliString, commutator_bit, support_extent
from shallow_shadows.shadows import SparseObservable, SnapshotSet, acquire, sparse_values
from shallow_shadows.stabilizer import StabilizerState

pytestmark = pytest.mark.slow


def _all_labels(n):
    return np.array(np.unravel_index(np.arange(4**n), (4,) * n)).T


def _random_stabilizer_state(n, rng):
    u = random_clifford(n, rng)
    return StabilizerState(tuple(u.conjugate(PauliString.single(n, q, "Z")) for q in range(n)))


def test_depth_zero_eigenvalues(verdict):
    start = time.perf_counter()
    n = 8
    labels = np.zeros((n, n), dtype=np.int64)
    for w in range(1, n + 1):
        labels[w - 1, :w] = np.arange(w) % 3 + 1  # mix X, Z, Y
    err = float(np.max(np.abs(t_values(n, 0, labels) - 3.0 ** -np.arange(1, n + 1))))
    elapsed = time.perf_counter() - start
    verdict(1, err <= 1e-12 and elapsed < 1.0, f"max |t - 3^-w| = {err:.1e}, {elapsed:.2f} s")


def test_mps_matches_dense_oracle(verdict):
    start = time.perf_counter()
    n = 6
    labels = _all_labels(n)
    rng = np.random.default_rng(2)
    t_err = tau_err = 0.0
    for d in (1, 2, 3):
        oracle = DenseMarkovOracle(n, d)
        t_err = max(t_err, float(np.max(np.abs(t_values(n, d, labels) - oracle.t_table[tuple(labels.T)]))))
        pairs = []
        while len(pairs) < 500:
            a, b = rng.integers(0, 4, n), rng.integers(0, 4, n)
            if not commutator_bit(PauliString.from_labels(a), PauliString.from_labels(b)):
                pairs.append((a, b))
        la, lb = map(np.array, zip(*pairs))
        ref = np.array([oracle.tau(a, b) for a, b in pairs])
        tau_err = max(tau_err, float(np.max(np.abs(tau_values(n, d, la, lb) - ref))))
    elapsed = time.perf_counter() - start
    ok = t_err <= 1e-10 and tau_err <= 1e-10 and elapsed < 300
    verdict(2, ok, f"t err {t_err:.1e}, tau err {tau_err:.1e}, {elapsed:.1f} s")


def test_monte_carlo_consistency(verdict):
    start = time.perf_counter()
    n = 10
    rng = np.random.default_rng(3)
    worst = 20
    for d in (1, 2, 3, 4):
        labels = rng.integers(0, 4, size=(20, n))
        labels[~labels.any(axis=1), 0] = 2
        exact = t_values(n, d, labels)
        good = 0
        for j, lab in enumerate(labels):
            mc, se = monte_carlo_t(PauliString.from_labels(lab), BrickworkSpec(n, d, seed=100 + d),
                                   100_000, stream_rng(100 + d, j))
            good += abs(mc - exact[j]) <= 3 * se
        worst = min(worst, good)
    elapsed = time.perf_counter() - start
    verdict(3, worst >= 19 and elapsed < 300, f"min agreeing per depth {worst}/20, {elapsed:.1f} s")


def test_inversion_herald(verdict):
    start = time.perf_counter()
    m = build_t_mps(10, 3)
    res = invert(m, InversionConfig(chi=3, chi_schedule=(2, 3), max_sweeps=500, seed=0))
    c0, linf = cost_exhaustive(m, res.V)
    elapsed = time.perf_counter() - start
    ok = c0 < 1e-6 and res.sweeps_used <= 500 and linf <= np.sqrt(c0) and elapsed < 120
    verdict(4, ok, f"C0 {c0:.2e} after {res.sweeps_used} sweeps, linf {linf:.1e} <= {np.sqrt(c0):.1e}, {elapsed:.1f} s")


def test_inverse_perturbation_robustness(verdict):
    n, d = 8, 2
    rng = np.random.default_rng(5)
    state = StabilizerState.ghz(n)
    snaps = SnapshotSet(acquire(state, BrickworkSpec(n, d, seed=5), 4000))
    worst = -np.inf
    for _ in range(10):
        r = int(rng.integers(2, 6))
        labels = rng.integers(0, 4, size=(r, n))
        labels[: r // 2] = np.where(rng.random((r // 2, n)) < 0.5, 0, 2)  # some terms with nonzero mean
        obs = SparseObservable([(c, PauliString.from_labels(l)) for c, l in zip(rng.normal(size=r), labels)])
        v = 1.0 / t_values(n, d, obs.labels)
        delta = rng.uniform(-1e-3, 1e-3, size=v.size)
        base = sparse_values(obs, snaps, v)
        pert = sparse_values(obs, snaps, v * (1 + delta))
        shift = abs(pert.mean() - base.mean())
        stat = 3 * (pert - base).std(ddof=1) / np.sqrt(len(snaps))
        worst = max(worst, shift - (1e-3 * obs.norm_inf() + stat))
    verdict(5, worst <= 0, f"max(shift - allowance) = {worst:.2e}")


def test_ghz_fidelity(verdict):
    start = time.perf_counter()
    _, summary = ghz_fidelity(n=8, depths=(0, 1, 2, 3), reps=100, N=1000, seed=2024)
    elapsed = time.perf_counter() - start
    within = {s["d"]: s["within_2sme"] for s in summary}
    var = {s["d"]: s["snapshot_variance"] for s in summary}
    under = all(s["snapshot_variance"] <= s["norm_bound_sq"] for s in summary)
    drop = var[0] / var[2]
    ok = min(within.values()) >= 90 and under and drop >= 5 and elapsed < 900
    detail = (f"within 2 SME {within}, variance <= bound {under}, "
              f"d0/d2 variance ratio {drop:.2f} (needs >= 5), {elapsed:.0f} s")
    verdict(6, ok, detail)


def test_pauli_norm_curve(verdict):
    start = time.perf_counter()
    n = 20
    rows = pauli_norm_sweep(n, range(1, n + 1), range(1, 7))
    vals = np.array([r["norm_sq"] for r in rows])
    full = np.array([r["norm_sq"] for r in rows if r["k"] == n])
    limit = 2.0**n + 1
    elapsed = time.perf_counter() - start
    ok = (np.all(np.isfinite(vals)) and np.all(np.diff(full) <= 0) and np.all(full >= limit)
          and full[-1] <= 1.1 * limit and elapsed < 120)
    verdict(7, ok, f"k=n: d1 {full[0]:.4g} ... d6 {full[-1]:.4g} = {full[-1] / limit:.3f} x (2^20+1), {elapsed:.1f} s")


def test_hamiltonian_estimation(verdict):
    start = time.perf_counter()
    rows = hamiltonian(n=8, depths=(0, 1, 2, 3, "inf"), N=20000, seed=7)
    elapsed = time.perf_counter() - start
    by_d = {r["d"]: r for r in rows}
    unbiased = all(abs(r["estimate"] - r["truth"]) <= 3 * r["stderr"] for r in rows)
    ratios = {d: by_d[float("inf")]["variance"] / by_d[d]["variance"] for d in (0, 1, 2)}
    ok = unbiased and min(ratios.values()) >= 10 and elapsed < 600
    rtxt = ", ".join(f"d{d} {x:.1f}" for d, x in ratios.items())
    verdict(8, ok, f"unbiased within 3 sigma {unbiased}, var(inf)/var(d): {rtxt} (needs >= 10), {elapsed:.0f} s")


def test_second_moment_identity(verdict):
    n = 4
    rng = np.random.default_rng(9)
    good = 0
    for case in range(20):
        rho = _random_stabilizer_state(n, rng)
        d = int(rng.integers(1, 4))
        r = int(rng.integers(1, 4))
        labels = rng.integers(0, 4, size=(r, n))
        labels[0] = rho.elements()[1 + rng.integers(0, 15)].labels  # one term with nonzero mean
        obs = SparseObservable([(c, PauliString.from_labels(l)) for c, l in zip(rng.normal(size=r), labels)])
        ls, tr = second_moment_terms(obs, rho, d)
        mean, se = mc_state_dep_norm_sq(obs, rho, d, shots=20000, seed=1000 + case)
        good += abs(mean - (ls + tr)) <= 3 * se
    verdict(9, good == 20, f"{good}/20 cases within 3 sigma")


def test_stabilizer_projector_formula(verdict):
    plus = StabilizerState.from_strings(["XXXX", "ZZII", "IZZI", "IIZZ"])
    minus = StabilizerState.from_strings(["-XXXX", "ZZII", "IZZI", "IIZZ"])
    parts, ok = [], True
    for d in (1, 2):
        value = stabilizer_projector_norm_sq(plus, d)
        for k, (name, state) in enumerate((("+", plus), ("-", minus))):
            seed = 11 + 10 * d + k  # independent snapshots per state
            mean, se = mc_state_dep_norm_sq(stabilizer_projector(state), state, d, shots=20000, seed=seed)
            ok &= abs(mean - value) <= 3 * se
            parts.append(f"d{d} GHZ{name}: {value:.3f} vs {mean:.3f}+-{se:.3f}")
    verdict(10, ok, "; ".join(parts))


def test_statmech_lower_bound(verdict):
    n, d, alpha, c = 10, 6, 1.001, 0.71
    rng = np.random.default_rng(11)
    labels = rng.integers(0, 4, size=(100, n))
    labels[~labels.any(axis=1), 0] = 1
    t = t_values(n, d, labels)
    bounds = np.array([statmech_t_lower_bound(n, d, support_extent(PauliString.from_labels(l)), alpha, c)
                       for l in labels])
    violations = int(np.sum(t < bounds))
    verdict(11, violations == 0, f"{violations} violations, min t/bound {np.min(t / bounds):.3f}")
