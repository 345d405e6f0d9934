import numpy as np
import pytest

from shallow_shadows.circuits import BrickworkSpec
from shallow_shadows.records import read_records, write_records
from shallow_shadows.shadows import (
    ShallowObservable,
    SnapshotSet,
    SparseObservable,
    acquire,
    coefficients_to_matrix,
    estimate_shallow,
    estimate_sparse,
    estimate_values,
    ghz_projector,
    median_of_means,
    mps_value,
    shallow_values,
    snapshot_to_pauli_mps,
    sparse_values,
)
from shallow_shadows.stabilizer import StabilizerState


def _dense_snapshot(snap):
    u = snap.circuit().unitary()
    ket = np.zeros(2**snap.n)
    ket[int("".join(map(str, snap.bits)), 2)] = 1.0
    return u.conj().T @ np.outer(ket, ket) @ u


def test_zero_depth_zero_outcome_coefficients():
    # unit trace fixes the identity coefficient for any layer-0 draw
    state = StabilizerState.zero(4)
    snaps = acquire(state, BrickworkSpec(4, 0, seed=1), 5)
    for s in snaps:
        coef = snapshot_to_pauli_mps(s).to_dense()
        assert np.isclose(coef[0], 2.0**-4)


@pytest.mark.parametrize("d", [0, 1, 2, 3])
def test_snapshot_mps_matches_dense(d):
    snaps = acquire(StabilizerState.ghz(4), BrickworkSpec(4, d, seed=7), 4)
    for s in snaps:
        coef = snapshot_to_pauli_mps(s).to_dense()
        assert np.allclose(coefficients_to_matrix(coef), _dense_snapshot(s), atol=1e-10)


def test_acquire_reproducible():
    a = acquire(StabilizerState.ghz(4), BrickworkSpec(4, 2, seed=3), 20)
    b = acquire(StabilizerState.ghz(4), BrickworkSpec(4, 2, seed=3), 20)
    assert all(np.array_equal(x.bits, y.bits) for x, y in zip(a, b))


def test_product_state_marginals():
    snaps = acquire(StabilizerState.zero(4), BrickworkSpec(4, 0, seed=2), 200)
    # with only single-qubit Cliffords, each bit is deterministic when the qubit
    # was mapped to +-Z, so the measured bit must match the conjugated sign
    for s in snaps[:20]:
        ev = np.real(np.diag(s.circuit().unitary() @ StabilizerState.zero(4).density_matrix() @ s.circuit().unitary().conj().T))
        assert ev[int("".join(map(str, s.bits)), 2)] > 0


def test_routes_agree():
    n, d = 4, 2
    snaps = SnapshotSet(acquire(StabilizerState.ghz(n), BrickworkSpec(n, d, seed=5), 30))
    obs = SparseObservable([(0.7, "ZZII"), (-0.3, "XXXX"), (0.2, "IYZX"), (0.5, "IIII")])
    sh = obs.to_shallow()
    a = sparse_values(obs, snaps)
    b = shallow_values(sh, snaps)
    c = estimate_values([obs], snaps, direction="snapshot")[0]
    d_ = np.array([mps_value(sh, s) for s in list(snaps)[:5]])
    assert np.allclose(a, b, atol=1e-10)
    assert np.allclose(a, c, atol=1e-10)
    assert np.allclose(a[:5], d_, atol=1e-10)


def test_identity_observable_exact():
    snaps = acquire(StabilizerState.ghz(4), BrickworkSpec(4, 1, seed=0), 10)
    rep = estimate_sparse(SparseObservable([(2.5, "IIII")]), snaps)
    assert rep.estimate == pytest.approx(2.5)
    assert rep.sample_variance == pytest.approx(0.0)


@pytest.mark.parametrize("d", [0, 1, 2, "inf"])
def test_unbiased_pauli_recovery(d):
    state = StabilizerState.ghz(4)
    snaps = acquire(state, BrickworkSpec(4, d, seed=9), 4000)
    for lab, truth in [("ZZII", 1.0), ("XXXX", 1.0), ("XIII", 0.0)]:
        rep = estimate_sparse(SparseObservable([(1.0, lab)]), snaps)
        assert abs(rep.estimate - truth) <= 3.5 * rep.stderr + 1e-12


def test_ghz8_z_string():
    snaps = acquire(StabilizerState.ghz(8), BrickworkSpec(8, 2, seed=4), 4000)
    rep = estimate_sparse(SparseObservable([(1.0, "ZZZZZZZZ")]), snaps, K=4)
    block_sd = np.std(rep.block_means, ddof=1)
    assert abs(rep.estimate - 1.0) <= 3 * max(block_sd, rep.stderr)


def test_ghz_projector_matrix():
    p = ghz_projector(4)
    assert p.beta.max_bond == 4
    assert np.allclose(p.to_matrix(), StabilizerState.ghz(4).density_matrix(), atol=1e-12)
    rep = estimate_shallow(p, acquire(StabilizerState.ghz(4), BrickworkSpec(4, 1, seed=1), 3000))
    assert abs(rep.estimate - 1.0) <= 3.5 * rep.stderr


def test_median_of_means_examples():
    assert median_of_means([1, 2, 3, 4, 5, 6], K=3) == pytest.approx(3.5)
    assert median_of_means([1, 1, 1, 1, 1, 1000], K=3) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        median_of_means([1, 2, 3], K=2)


def test_records_roundtrip(tmp_path):
    snaps = acquire(StabilizerState.ghz(4), BrickworkSpec(4, "inf", seed=2), 6)
    snaps += acquire(StabilizerState.ghz(4), BrickworkSpec(4, 2, seed=2), 6)
    path = tmp_path / "snaps.jsonl"
    write_records(path, snaps)
    back = read_records(path)
    assert len(back) == len(snaps)
    for a, b in zip(snaps, back):
        assert np.array_equal(a.bits, b.bits)
        ta, tb = a.circuit().tableau(), b.circuit().tableau()
        assert np.array_equal(ta.symplectic, tb.symplectic)
        assert np.array_equal(ta.phases, tb.phases)


def test_report_json():
    rep = estimate_sparse(SparseObservable([(1.0, "ZZII")]),
                          acquire(StabilizerState.ghz(4), BrickworkSpec(4, 1, seed=0), 8), K=2)
    assert '"estimate"' in rep.to_json()
    assert len(rep.block_means) == 2
