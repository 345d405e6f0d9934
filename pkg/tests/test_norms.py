import math

import numpy as np
import pytest

from shallow_shadows.channel import t_value
from shallow_shadows.norms import (
    BoundPreconditionError,
    NormReport,
    frobenius_bound_sq,
    frobenius_dense_check,
    ls_norm_sq,
    mc_state_dep_norm_sq,
    otilde_dense,
    pauli_norm_sq,
    sparse_report,
    stabilizer_projector,
    stabilizer_projector_norm_sq,
    statmech_depth_threshold,
    statmech_t_lower_bound,
    second_moment_terms,
)
from shallow_shadows.pauli import PauliString
from shallow_shadows.shadows import SparseObservable, ghz_projector
from shallow_shadows.stabilizer import StabilizerState


def test_pauli_norm_examples():
    assert pauli_norm_sq(PauliString.from_label("ZZ"), 0) == pytest.approx(9.0)
    assert pauli_norm_sq(PauliString.from_label("Z" * 20), "inf") == pytest.approx(2.0**20 + 1)
    assert pauli_norm_sq(PauliString.from_label("ZI"), 1) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        pauli_norm_sq(PauliString.identity(4), 1)


def test_ls_norm_ignores_identity():
    a = SparseObservable([(1.0, "ZZII"), (3.0, "IIII")])
    assert ls_norm_sq(a, 1) == pytest.approx(pauli_norm_sq(PauliString.from_label("ZZII"), 1))


def test_sparse_report_ordering():
    obs = SparseObservable([(1.0, "ZZII"), (0.5, "XIXI")])
    rep = sparse_report(obs, 2)
    assert rep.method == "sparse-triangle"
    assert rep.ls_norm_sq <= rep.worst_case_upper_sq
    with pytest.raises(ValueError):
        NormReport(2.0, 1.0, "sparse-triangle")


def test_frobenius_contraction_matches_dense():
    obs = ghz_projector(4)
    rep = frobenius_bound_sq(obs, 1)
    assert rep.components["route"] == "contraction"
    assert rep.components["otilde_frobenius"] == pytest.approx(frobenius_dense_check(obs, 1), rel=1e-9)
    sparse = stabilizer_projector(StabilizerState.ghz(4))
    rep2 = frobenius_bound_sq(sparse, 1)
    assert rep2.components["otilde_frobenius"] == pytest.approx(rep.components["otilde_frobenius"], rel=1e-9)
    assert rep.ls_norm_sq == pytest.approx(rep2.ls_norm_sq, rel=1e-9)


def test_frobenius_guard_and_enumeration_at_depth_two():
    obs = ghz_projector(4)
    with pytest.raises(ValueError, match="cap"):
        frobenius_bound_sq(obs, 2)
    rep = frobenius_bound_sq(stabilizer_projector(StabilizerState.ghz(4)), 2)
    assert rep.components["otilde_frobenius"] == pytest.approx(frobenius_dense_check(obs, 2), rel=1e-9)


def test_otilde_dense_frobenius():
    obs = SparseObservable([(1.0, "ZZII"), (0.5, "XXII"), (-0.4, "IYYI")])
    m = otilde_dense(obs, 1)
    assert np.allclose(m, m.conj().T)
    assert np.linalg.norm(m) == pytest.approx(frobenius_bound_sq(obs, 1).components["otilde_frobenius"])


@pytest.mark.parametrize("d", [0, 1, 2, "inf"])
def test_single_generator_projector(d):
    state = StabilizerState.from_strings(["ZIII"])
    t = t_value(4, d, PauliString.from_label("ZIII"))
    assert stabilizer_projector_norm_sq(state, d) == pytest.approx((3.0 + 1.0 / t) / 4.0)


def test_ghz_projector_norm_mc():
    state = StabilizerState.ghz(4)
    exact = stabilizer_projector_norm_sq(state, 1)
    mean, se = mc_state_dep_norm_sq(ghz_projector(4), state, 1, shots=4000, seed=3)
    assert abs(mean - exact) <= 3.5 * se


def test_second_moment_mc():
    state = StabilizerState.ghz(4)
    obs = SparseObservable([(1.0, "ZZII"), (0.5, "XXXX"), (0.3, "IZZI")])
    ls, tr = second_moment_terms(obs, state, 1)
    mean, se = mc_state_dep_norm_sq(obs, state, 1, shots=6000, seed=1)
    assert abs(mean - (ls + tr)) <= 3.5 * se


def test_statmech_threshold_and_refusal():
    assert statmech_depth_threshold(10, 1.001, 0.71) == pytest.approx(5.932, abs=1e-3)
    with pytest.raises(BoundPreconditionError):
        statmech_t_lower_bound(10, 5, 2, 1.001, 0.71)
    with pytest.raises(BoundPreconditionError):
        statmech_t_lower_bound(10, 6, 2, 1.0, 0.71)
    with pytest.raises(BoundPreconditionError):
        statmech_t_lower_bound(10, 6, 2, 1.001, 0.8)  # size condition fails
    b6 = statmech_t_lower_bound(10, 6, 2, 1.001, 0.71)
    b7 = statmech_t_lower_bound(10, 7, 2, 1.001, 0.71)
    assert 0 < b6 and b6 == pytest.approx(b7)  # min(ext + 2d, n) saturates at n
    assert b6 == pytest.approx(1 / (2**10 + 1) * (1 / (1 + 0.64 / (18 / (25 * 0.71) * 10**0.001 - 1))))
    assert math.isfinite(b6)
