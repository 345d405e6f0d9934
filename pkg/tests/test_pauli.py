import numpy as np
import pytest

from shallow_shadows.circuits import BrickworkSpec, sample_circuit, stream_rng
from shallow_shadows.clifford import clifford_group, random_clifford
from shallow_shadows.pauli import PauliString, basis_expectation, in_pm_Z, multiply


def test_label_roundtrip():
    p = PauliString.from_label("IXZY")
    assert list(p.labels) == [0, 1, 2, 3]
    assert p.weight == 3
    assert str(p.unsigned()).endswith("IXZY")


def test_matrix_product_matches_multiply():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = PauliString.from_labels(rng.integers(0, 4, 3))
        b = PauliString.from_labels(rng.integers(0, 4, 3))
        phase, c = multiply(a, b)
        assert np.allclose(a.to_matrix() @ b.to_matrix(), phase * c.to_matrix())
        assert a.commutes(b) == np.allclose(a.to_matrix() @ b.to_matrix(), b.to_matrix() @ a.to_matrix())


def test_in_pm_Z_and_basis_expectation():
    assert in_pm_Z(PauliString.from_label("ZIZ"))
    assert not in_pm_Z(PauliString.from_label("ZXZ"))
    z = PauliString.from_label("ZZI")
    assert basis_expectation(z, [1, 0, 0]) == -1
    assert basis_expectation(z, [1, 1, 0]) == 1
    assert basis_expectation(PauliString.from_label("XII"), [0, 0, 0]) == 0


def test_group_orders():
    assert len(clifford_group(1)) == 24
    assert len(clifford_group(2)) == 11520


def test_brickwork_conjugation_matches_unitary():
    spec = BrickworkSpec(4, 2, seed=3)
    circ = sample_circuit(spec, stream_rng(3, 0))
    u = circ.unitary()
    p = PauliString.from_label("XZIY")
    q = circ.conjugate(p)
    assert np.allclose(u @ p.to_matrix() @ u.conj().T, q.to_matrix())


def test_global_clifford_symplectic():
    t = random_clifford(5, np.random.default_rng(0))
    assert t.is_symplectic()
    assert t.then(t.inverse()).conjugate(PauliString.from_label("XYZIZ")).to_matrix().shape == (32, 32)


def test_single_qubit_layer_uniform_on_nonidentity():
    # a uniformly random single-qubit Clifford maps X to each of the 3 axes equally
    spec = BrickworkSpec(2, 0, seed=5)
    circ = sample_circuit(spec, stream_rng(5, 0), size=30000)
    lab, _ = circ.conjugate_labels(np.array([[1, 0]]))
    counts = np.bincount(lab[..., 0].ravel(), minlength=4)
    assert counts[0] == 0
    assert np.allclose(counts[1:] / 30000, 1 / 3, atol=0.015)
