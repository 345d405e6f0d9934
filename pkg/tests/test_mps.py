import numpy as np

from shallow_shadows.mps import PeriodicMPS, add, dot, hadamard


def _rand(n, phys, bond, seed):
    return PeriodicMPS.random(n, phys, bond, np.random.default_rng(seed))


def test_from_dense_roundtrip():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=(2, 3, 2, 4))
    m = PeriodicMPS.from_dense(vals, [2, 3, 2, 4])
    assert np.allclose(m.to_dense(), vals.ravel(), atol=1e-12)


def test_dot_hadamard_sum_consistency():
    a, b = _rand(5, 3, 2, 1), _rand(5, 3, 3, 2)
    da, db = a.to_dense(), b.to_dense()
    assert np.isclose(dot(a, b), np.sum(da * db))
    assert np.allclose(hadamard(a, b).to_dense(), da * db)
    assert np.isclose(a.sum_all(), da.sum())
    assert np.isclose(a.frobenius_sq(), np.sum(da**2))
    assert np.allclose(add(a, b).to_dense(), da + db)


def test_evaluate_many_matches_dense():
    a = _rand(4, 2, 3, 7)
    idx = np.array([[0, 1, 1, 0], [1, 1, 1, 1], [0, 0, 0, 0]])
    d = a.to_dense().reshape(a.phys_dims)
    assert np.allclose(a.evaluate_many(idx), [d[tuple(i)] for i in idx])
    assert np.isclose(a.evaluate(idx[0]), d[tuple(idx[0])])


def test_constant_and_product():
    c = PeriodicMPS.constant(3, 2, 2.0)
    assert np.allclose(c.to_dense(), 2.0)
    p = PeriodicMPS.product([np.array([1.0, 2.0])] * 3)
    assert np.isclose(p.sum_all(), 27.0)


def test_save_load(tmp_path):
    a = _rand(4, 2, 2, 3)
    path = tmp_path / "m.json"
    a.save(path)
    b = PeriodicMPS.load(path)
    assert np.allclose(a.to_dense(), b.to_dense())
    assert np.allclose(PeriodicMPS.from_dict(a.to_dict()).to_dense(), a.to_dense())
