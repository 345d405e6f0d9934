import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from shallow_shadows.channel import build_t_mps, t_values
from shallow_shadows.circuits import BrickworkSpec
from shallow_shadows.estimators import ShadowEstimator, VariationalInverse
from shallow_shadows.shadows import SparseObservable, acquire, ghz_projector
from shallow_shadows.stabilizer import StabilizerState


def test_params_roundtrip():
    est = VariationalInverse(chi=2, seed=4)
    assert est.get_params()["chi"] == 2
    assert clone(est).get_params() == est.get_params()
    assert ShadowEstimator(K=5).set_params(K=2).K == 2


def test_variational_inverse_fit_predict():
    m = build_t_mps(8, 2)
    est = VariationalInverse(chi=3, chi_schedule=(2, 3)).fit(m)
    assert est.heralded_
    sig = np.array([[0, 0, 0, 0], [1, 1, 1, 1], [1, 0, 1, 0]])
    pred = est.predict(sig)
    assert np.allclose(pred * m.evaluate_many(sig), 1.0, atol=1e-4)
    assert est.score(m) <= 0
    with pytest.raises(ValueError):
        est.predict(np.zeros((1, 3), dtype=int))


def test_not_fitted():
    with pytest.raises(NotFittedError):
        VariationalInverse().predict(np.zeros((1, 4), dtype=int))
    with pytest.raises(NotFittedError):
        ShadowEstimator().predict([])


def test_shadow_estimator():
    snaps = acquire(StabilizerState.ghz(4), BrickworkSpec(4, 1, seed=2), 2000)
    est = ShadowEstimator(K=4).fit(snaps)
    assert est.n_qubits_ == 4 and est.depth_ == 1
    obs = [SparseObservable([(1.0, "ZZII")]), ghz_projector(4)]
    pred = est.predict(obs)
    reps = est.reports(obs)
    assert pred.shape == (2,)
    for p, r in zip(pred, reps):
        assert p == pytest.approx(r.estimate)
        assert abs(p - 1.0) <= 4 * max(np.std(r.block_means, ddof=1), r.stderr)
    with pytest.raises(ValueError):
        ShadowEstimator(K=3).fit(snaps[:10])


def test_shadow_estimator_with_fitted_inverse():
    snaps = acquire(StabilizerState.ghz(8), BrickworkSpec(8, 2, seed=2), 500)
    inv = VariationalInverse(chi=3).fit(build_t_mps(8, 2)).result_
    exact = ShadowEstimator().fit(snaps).predict([ghz_projector(8)])
    approx = ShadowEstimator(inverse=inv).fit(snaps)
    assert approx.predict([ghz_projector(8)]) == pytest.approx(exact, abs=1e-3)
    assert approx.reports([ghz_projector(8)])[0].bias_bound > 0
