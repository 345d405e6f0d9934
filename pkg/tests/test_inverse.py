import numpy as np
import pytest

from shallow_shadows.channel import build_t_mps
from shallow_shadows.inverse import (
    InversionConfig,
    InversionResult,
    cost,
    cost_exhaustive,
    exact_inverse,
    invert,
    regularizer,
)
from shallow_shadows.mps import PeriodicMPS


def test_exact_inverse_is_exact():
    m = build_t_mps(8, 2)
    res = exact_inverse(m)
    c0, linf = cost_exhaustive(m, res.V)
    assert res.heralded
    assert c0 < 1e-20 and linf < 1e-10


def test_invert_small_heralds():
    m = build_t_mps(8, 2)
    res = invert(m, InversionConfig(chi=3, chi_schedule=(2, 3), seed=0))
    c0, linf = cost_exhaustive(m, res.V)
    assert res.heralded
    assert np.isclose(c0, res.final_cost, rtol=1e-6, atol=1e-14)
    assert linf <= np.sqrt(c0) + 1e-15
    # recorded costs never increase
    h = np.array(res.cost_history)
    assert np.all(np.diff(h) <= 1e-12 * np.maximum(1.0, h[:-1]))


def test_bond_one_not_heralded():
    m = build_t_mps(8, 3)
    res = invert(m, InversionConfig(chi=1, max_sweeps=30, seed=0))
    assert not res.heralded


def test_contracted_cost_matches_exhaustive():
    m = build_t_mps(8, 2)
    v = PeriodicMPS.random(4, 2, 2, np.random.default_rng(0))
    assert np.isclose(cost(m, v), cost_exhaustive(m, v)[0])


def test_translational_regularizer_zero_iff_equal():
    a = PeriodicMPS.random(4, 2, 2, np.random.default_rng(1))
    same = PeriodicMPS([a.sites[0].copy() for _ in range(4)])
    assert regularizer(same, "translational") == pytest.approx(0.0, abs=1e-14)
    assert regularizer(a, "translational") > 0


def test_result_roundtrip(tmp_path):
    res = exact_inverse(build_t_mps(6, 1))
    path = tmp_path / "r.json"
    res.save(path)
    back = InversionResult.load(path)
    assert np.allclose(back.V.to_dense(), res.V.to_dense())
    assert back.heralded


def test_config_validation():
    with pytest.raises(ValueError):
        InversionConfig(chi=0)
    with pytest.raises(ValueError):
        InversionConfig(reg_mode="bogus")
