import numpy as np
import pytest

from shallow_shadows.channel import (
    DenseMarkovOracle,
    build_t_mps,
    t_value,
    t_values,
    tau_value,
    tau_values,
)
from shallow_shadows.circuits import BrickworkSpec, monte_carlo_t
from shallow_shadows.pauli import PauliString


def test_depth_zero_closed_form():
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 4, size=(50, 6))
    w = np.count_nonzero(labels, axis=1)
    assert np.allclose(t_values(6, 0, labels), 3.0**-w, rtol=0, atol=1e-14)


def test_global_closed_form():
    lam = PauliString.from_label("ZIIIIIII")
    assert np.isclose(t_value(8, "inf", lam), 1 / 257)


def test_known_values():
    assert np.isclose(t_value(2, 1, PauliString.from_label("ZI")), 0.2)
    assert np.isclose(t_value(4, 1, PauliString.from_label("ZIII")), 1 / 3 * 0 + t_value(4, 1, PauliString.from_label("IZII")))
    assert t_value(4, 3, PauliString.identity(4)) == pytest.approx(1.0)


@pytest.mark.parametrize("d", [1, 2])
def test_t_mps_matches_dense_oracle(d):
    n = 4
    oracle = DenseMarkovOracle(n, d).t_table
    labels = np.array(np.unravel_index(np.arange(4**n), (4,) * n)).T
    assert np.allclose(t_values(n, d, labels), oracle[tuple(labels.T)], atol=1e-12)


def test_t_mps_shape():
    m = build_t_mps(8, 2)
    assert m.n_sites == 4
    assert m.phys_dims == [2, 2, 2, 2]


def test_tau_properties():
    n, d = 4, 2
    lam = PauliString.from_label("ZXII")
    # tau(lam, lam) = t(lam)
    assert np.isclose(tau_value(n, d, lam, lam), t_value(n, d, lam))
    # anticommuting pair never lands jointly in +-Z
    a, b = PauliString.from_label("XIII"), PauliString.from_label("ZIII")
    assert tau_value(n, d, a, b) == 0.0
    rng = np.random.default_rng(3)
    l1 = rng.integers(0, 4, size=(20, n))
    l2 = rng.integers(0, 4, size=(20, n))
    assert np.allclose(tau_values(n, d, l1, l2), tau_values(n, d, l2, l1))
    oracle = DenseMarkovOracle(n, d)
    for x, y in zip(l1, l2):
        assert np.isclose(tau_values(n, d, x[None], y[None])[0], oracle.tau(x, y), atol=1e-12)


def test_monte_carlo_agrees():
    lam = PauliString.from_label("ZXIY")
    exact = t_value(4, 2, lam)
    mc, se = monte_carlo_t(lam, BrickworkSpec(4, 2, seed=11), 40000)
    assert abs(mc - exact) <= 4 * se
