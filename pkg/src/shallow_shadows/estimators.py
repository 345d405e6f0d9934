"""scikit-learn style wrappers.

``VariationalInverse`` is fit on an eigenvalue MPS and predicts v ~ 1/t on
pair signatures.  ``ShadowEstimator`` is fit on snapshots and predicts
expectation values of observables.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .inverse import InversionConfig, InversionResult, invert
from .mps import PeriodicMPS
from .shadows import InverseSource, SnapshotSet, estimate_values, report


class VariationalInverse(BaseEstimator):
    def __init__(self, chi=3, chi_schedule=(2, 3), eps_stop=1e-10, max_sweeps=500, reg_mode="none",
                 alpha=None, seed=0):
        self.chi = chi
        self.chi_schedule = chi_schedule
        self.eps_stop = eps_stop
        self.max_sweeps = max_sweeps
        self.reg_mode = reg_mode
        self.alpha = alpha
        self.seed = seed

    def _config(self) -> InversionConfig:
        sched = tuple(c for c in self.chi_schedule if c <= self.chi)
        return InversionConfig(
            chi=self.chi, chi_schedule=sched, eps_stop=self.eps_stop, max_sweeps=self.max_sweeps,
            reg_mode=self.reg_mode, alpha=self.alpha, seed=self.seed,
        )

    def fit(self, X: PeriodicMPS, y=None):
        if not isinstance(X, PeriodicMPS):
            raise TypeError("fit expects the eigenvalue MPS to invert")
        res = invert(X, self._config(), np.random.default_rng(self.seed))
        self.result_ = res
        self.V_ = res.V
        self.herald_epsilon_ = res.herald_epsilon
        self.heralded_ = res.heralded
        self.n_sites_ = X.n_sites
        return self

    def predict(self, X):
        """v on pair-signature strings, shape (M, n_sites) of 0/1."""
        check_is_fitted(self, "V_")
        X = check_array(X, dtype=np.int64)
        if X.shape[1] != self.n_sites_:
            raise ValueError(f"expected {self.n_sites_} signature digits, got {X.shape[1]}")
        return self.V_.evaluate_many(X)

    def score(self, X, y=None):
        """Negative cost: higher is better, 0 for an exact inverse."""
        check_is_fitted(self, "V_")
        return -self.result_.final_cost


class ShadowEstimator(BaseEstimator):
    """Median-of-means shadow estimates from a fixed set of snapshots.

    ``inverse`` is None for the exact 1/t, an ``InversionResult`` or a
    pair-signature MPS; ``direction`` is passed to ``estimate_values``.
    """

    def __init__(self, K=1, inverse=None, direction="auto"):
        self.K = K
        self.inverse = inverse
        self.direction = direction

    def fit(self, X, y=None):
        snaps = X if isinstance(X, SnapshotSet) else SnapshotSet(X)
        if self.K < 1 or len(snaps) % self.K:
            raise ValueError(f"K={self.K} must divide the {len(snaps)} snapshots")
        if isinstance(self.inverse, (InversionResult, PeriodicMPS)) or self.inverse is None:
            self.source_ = InverseSource(snaps.n, snaps.d, self.inverse)
        else:
            raise TypeError("inverse must be None, an InversionResult or a PeriodicMPS")
        self.snapshots_ = snaps
        self.n_qubits_ = snaps.n
        self.depth_ = snaps.d
        return self

    def single_shot_values(self, observables) -> np.ndarray:
        check_is_fitted(self, "snapshots_")
        return estimate_values(list(observables), self.snapshots_, self.source_, self.direction)

    def predict(self, X):
        vals = self.single_shot_values(X)
        return np.array([np.median(v.reshape(self.K, -1).mean(axis=1)) for v in vals])

    def reports(self, X):
        observables = list(X)
        vals = self.single_shot_values(observables)
        eps = self.source_.herald_epsilon
        return [report(v, self.K, eps, norm_inf=o.norm_inf() if eps else None) for v, o in zip(vals, observables)]
