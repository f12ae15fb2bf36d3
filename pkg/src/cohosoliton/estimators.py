"""Estimator-style wrappers around the solver and the residual check.

Both classes follow the scikit-learn conventions: constructor arguments are
stored verbatim, learned state gets a trailing underscore, inputs go through
``check_array``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .profiles import AnsatzParams, ProfileGrid, value
from .soliton import RESIDUAL_COLUMNS, construct, residual_table


def _params(est) -> AnsatzParams:
    return AnsatzParams(n=est.n, k=est.k, lam=est.lam, q=est.q)


class KahlerSolitonSolver(BaseEstimator):
    """Build a soliton from initial data; ``predict`` samples ``(H, F, f)`` at ``t``.

    ``fit`` ignores its inputs: the construction is fully determined by the
    hyperparameters, the signature exists for pipeline compatibility.
    """

    def __init__(
        self,
        n=2,
        k=4.0,
        lam=1.0,
        q=1,
        beta0=0.0,
        B=1.0,
        C=0.0,
        s0=0.0,
        alpha0=0.0,
        s_end=1.0,
        count=1001,
        closure_mode="none",
        tolerance=None,
    ):
        self.n = n
        self.k = k
        self.lam = lam
        self.q = q
        self.beta0 = beta0
        self.B = B
        self.C = C
        self.s0 = s0
        self.alpha0 = alpha0
        self.s_end = s_end
        self.count = count
        self.closure_mode = closure_mode
        self.tolerance = tolerance

    def fit(self, X=None, y=None):
        self.construction_ = construct(
            _params(self),
            closure_mode=self.closure_mode,
            beta0=self.beta0,
            B=self.B,
            C=self.C,
            s0=self.s0,
            alpha0=self.alpha0,
            s_end=self.s_end,
            count=self.count,
            tolerance=self.tolerance,
        )
        self.grid_ = self.construction_.grid
        self.closure_ = self.construction_.closure
        self.max_residual_ = self.construction_.max_residual
        return self

    def predict(self, X):
        """Profile values at the arclength samples in the first column of ``X``."""
        check_is_fitted(self, "grid_")
        t = check_array(X, ensure_2d=False).reshape(-1)
        lo, hi = self.grid_.span
        if np.any((t < lo) | (t > hi)):
            raise ValueError(f"t outside the constructed range [{lo}, {hi}]")
        return np.array([[value(self.grid_, name, x) for name in ("H", "F", "f")] for x in t])

    def score(self, X=None, y=None):
        """Negative largest soliton residual: higher is better, 0 is exact."""
        check_is_fitted(self, "construction_")
        return -self.max_residual_


class SolitonResidualTransformer(BaseEstimator, TransformerMixin):
    """Map rows ``[t, H, F, f]`` to the five residual columns.

    Derivatives come from finite differences on the rows, which must be
    sorted by ``t``. End rows and singular rows get ``nan``.
    """

    def __init__(self, n=2, k=4.0, lam=1.0, q=1):
        self.n = n
        self.k = k
        self.lam = lam
        self.q = q

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=5)
        if X.shape[1] != 4:
            raise ValueError(f"expected 4 columns [t, H, F, f], got {X.shape[1]}")
        self.params_ = _params(self)
        self.n_features_in_ = 4
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, ensure_min_samples=5)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected 4 columns [t, H, F, f], got {X.shape[1]}")
        grid = ProfileGrid(X[:, 0], X[:, 1], X[:, 2], X[:, 3])
        table = residual_table(self.params_, grid)
        out = np.full((X.shape[0], len(RESIDUAL_COLUMNS)), np.nan)
        out[grid.interior_mask()] = table[:, 1:]
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(RESIDUAL_COLUMNS, dtype=object)
