"""Estimator-style wrappers around the solver, the invariants and the segmentation.

The "samples" here are whole :class:`~necklab.grid.MapField` objects rather
than rows of a feature matrix, so only the parameter handling of
scikit-learn's ``BaseEstimator`` is reused (``get_params``, ``set_params``,
``clone``, ``repr``).
"""
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

import numpy as np

from . import invariants as inv
from .decompose import DEFAULT_EPSILON, neck_identity, segment
from .solver import SolveConfig, solve
from .validation import check_choice, check_count, check_field, check_positive


class HarmonicMapSolver(BaseEstimator):
    """Relax a map to a discrete harmonic map with its end circles fixed.

    Parameters
    ----------
    method : {"newton", "sobolev", "explicit"}, default="newton"
    tol_tension : float, default=1e-8
        Stop when the sup norm of the tangential tension falls below this.
    max_iters : int, default=200
    dt : float or None, default=None
        Step size; ``None`` picks the scheme's default.

    Attributes
    ----------
    field_ : MapField
        The relaxed map.
    report_ : SolveReport
    """

    def __init__(self, method="newton", tol_tension=1e-8, max_iters=200, dt=None):
        self.method = method
        self.tol_tension = tol_tension
        self.max_iters = max_iters
        self.dt = dt

    def _config(self):
        check_choice(self.method, "method", {"newton", "sobolev", "explicit"})
        check_positive(self.tol_tension, "tol_tension")
        check_count(self.max_iters, "max_iters", min_val=0)
        return SolveConfig(dt=self.dt, tol_tension=self.tol_tension,
                           max_iters=self.max_iters, method=self.method)

    def fit(self, X, y=None):
        """Solve with ``X`` as the initial field and its end rows as boundary data."""
        X = check_field(X)
        self.field_, self.report_ = solve(X, cfg=self._config())
        self.converged_ = self.report_.converged
        return self

    def transform(self, X):
        """Relaxed copy of ``X`` (each call solves again)."""
        X = check_field(X)
        return solve(X, cfg=self._config())[0]

    def fit_transform(self, X, y=None):
        return self.fit(X).field_


class HopfInvariants(BaseEstimator):
    """Hopf slice integrals and the neck quantities of a map.

    Parameters
    ----------
    order : {2, 4}, default=4
        Finite-difference order used for every derivative.

    Attributes
    ----------
    alpha_ : complex
        Median slice integral.
    drift_ : float
    energy_, avg_length_ : float
    """

    def __init__(self, order=4):
        self.order = order

    def fit(self, X, y=None):
        X = check_field(X)
        check_choice(self.order, "order", {2, 4})
        a = inv.alpha(X, order=self.order)
        self.alpha_, self.drift_ = a.alpha, a.drift
        self.energy_ = inv.energy(X, order=self.order)
        self.avg_length_ = inv.average_length(X, order=self.order)
        return self

    def transform(self, X):
        """Per-slice values ``alpha(t_i)`` on the interior rows of ``X``."""
        check_is_fitted(self, "alpha_")
        return inv.alpha(check_field(X), order=self.order).per_slice

    def score(self, X, y=None):
        """Negative drift of the slice integrals, so that better conservation scores higher."""
        return -inv.alpha(check_field(X), order=self.order).drift


class NeckSegmenter(BaseEstimator):
    """Label every grid row as neck (0) or bubble (1).

    Parameters
    ----------
    epsilon : float, default=0.25
        Unit-window energy at which a window counts as concentrated.
    merge_gap, margin : float, default=1.0

    Attributes
    ----------
    decomposition_ : Decomposition
    identity_ : NeckIdentityReport
    """

    def __init__(self, epsilon=DEFAULT_EPSILON, merge_gap=1.0, margin=1.0):
        self.epsilon = epsilon
        self.merge_gap = merge_gap
        self.margin = margin

    def _segment(self, X):
        check_positive(self.epsilon, "epsilon")
        check_positive(self.merge_gap, "merge_gap", include_zero=True)
        check_positive(self.margin, "margin", include_zero=True)
        return segment(X, self.epsilon, self.merge_gap, self.margin)

    def fit(self, X, y=None):
        X = check_field(X)
        self.decomposition_ = self._segment(X)
        self.identity_ = neck_identity(X, self.decomposition_)
        return self

    def predict(self, X):
        X = check_field(X)
        d = self._segment(X)
        t = X.grid.t
        labels = np.zeros(t.size, dtype=int)
        for a, b in d.bubbles:
            i_a, i_b = X.grid.row_range(a, b)
            labels[i_a:i_b + 1] = 1
        return labels

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)
