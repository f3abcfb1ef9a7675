"""Estimator-style front end (fit/transform/predict, get_params).

Thin wrappers over the functional core so the pipeline composes with the
scikit-learn ecosystem: ``TimeCompressor`` and ``GreedyReducer`` are
transformers over instances, ``HeuristicPacker`` is a predictor producing
packings, and ``sklearn.pipeline.Pipeline`` chains them.
"""

from __future__ import annotations

from fractions import Fraction

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .model import Instance
from .packing import Packing, heuristic_solve
from .reduction import lift_solution, reduce_instance
from .timeline import compress_time


def check_instance(X) -> Instance:
    """Validation helper: estimators operate on validated instances."""
    if not isinstance(X, Instance):
        raise TypeError(f"expected a dvbp Instance, got {type(X).__name__}")
    return X


class TimeCompressor(TransformerMixin, BaseEstimator):
    """Transformer that remaps time coordinates onto a minimal horizon.

    After ``fit(X)``, ``time_map_`` translates compressed findings back to
    the original coordinates and ``horizon_`` is the compressed horizon.
    ``transform`` is stateless (returns the stored result for the fitted
    instance, compresses fresh otherwise).
    """

    def fit(self, X, y=None):
        X = check_instance(X)
        self.compressed_, self.time_map_ = compress_time(X)
        self.horizon_ = self.time_map_.horizon
        self._fitted_on = X
        return self

    def transform(self, X):
        X = check_instance(X)
        if not hasattr(self, "compressed_"):
            raise NotFittedError("TimeCompressor is not fitted; call fit first")
        if X is self._fitted_on:
            return self.compressed_
        return compress_time(X)[0]


class GreedyReducer(TransformerMixin, BaseEstimator):
    """Transformer applying the deletion rule with budget floor(eps * L).

    Parameters mirror the functional API: ``epsilon`` (exact decimal string,
    int, or Fraction; floats go through their shortest decimal repr),
    ``mode`` in {alpha, f1, f2}, and ``recompress``.  After ``fit``,
    ``reduced_``, ``certificate_`` and ``metrics_`` hold the result, and
    :meth:`lift` turns a packing of the reduced instance into one of the
    fitted instance.
    """

    def __init__(self, epsilon="0.05", mode="f2", recompress=True):
        self.epsilon = epsilon
        self.mode = mode
        self.recompress = recompress

    def fit(self, X, y=None):
        X = check_instance(X)
        eps = self.epsilon if isinstance(self.epsilon, Fraction) else Fraction(str(self.epsilon))
        self.reduced_, self.certificate_ = reduce_instance(
            X, eps, mode=self.mode, recompress=self.recompress
        )
        self.metrics_ = self.certificate_.metrics
        self._fitted_on = X
        return self

    def transform(self, X):
        X = check_instance(X)
        if not hasattr(self, "reduced_"):
            raise NotFittedError("GreedyReducer is not fitted; call fit first")
        if X is self._fitted_on:
            return self.reduced_
        return reduce_instance(
            X, Fraction(str(self.epsilon)), mode=self.mode, recompress=self.recompress
        )[0]

    def lift(self, packing: Packing, X: Instance | None = None) -> Packing:
        """Lift a complete feasible packing of the reduced instance back to
        the fitted (or given) original instance."""
        if not hasattr(self, "certificate_"):
            raise NotFittedError("GreedyReducer is not fitted; call fit first")
        original = self._fitted_on if X is None else check_instance(X)
        return lift_solution(self.certificate_, packing, original)


class HeuristicPacker(BaseEstimator):
    """Predictor producing a complete packing by repeated greedy bins."""

    def __init__(self, mode="f2"):
        self.mode = mode

    def fit(self, X, y=None):
        check_instance(X)
        self.fitted_ = True
        return self

    def predict(self, X) -> Packing:
        X = check_instance(X)
        return heuristic_solve(X, mode=self.mode)

    def fit_predict(self, X, y=None) -> Packing:
        return self.fit(X).predict(X)
