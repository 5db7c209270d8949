"""Estimator-style wrapper around the graph coding."""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import _validation as val
from .engine import EngineParams, build_engine
from .graphcodec import brute_force_iso, decode, encode


class GraphCodec(TransformerMixin, BaseEstimator):
    """Codes graphs on a fixed vertex count as subgroups of one engine.

    ``fit`` reads the vertex count from the training graphs and builds the
    engine; ``transform`` encodes, ``inverse_transform`` decodes, and
    ``predict`` tells, for pairs of graphs, whether their codes are isomorphic.
    """

    def __init__(self, m0: int = 1, m1: int = 1):
        self.m0 = m0
        self.m1 = m1

    def fit(self, X, y=None):
        m0 = val.check_positive_int(self.m0, "m0")
        m1 = val.check_positive_int(self.m1, "m1")
        graphs = val.check_graphs(X)
        self.n_vertices_ = graphs[0].n
        if self.n_vertices_ < 1:
            raise ValueError("graphs need at least one vertex")
        self.engine_ = build_engine(EngineParams(self.n_vertices_, m0, m1))
        self.n_features_in_ = self.engine_.dim
        return self

    def transform(self, X):
        check_is_fitted(self, "engine_")
        return [encode(G, self.engine_) for G in val.check_graphs(X, self.n_vertices_)]

    def inverse_transform(self, X):
        check_is_fitted(self, "engine_")
        return [decode(c) for c in val.check_coded(X)]

    def predict(self, pairs):
        """``True`` for each ``(G, H)`` whose codes admit a structure isomorphism."""
        check_is_fitted(self, "engine_")
        out = []
        for G, H in pairs:
            cg, ch = self.transform([G, H])
            out.append(brute_force_iso(cg, ch) is not None)
        return out
