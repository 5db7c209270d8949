import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from tagbc.estimators import GraphCodec
from tagbc.graphcodec import Graph

P3 = Graph.from_edges(3, [(0, 1), (1, 2)])
K3 = Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])


def test_fit_transform_inverse():
    est = GraphCodec(m1=2).fit([P3, K3])
    assert est.n_vertices_ == 3 and est.n_features_in_ == 9
    codes = est.transform([P3, K3])
    assert [len(c.Z) for c in codes] == [4, 6]
    assert est.inverse_transform(codes) == [P3, K3]


def test_predict_pairs():
    est = GraphCodec().fit([P3])
    star = P3.relabel((1, 0, 2))
    assert est.predict([(P3, star), (P3, K3), (K3, K3)]) == [True, False, True]


def test_accepts_edge_pairs_and_adjacency():
    adj = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    est = GraphCodec().fit([adj])
    assert est.inverse_transform(est.transform([(3, [(0, 1), (1, 2)])])) == [P3]
    with pytest.raises(ValueError):
        est.transform([np.array([[0, 1], [0, 0]])])
    with pytest.raises(ValueError):
        est.transform([Graph(4)])


def test_unfitted_and_bad_params():
    with pytest.raises(NotFittedError):
        GraphCodec().transform([P3])
    with pytest.raises(ValueError):
        GraphCodec(m0=0).fit([P3])
    with pytest.raises(ValueError):
        GraphCodec().fit([Graph(0)])
    with pytest.raises(ValueError):
        GraphCodec().fit(P3)


def test_params_api():
    est = GraphCodec(m0=2)
    assert est.get_params() == {"m0": 2, "m1": 1}
    assert est.set_params(m1=3).m1 == 3
