"""Input coercion for the estimator-style API."""

from __future__ import annotations

from typing import Any, Iterable

import numpy as np

from .graphcodec import CodedStructure, Graph


def check_positive_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_graph(obj: Any) -> Graph:
    """Accept a Graph, an ``(n, edges)`` pair, or a symmetric 0/1 adjacency matrix."""
    if isinstance(obj, Graph):
        return obj
    if isinstance(obj, tuple) and len(obj) == 2 and isinstance(obj[0], (int, np.integer)):
        return Graph.from_edges(int(obj[0]), obj[1])
    arr = np.asarray(obj)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("a graph must be a Graph, an (n, edges) pair or a square adjacency matrix")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("adjacency matrix entries must be 0 or 1")
    if (arr != arr.T).any():
        raise ValueError("adjacency matrix must be symmetric")
    if np.diag(arr).any():
        raise ValueError("adjacency matrix must have a zero diagonal")
    n = arr.shape[0]
    return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n) if arr[i, j]))


def check_graphs(X: Iterable[Any], n: int | None = None) -> list[Graph]:
    if isinstance(X, (Graph, np.ndarray)) or (isinstance(X, tuple) and len(X) == 2 and isinstance(X[0], int)):
        raise ValueError("expected a sequence of graphs")
    graphs = [check_graph(g) for g in X]
    if not graphs:
        raise ValueError("expected at least one graph")
    sizes = {g.n for g in graphs}
    if n is not None and sizes != {n}:
        raise ValueError(f"all graphs must have {n} vertices, got sizes {sorted(sizes)}")
    if len(sizes) != 1:
        raise ValueError(f"all graphs must have the same vertex count, got {sorted(sizes)}")
    return graphs


def check_coded(X: Iterable[Any]) -> list[CodedStructure]:
    out = list(X)
    for c in out:
        if not isinstance(c, CodedStructure):
            raise ValueError(f"expected CodedStructure values, got {type(c).__name__}")
    return out
