"""Graphs to coded engines and back.

A graph on ``n`` vertices is coded over an engine with ``n`` E0-classes: the
payload ``Z`` collects the X1-fibers of every pair of X0 elements lying in
adjacent classes, and ``U_plus`` is its span.  Decoding reads only the
isomorphism-visible data (``V0, V1, X0, X1, W0, W1, U_plus``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .engine import (
    Engine,
    EngineError,
    EngineParams,
    RecoveryData,
    Sigma,
    build_engine,
    recover_E0,
    recover_E1,
    sigma_lift,
)
from .f2core import F2LinearMap, F2Subspace, map_from_basis, rref
from .report import VerificationReport

BRUTE_FORCE_X0_LIMIT = 8


class CodecError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self) -> None:
        if self.n < 0:
            raise CodecError("vertex count must be nonnegative")
        norm = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise CodecError("graphs are irreflexive")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise CodecError(f"edge {e} outside vertices 0..{self.n - 1}")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> Graph:
        return cls(n, frozenset(tuple(e) for e in edges))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def relabel(self, h: Sequence[int]) -> Graph:
        return Graph(self.n, frozenset((h[u], h[v]) for u, v in self.edges))

    def adjacent(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges


@dataclass(frozen=True)
class CodedStructure:
    engine: Engine
    Z: frozenset[int]
    U_plus: F2Subspace

    def data(self) -> RecoveryData:
        return self.engine.data()


# ---------------------------------------------------------------- encode / decode

def encode(G: Graph, params: EngineParams | Engine) -> CodedStructure:
    engine = params if isinstance(params, Engine) else build_engine(params)
    if engine.params.n != G.n:
        raise CodecError(f"graph has {G.n} vertices but the engine has {engine.params.n} classes")
    Z = set()
    for x, y in engine.pair_list:
        cx, cy = engine.class0(x), engine.class0(y)
        if cx != cy and G.adjacent(cx, cy):
            Z.update(engine.k_star(x, y))
    return CodedStructure(engine, frozenset(Z), F2Subspace(engine.dim, rref(Z)))


def zg_count(G: Graph, params: EngineParams) -> int:
    return len(G.edges) * params.m0 ** 2 * params.m1


@dataclass
class Decoded:
    graph: Graph
    classes: tuple[tuple[int, ...], ...]       # recovered E0, vertex order
    fiber_of: dict[frozenset, tuple[int, ...]]  # {x, y} -> recovered E1 block
    Z: frozenset[int]


def decode_full(data: RecoveryData | CodedStructure, U_plus: F2Subspace | None = None) -> Decoded:
    if isinstance(data, CodedStructure):
        U_plus = data.U_plus
        data = data.data()
    if U_plus is None:
        raise CodecError("decoding needs U_plus")
    rec1 = recover_E1(data)
    classes = recover_E0(data, rec1)
    vertex = {x: i for i, c in enumerate(classes) for x in c}
    Z = frozenset(z for z in data.X1 if z in U_plus)
    fiber_of = {}
    for b in rec1.blocks:
        inside = set(b) <= Z
        if not inside and set(b) & Z:
            raise CodecError("U_plus ∩ X1 is not a union of E1-fibers")
        x, y = rec1.pair_of_block[b[0]]
        fiber_of[frozenset((x, y))] = b
    verdict: dict[tuple[int, int], bool] = {}
    for pair, b in fiber_of.items():
        x, y = sorted(pair)
        u, v = sorted((vertex[x], vertex[y]))
        inside = set(b) <= Z
        if u == v:
            if inside:
                raise CodecError("payload meets a fiber inside one class")
            continue
        if verdict.setdefault((u, v), inside) != inside:
            raise CodecError("payload is not uniform across the pairs of two classes")
    G = Graph(len(classes), frozenset(e for e, on in verdict.items() if on))
    return Decoded(G, classes, fiber_of, Z)


def decode(data: RecoveryData | CodedStructure, U_plus: F2Subspace | None = None) -> Graph:
    return decode_full(data, U_plus).graph


def apply_sigma(coded: CodedStructure, sigma: Sigma) -> CodedStructure:
    s = sigma.map
    return CodedStructure(coded.engine, frozenset(s.apply_int(z) for z in coded.Z), s.image_of(coded.U_plus))


# ---------------------------------------------------------------- isomorphisms

def graph_iso_check(G: Graph, H: Graph, h: Sequence[int]) -> bool:
    return G.n == H.n and sorted(h) == list(range(G.n)) and G.relabel(h).edges == H.edges


def transport(h: Sequence[int], coded_G: CodedStructure, coded_H: CodedStructure) -> tuple[Sigma, VerificationReport]:
    """Lift a vertex bijection to the engine and audit the payload transport."""
    if coded_G.engine.params != coded_H.engine.params:
        raise CodecError("coded structures use different parameters")
    sigma = sigma_lift(coded_G.engine, list(h))
    rep = VerificationReport("transport", params={"h": " ".join(map(str, h))})
    img = frozenset(sigma(z) for z in coded_G.Z)
    rep.add("Z", img == coded_H.Z, f"|Z_G|={len(coded_G.Z)} |Z_H|={len(coded_H.Z)}")
    rep.add("U_plus", sigma.map.image_of(coded_G.U_plus) == coded_H.U_plus)
    return sigma, rep


@dataclass
class StructureIso:
    map: F2LinearMap
    x0_map: dict[int, int]


def _iso_view(coded: CodedStructure | tuple[RecoveryData, F2Subspace]):
    if isinstance(coded, CodedStructure):
        data, U = coded.data(), coded.U_plus
    else:
        data, U = coded
    rec1 = recover_E1(data)
    fib = {frozenset(rec1.pair_of_block[b[0]]): b for b in rec1.blocks}
    Q = {z for z in data.X1 if z in data.W1}
    Z = {z for z in data.X1 if z in U}
    return data, U, fib, Q, Z


def brute_force_iso(coded_G, coded_H, limit: int = BRUTE_FORCE_X0_LIMIT) -> StructureIso | None:
    """Search for a linear bijection permuting X0 and X1 that carries
    ``V0, V1, W0, W1, U_plus`` of G onto those of H.

    Any such map sends each W0-fiber to a W0-fiber, and within a fiber the
    order of elements is irrelevant to every checked subspace, so it is
    enough to search over permutations of X0 and match fibers by index order.
    """
    dG, UG, fibG, QG, ZG = _iso_view(coded_G)
    dH, UH, fibH, QH, ZH = _iso_view(coded_H)
    if len(dG.X0) > limit:
        raise CodecError(f"|X0| = {len(dG.X0)} exceeds the search limit {limit}")
    if (dG.dim, len(dG.X0), len(dG.X1), UG.dim, len(ZG), len(QG)) != \
            (dH.dim, len(dH.X0), len(dH.X1), UH.dim, len(ZH), len(QH)):
        return None
    if sorted(map(len, fibG.values())) != sorted(map(len, fibH.values())):
        return None
    xg, xh = sorted(dG.X0), sorted(dH.X0)
    p = len(xg)
    img: list[int] = []
    used: set[int] = set()

    def pair_ok(a: int, b: int, ia: int, ib: int) -> bool:
        fg, fh = fibG[frozenset((a, b))], fibH[frozenset((ia, ib))]
        if len(fg) != len(fh):
            return False
        return (set(fg) <= QG) == (set(fh) <= QH) and (set(fg) <= ZG) == (set(fh) <= ZH)

    def finish() -> StructureIso | None:
        x0_map = dict(zip(xg, img))
        basis, images = list(xg), list(img)
        for pair, fg in fibG.items():
            a, b = sorted(pair)
            fh = fibH[frozenset((x0_map[a], x0_map[b]))]
            basis.extend(fg)
            images.extend(fh)
        m = map_from_basis(basis, images, dG.dim, dH.dim)
        if (m.image_of(dG.V0) == dH.V0 and m.image_of(dG.V1) == dH.V1 and m.image_of(dG.W0) == dH.W0
                and m.image_of(dG.W1) == dH.W1 and m.image_of(UG) == UH):
            return StructureIso(m, x0_map)
        return None

    def rec(i: int) -> StructureIso | None:
        if i == p:
            return finish()
        for y in xh:
            if y in used:
                continue
            if all(pair_ok(xg[j], xg[i], img[j], y) for j in range(i)):
                img.append(y)
                used.add(y)
                got = rec(i + 1)
                if got is not None:
                    return got
                used.discard(y)
                img.pop()
        return None

    return rec(0)


def induced_graph_iso(f: StructureIso, coded_G: CodedStructure, coded_H: CodedStructure) -> tuple[int, ...]:
    """The vertex bijection induced by a structure isomorphism, verified."""
    dg, dh = decode_full(coded_G), decode_full(coded_H)
    vh = {x: i for i, c in enumerate(dh.classes) for x in c}
    h = []
    for c in dg.classes:
        targets = {vh[f.x0_map[x]] for x in c}
        if len(targets) != 1:
            raise CodecError("X0-permutation does not respect the recovered E0")
        h.append(targets.pop())
    if not graph_iso_check(dg.graph, dh.graph, h):
        raise CodecError("induced vertex map is not a graph isomorphism")
    return tuple(h)


# ---------------------------------------------------------------- graph catalogs

def all_graphs(n: int) -> Iterable[Graph]:
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph(n, frozenset(p for i, p in enumerate(pairs) if mask >> i & 1))


def canonical_form(G: Graph) -> tuple[tuple[int, int], ...]:
    best = None
    for perm in itertools.permutations(range(G.n)):
        key = tuple(sorted((min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in G.edges))
        if best is None or key < best:
            best = key
    return best


def graph_catalog(n: int) -> list[Graph]:
    """One graph per isomorphism class on ``n`` vertices, in canonical-form order."""
    forms = {canonical_form(G) for G in all_graphs(n)}
    return [Graph(n, frozenset(f)) for f in sorted(forms, key=lambda f: (len(f), f))]


def find_graph_iso(G: Graph, H: Graph) -> tuple[int, ...] | None:
    """Plain permutation search; used as the reference isomorphism test."""
    if G.n != H.n or len(G.edges) != len(H.edges):
        return None
    for perm in itertools.permutations(range(G.n)):
        if graph_iso_check(G, H, perm):
            return perm
    return None


def all_graph_isos(G: Graph, H: Graph) -> list[tuple[int, ...]]:
    return [p for p in itertools.permutations(range(G.n)) if graph_iso_check(G, H, p)]


def reduction_experiment(max_n: int = 4, m0: int = 1, m1: int = 1) -> VerificationReport:
    """Compare structure isomorphism of codes with graph isomorphism on a catalog."""
    rep = VerificationReport("reduction", params={"max_n": max_n, "m0": m0, "m1": m1})
    graphs = graph_catalog(max_n)
    params = EngineParams(max_n, m0, m1)
    eng = build_engine(params)
    coded = [encode(G, eng) for G in graphs]
    for i, G in enumerate(graphs):
        for j, H in enumerate(graphs):
            iso_g = find_graph_iso(G, H) is not None
            f = brute_force_iso(coded[i], coded[j])
            ok = iso_g == (f is not None)
            if ok and f is not None:
                try:
                    induced_graph_iso(f, coded[i], coded[j])
                except CodecError:
                    ok = False
            rep.add(f"{i},{j}", ok, f"graph_iso={int(iso_g)} structure_iso={int(f is not None)}")
    return rep
