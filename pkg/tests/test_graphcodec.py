import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tagbc.engine import EngineParams, build_engine, sigma_lift
from tagbc.f2core import F2Subspace
from tagbc.graphcodec import (
    CodecError,
    CodedStructure,
    Graph,
    StructureIso,
    all_graphs,
    apply_sigma,
    brute_force_iso,
    canonical_form,
    decode,
    decode_full,
    encode,
    find_graph_iso,
    graph_catalog,
    induced_graph_iso,
    reduction_experiment,
    transport,
    zg_count,
)

K3 = Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])
P3 = Graph.from_edges(3, [(0, 1), (1, 2)])
P11 = EngineParams(3, 1, 1)


def test_graph_normalizes_edges():
    G = Graph.from_edges(3, [(1, 0), (2, 1)])
    assert G.sorted_edges() == [(0, 1), (1, 2)]
    with pytest.raises(CodecError):
        Graph.from_edges(2, [(0, 0)])
    with pytest.raises(CodecError):
        Graph.from_edges(2, [(0, 2)])


def test_encode_examples():
    c = encode(Graph(3), P11)
    assert c.Z == frozenset() and c.U_plus == F2Subspace.zero(6)
    c = encode(K3, P11)
    assert len(c.Z) == 3 and c.U_plus.dim == 3
    c = encode(P3, EngineParams(3, 2, 1))
    assert len(c.Z) == 8
    with pytest.raises(CodecError):
        encode(K3, EngineParams(4, 1, 1))


def test_zg_count_examples():
    assert zg_count(Graph(3), P11) == 0
    assert zg_count(K3, P11) == 3
    assert zg_count(Graph.from_edges(2, [(0, 1)]), EngineParams(2, 2, 3)) == 12


@pytest.mark.parametrize("m0,m1", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_zg_count_matches_encode(m0, m1):
    for n in range(1, 5):
        for G in graph_catalog(n):
            p = EngineParams(n, m0, m1)
            c = encode(G, p)
            assert len(c.Z) == zg_count(G, p)
            assert {z for z in c.engine.X1 if z in c.U_plus} == c.Z
            assert c.U_plus.dim == len(c.Z)


def test_decode_examples():
    assert decode(encode(K3, P11)) == K3
    e = build_engine(P11)
    assert decode(CodedStructure(e, frozenset(), F2Subspace.zero(6))) == Graph(3)
    assert decode(e.data(), encode(P3, e).U_plus) == P3
    with pytest.raises(CodecError):
        decode(e.data())


def test_decode_rejects_partial_fibers():
    e = build_engine(n=2, m1=2)
    bad = CodedStructure(e, frozenset([4]), F2Subspace(e.dim, (4,)))
    with pytest.raises(CodecError):
        decode(bad)


def test_decode_rejects_nonuniform_payload():
    e = build_engine(n=2, m0=2)
    z = e.k_star(1, 4)[0]
    with pytest.raises(CodecError):
        decode(CodedStructure(e, frozenset([z]), F2Subspace(e.dim, (z,))))


def test_decode_full_fields():
    d = decode_full(encode(K3, P11))
    assert d.classes == ((1,), (2,), (4,))
    assert len(d.fiber_of) == 3 and len(d.Z) == 3


def test_transport_examples():
    c = encode(K3, P11)
    sigma, rep = transport((0, 1, 2), c, c)
    assert rep.ok and sigma.map.images == tuple(1 << i for i in range(6))
    rot = (1, 2, 0)
    sigma, rep = transport(rot, c, encode(K3.relabel(rot), P11))
    assert rep.ok and sigma.h1 == (2, 0, 1)
    _, rep = transport((0, 1, 2), encode(P3, P11), c)
    assert not rep.ok
    with pytest.raises(CodecError):
        transport((0, 1, 2), c, encode(K3, EngineParams(3, 2, 1)))


def test_brute_force_examples():
    cK, cP = encode(K3, P11), encode(P3, P11)
    assert brute_force_iso(cK, cK) is not None
    assert brute_force_iso(cP, cK) is None
    with pytest.raises(CodecError):
        brute_force_iso(encode(Graph(9), EngineParams(9, 1, 1)), encode(Graph(9), EngineParams(9, 1, 1)))


def test_induced_iso_examples():
    c = encode(P3, P11)
    ident = StructureIso(sigma_lift(c.engine, (0, 1, 2)).map, {1: 1, 2: 2, 4: 4})
    assert induced_graph_iso(ident, c, c) == (0, 1, 2)
    h0 = (2, 0, 1)
    cH = encode(P3.relabel(h0), P11)
    sigma, rep = transport(h0, c, cH)
    f = StructureIso(sigma.map, {x: sigma(x) for x in c.engine.X0})
    assert rep.ok and induced_graph_iso(f, c, cH) == h0


def test_induced_iso_detects_bad_map():
    c = encode(Graph.from_edges(2, [(0, 1)]), EngineParams(2, 2, 1))
    bad = StructureIso(sigma_lift(c.engine, (0, 1)).map, {1: 1, 2: 4, 4: 2, 8: 8})
    with pytest.raises(CodecError):
        induced_graph_iso(bad, c, c)


def _burnside_count(n):
    """Number of graphs on n vertices up to isomorphism, by Burnside's lemma."""
    pairs = list(itertools.combinations(range(n), 2))
    total = 0
    perms = list(itertools.permutations(range(n)))
    for p in perms:
        seen, cycles = set(), 0
        for e in pairs:
            if e in seen:
                continue
            cycles += 1
            while e not in seen:
                seen.add(e)
                e = tuple(sorted((p[e[0]], p[e[1]])))
        total += 2 ** cycles
    return total // len(perms)


def test_catalog_sizes_match_burnside():
    sizes = [len(graph_catalog(n)) for n in range(6)]
    assert sizes == [_burnside_count(n) for n in range(6)] == [1, 1, 2, 4, 11, 34]


def test_catalog_is_complete_and_irredundant():
    cat = graph_catalog(4)
    for G in all_graphs(4):
        assert sum(find_graph_iso(G, H) is not None for H in cat) == 1
    assert canonical_form(P3) == canonical_form(P3.relabel((2, 1, 0)))


@pytest.mark.parametrize("m0,m1", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_reduction_small(m0, m1):
    rep = reduction_experiment(3, m0, m1)
    assert rep.ok and len(rep.cases) == 16


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_equivariance_random(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    p = EngineParams(n, rng.randint(1, 2), rng.randint(1, 2))
    G = Graph.from_edges(n, [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.5])
    h = list(range(n))
    rng.shuffle(h)
    cG, cH = encode(G, p), encode(G.relabel(h), p)
    sigma, rep = transport(h, cG, cH)
    assert rep.ok
    moved = apply_sigma(cG, sigma)
    assert moved.Z == cH.Z and moved.U_plus == cH.U_plus
    assert decode(moved) == G.relabel(h)
