import copy

import pytest

from tagbc.f2core import F2LinearMap, F2Subspace
from tagbc.fraisse import (
    Chain,
    ChainError,
    build_chain,
    catalog,
    check_richness,
    classes_count,
    embed_fixing,
    literal_assignment,
)
from tagbc.tagged import (
    L_XE,
    Embedding,
    XEStructure,
    embeds_up_to_renaming,
    is_embedding,
    k_catalog,
    validate_k,
)


@pytest.fixture(scope="module")
def chain2():
    return build_chain(2, 2, seed=0)


def test_catalog_is_cached_k_catalog():
    assert len(catalog(3)) == 21
    assert len(catalog(2)) == 4
    assert catalog(2) is catalog(2)


def test_bound_one_points_in_distinct_blocks():
    ch = build_chain(1, 4, seed=3)
    S = ch.final
    assert classes_count(S) >= 4
    assert check_richness(ch).ok
    assert len(ch.dims) == len(ch.stages)


def test_bound_two_chain(chain2):
    rep = check_richness(chain2, 2)
    assert rep.ok and chain2.incomplete is None
    S = chain2.final
    assert any(len(b) >= 2 for b in S.E)
    assert len(S.E) >= 2
    for T in k_catalog(2):
        assert embeds_up_to_renaming(T, S)


def test_bound_three_contains_every_type():
    ch = build_chain(3, 1, seed=0)
    assert ch.incomplete is None
    rep = check_richness(ch, 3)
    assert not rep.missing_types
    assert rep.ok
    for T in k_catalog(3):
        assert embeds_up_to_renaming(T, ch.final)


def test_stages_valid_and_monotone(chain2):
    counts = []
    for i, S in enumerate(chain2.stages):
        assert validate_k(S).ok
        counts.append(classes_count(S))
        if i:
            assert chain2.inclusion(i - 1).check()
    assert counts == sorted(counts)
    assert classes_count(XEStructure.build(0)) == 0


def test_truncated_chain_unsatisfied(chain2):
    t = chain2.truncate(0)
    rep = check_richness(t, 2)
    assert rep.unsatisfied
    assert not check_richness(t, 0).unsatisfied


def test_log_tampering_detected(chain2):
    ch = copy.deepcopy(chain2)
    e = ch.log[0]
    ch.log[0] = type(e)(e.pid, e.stage_i, e.copy, e.type_index, e.stage_j, tuple(0 for _ in e.witness))
    rep = check_richness(ch, 2)
    assert rep.bad_entries == [0]


def test_dimension_cap_marks_incomplete():
    ch = build_chain(2, 3, seed=0, max_dim=4)
    assert ch.incomplete and "dimension limit" in ch.incomplete
    assert ch.final.dim <= 4
    assert check_richness(ch).incomplete


def test_stage_cap_marks_incomplete():
    ch = build_chain(1, 5, seed=0, max_stages=3)
    assert ch.incomplete and "stage limit" in ch.incomplete


def test_bad_arguments():
    with pytest.raises(ValueError):
        build_chain(4, 1)
    with pytest.raises(ValueError):
        build_chain(-1, 1)


def test_deterministic():
    a, b = build_chain(2, 1, seed=5), build_chain(2, 1, seed=5)
    assert a.final == b.final and a.dims == b.dims and a.log == b.log


def test_literal_assignment_cases():
    T = XEStructure.build(2, {0: F2Subspace(2, (0b11,))}, [1, 2], [[1, 2]])
    point = XEStructure.build(1, {}, [1])
    assert literal_assignment(T, point, [1]) == ({}, [frozenset({0, 3})])
    G = XEStructure.build(2, {7: F2Subspace(2, (0b11,))}, [1, 2], [[1, 2]])
    assert literal_assignment(T, G, [2, 1]) == ({7: frozenset({0, 3})}, [])
    apart = XEStructure.build(2, {7: F2Subspace(2, (0b11,))}, [1, 2])
    assert literal_assignment(T, apart, [1, 2]) is None


# ---------------------------------------------------------------- embed_fixing

def _point_chain():
    ch = Chain.empty(1)
    ch.append(XEStructure.build(1, {}, [1]))
    return ch


def test_embed_fixing_identity():
    ch = _point_chain()
    S = ch.final
    F = S
    e = Embedding(F2LinearMap.identity(1), F, F, L_XE)
    ch2, k = embed_fixing(ch, F, e, e)
    assert ch2.dims == [0, 1]
    assert k.map == e.map


def test_embed_fixing_new_point_disjoint():
    ch = _point_chain()
    Z = XEStructure.build(0)
    D = XEStructure.build(1, {}, [1])
    e_FD = Embedding(F2LinearMap(0, 1, ()), Z, D, L_XE)
    anchor = Embedding(F2LinearMap(0, 1, ()), Z, ch.final, L_XE)
    ch, k = embed_fixing(ch, D, e_FD, anchor)
    assert ch.final.dim == 2
    assert k(1) == 0b10
    assert is_embedding(k.map, D, ch.final, L_XE)
    assert not ch.final.equivalent(0b01, 0b10)


def test_embed_fixing_joins_existing_block():
    ch = _point_chain()
    F = ch.final
    D = XEStructure.build(2, {0: F2Subspace(2, (0b11,))}, [1, 2], [[1, 2]])
    e_FD = Embedding(F2LinearMap(1, 2, (1,)), F, D, L_XE)
    anchor = Embedding(F2LinearMap.identity(1), F, F, L_XE)
    ch, k = embed_fixing(ch, D, e_FD, anchor)
    assert k(1) == 1
    assert ch.final.equivalent(k(1), k(2))
    assert k(2) != 1


def test_embed_fixing_rejects_non_substructure():
    ch = _point_chain()
    F = XEStructure.build(1, {}, [1])
    D = XEStructure.build(2, {0: F2Subspace(2, (0b11,))}, [1, 2])
    bad = Embedding(F2LinearMap(1, 2, (0b11,)), F, D, L_XE)
    anchor = Embedding(F2LinearMap.identity(1), F, ch.final, L_XE)
    with pytest.raises(ChainError):
        embed_fixing(ch, D, bad, anchor)
