import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tagbc.f2core import F2LinearMap, F2Subspace, GuardError
from tagbc.generators import random_k_structure
from tagbc.tagged import (
    L,
    L_X,
    L_XE,
    Embedding,
    StructureError,
    TaggedStructure,
    XEStructure,
    XStructure,
    compute_X,
    embeds_up_to_renaming,
    find_embeddings,
    generated_substructure,
    is_embedding,
    k_catalog,
    normalize_tags,
    relabel_indices,
    type_key,
    validate_k,
    validate_k0,
)


def sub(d, *vs):
    return F2Subspace.from_ints(d, [int(v, 2) for v in vs])


def std(dim, tags=None, E=None):
    return XEStructure.build(dim, tags or {}, [1 << i for i in range(dim)], E)


def full3(E=None):
    """Three independent X-elements, every other nonzero vector singleton-tagged."""
    tags = {i: F2Subspace(3, (v,)) for i, v in enumerate([0b011, 0b101, 0b110, 0b111])}
    return std(3, tags, E)


def test_compute_x_examples():
    assert compute_X(TaggedStructure(0)) == frozenset()
    assert compute_X(TaggedStructure(2, {0: sub(2, "11")})) == {0b01, 0b10}
    assert compute_X(TaggedStructure(2)) == {0b01, 0b10, 0b11}


def test_compute_x_guard():
    with pytest.raises(GuardError):
        compute_X(TaggedStructure(21))


def test_validate_k0_examples():
    assert validate_k0(XStructure(TaggedStructure(0), frozenset())).ok
    assert validate_k0(XStructure(TaggedStructure(2, {0: sub(2, "11")}), {1, 2})).ok
    rep = validate_k0(XStructure(TaggedStructure(2), {1, 2, 3}))
    assert not rep.ok
    assert any(f.startswith("K0.X-basis") for f in rep.failures)


def test_validate_k0_complement_failure_is_named():
    rep = validate_k0(XStructure(TaggedStructure(2), {1, 2}))
    assert [f.split(":")[0] for f in rep.failures] == ["K0.X-complement"]


def test_validate_k_examples():
    assert validate_k(full3()).ok
    S = full3()
    bad = XEStructure(S.xs, frozenset([frozenset([1, 0b011]), frozenset([2]), frozenset([4])]))
    assert not validate_k(bad).ok
    assert validate_k(XEStructure.build(0)).ok
    overlap = XEStructure(S.xs, frozenset([frozenset([1, 2]), frozenset([2, 4])]))
    assert any("overlap" in f for f in validate_k(overlap).failures)


def test_find_embeddings_examples():
    Z = XEStructure.build(0)
    assert len(find_embeddings(Z, Z)) == 1
    A = std(1)
    B = std(2, {0: sub(2, "11")})
    embs = find_embeddings(A, B)
    assert sorted(e.map.images for e in embs) == [(0b01,), (0b10,)]
    A2 = std(2, {0: sub(2, "11")}, E=[[1, 2]])
    assert find_embeddings(A2, B) == []
    assert len(find_embeddings(A2, B, level=L_X)) == 2


def test_embedding_levels():
    B = std(2, {0: sub(2, "11")})
    swap = F2LinearMap(2, 2, (2, 1))
    assert is_embedding(swap, B, B, L)
    assert is_embedding(swap, B, B, L_XE)
    shear = F2LinearMap(2, 2, (1, 3))
    assert not is_embedding(shear, B, B, L)
    assert not is_embedding(F2LinearMap(2, 2, (1, 1)), B, B, L)


def test_generated_substructure_examples():
    M = full3()
    S0 = generated_substructure(M, [])
    assert S0.dim == 0 and validate_k(S0).ok
    assert normalize_tags(generated_substructure(M, M.X)) == normalize_tags(M)
    S, inc = generated_substructure(M, [0b001, 0b010], with_inclusion=True)
    assert S.dim == 2 and S.X == {1, 2}
    assert validate_k(S).ok
    # the sum 001 + 010 = 011 stays tagged by the restriction of its own tag
    assert S.labels == {0b11: (0,)}
    assert inc.check()
    with pytest.raises(StructureError):
        generated_substructure(M, [0b011])


def test_generated_substructure_restricts_e():
    M = full3(E=[[1, 2], [4]])
    S = generated_substructure(M, [1, 4])
    assert S.E == {frozenset([1]), frozenset([2])}
    S = generated_substructure(M, [1, 2])
    assert S.E == {frozenset([1, 2])}


def test_relabel_and_normalize():
    S = std(2, {5: sub(2, "11")})
    T = relabel_indices(S, {5: 9})
    assert T.tags.keys() == {9}
    assert normalize_tags(S) == normalize_tags(T)
    assert type_key(S) == type_key(T)
    assert embeds_up_to_renaming(S, T) and not find_embeddings(S, T)


def _catalog_oracle():
    """Count K-structures of dim <= 3 up to isomorphism and tag renaming by a
    direct orbit search over (family of subgroups, partition) pairs."""
    def span(gens):
        out = {0}
        for g in gens:
            out |= {u ^ g for u in out}
        return frozenset(out)

    def partitions(xs):
        if not xs:
            yield []
            return
        for p in partitions(xs[1:]):
            yield [[xs[0]]] + p
            for i in range(len(p)):
                yield p[:i] + [[xs[0]] + p[i]] + p[i + 1:]

    def perm_vec(v, p):
        return sum(1 << p[i] for i in range(len(p)) if v >> i & 1)

    total = 0
    for d in range(4):
        units = {1 << i for i in range(d)}
        others = set(range(1, 1 << d)) - units
        subs = {span(g) for r in range(1, d + 1) for g in itertools.combinations(sorted(others), r)}
        subs = [s for s in subs if not s & units]
        seen = set()
        for r in range(len(subs) + 1):
            for fam in itertools.combinations(subs, r):
                if set().union(set(), *fam) - {0} != others:
                    continue
                for part in partitions(sorted(units)):
                    forms = []
                    for p in itertools.permutations(range(d)):
                        f = frozenset(frozenset(perm_vec(v, p) for v in s) for s in fam)
                        e = frozenset(frozenset(perm_vec(x, p) for x in b) for b in part)
                        forms.append((f, e))
                    if not any(x in seen for x in forms):
                        total += 1
                    seen.update(forms)
    return total


def test_catalog_size_matches_oracle():
    cat = k_catalog(3)
    assert len(cat) == _catalog_oracle() == 21
    assert [sum(1 for S in cat if S.dim == d) for d in range(4)] == [1, 1, 2, 17]
    assert all(validate_k(S).ok for S in cat)
    assert len({type_key(S) for S in cat}) == 21


# ---------------------------------------------------------------- properties

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 6))
def test_random_structures_are_bases(seed, dim):
    S = random_k_structure(random.Random(seed), dim)
    assert validate_k(S).ok
    assert len(S.X) == S.dim


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_generated_substructure_always_valid(seed):
    rng = random.Random(seed)
    M = random_k_structure(rng, rng.randint(0, 6))
    Y = rng.sample(sorted(M.X), rng.randint(0, M.dim))
    S, inc = generated_substructure(M, Y, with_inclusion=True)
    assert validate_k(S).ok
    assert S.X == {1 << i for i in range(len(Y))}
    assert inc.check()
    # no fresh indices are ever needed inside a K-structure
    assert set(S.tags) <= set(M.tags)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_embeddings_compose(seed):
    rng = random.Random(seed)
    C = random_k_structure(rng, rng.randint(0, 5))
    Y = rng.sample(sorted(C.X), rng.randint(0, C.dim))
    B, e_BC = generated_substructure(C, Y, with_inclusion=True)
    Z = rng.sample(sorted(B.X), rng.randint(0, B.dim))
    A = generated_substructure(B, Z)
    for e in find_embeddings(A, B, reindex=True, limit=5):
        comp = e_BC.compose(e)
        assert isinstance(comp, Embedding)
        assert comp.check(reindex=True)
