import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tagbc.f2core import F2Subspace, intersect
from tagbc.generators import base_chain, random_lift_case
from tagbc.lifting import (
    ClassBijection,
    LiftingError,
    TrackedPartialIso,
    extend_one_step,
    identity_tracked,
    is_in_Fh,
    lift_over,
)


def blocks(chain):
    return [min(b) for b in chain.final.blocks_sorted]


def test_class_bijection():
    h = ClassBijection({1: 2, 2: 1})
    assert h(1) == 2 and h.inverse()(2) == 1
    assert h.source_blocks == (1, 2) and h.target_blocks == (2, 1)
    with pytest.raises(LiftingError):
        ClassBijection({1: 3, 2: 3})


def test_empty_map_is_tracked():
    ch = base_chain()
    assert is_in_Fh(TrackedPartialIso((), (), ClassBijection()), ch)
    h = ClassBijection({b: b for b in blocks(ch)})
    assert is_in_Fh(TrackedPartialIso((), (), h), ch)


def test_identity_is_tracked():
    ch = base_chain()
    dom = sorted(ch.final.X)[:3]
    assert is_in_Fh(identity_tracked(ch, tuple(dom)), ch)


def test_wrong_block_rejected():
    ch = base_chain()
    S = ch.final
    x, y = next((x, y) for x in sorted(S.X) for y in sorted(S.X) if not S.equivalent(x, y))
    h = ClassBijection({S.block_id(x): S.block_id(x)})
    assert not is_in_Fh(TrackedPartialIso((x,), (y,), h), ch)


def test_extension_by_nothing():
    ch = base_chain()
    f = identity_tracked(ch, tuple(sorted(ch.final.X)[:2]))
    g, ch2 = extend_one_step(f, f.domain, ch)
    assert g is f and ch2 is ch


def test_single_point_identity_h():
    ch = base_chain()
    S = ch.final
    x = sorted(S.X)[0]
    h = ClassBijection({b: b for b in blocks(ch)})
    f, ch = extend_one_step(TrackedPartialIso((), (), h), (x,), ch)
    assert ch.final.equivalent(f.images[0], x)
    assert is_in_Fh(f, ch)


def test_single_point_swapped_blocks():
    ch = base_chain()
    c1, c2 = blocks(ch)[:2]
    h = ClassBijection({c1: c2, c2: c1})
    x = max(ch.final.block_of[c1])
    n0 = len(ch.dims)
    f, ch = extend_one_step(TrackedPartialIso((), (), h), (x,), ch)
    assert ch.final.block_id(f.images[0]) == c2
    assert is_in_Fh(f, ch)
    assert len(ch.dims) >= n0


def test_lift_over_examples():
    ch = base_chain()
    h = ClassBijection({b: b for b in blocks(ch)})
    assert lift_over(h, (), ch).domain == ()
    target = tuple(sorted(ch.final.X)[:3])
    f = lift_over(h, target, ch)
    assert set(target) <= set(f.domain) and is_in_Fh(f, ch)


def test_lift_over_three_cycle():
    ch = base_chain(2, 2)
    bs = blocks(ch)[:3]
    assert len(bs) == 3
    h = ClassBijection({bs[0]: bs[1], bs[1]: bs[2], bs[2]: bs[0]})
    target = tuple(bs)
    f = lift_over(h, target, ch)
    assert is_in_Fh(f, ch)
    for x, y in f.as_dict().items():
        assert ch.final.block_id(y) == h(ch.final.block_id(x))


def test_bad_domain_rejected():
    ch = base_chain()
    f = identity_tracked(ch, tuple(sorted(ch.final.X)[:2]))
    with pytest.raises(LiftingError):
        extend_one_step(f, f.domain[:1], ch)
    non_x = next(v for v in range(1, 1 << ch.final.dim) if v not in ch.final.X)
    with pytest.raises(LiftingError):
        extend_one_step(f, f.domain + (non_x,), ch)


def _span(d, vs):
    return F2Subspace.from_ints(d, list(vs))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_one_step_closure_and_conservative(seed):
    case = random_lift_case(random.Random(seed))
    old = case.f.as_dict()
    f2, ch = extend_one_step(case.f, case.A_prime, case.chain)
    assert is_in_Fh(f2, ch)
    assert all(f2.as_dict()[x] == y for x, y in old.items())
    assert f2.domain == case.A_prime


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32))
def test_back_direction(seed):
    rng = random.Random(seed)
    case = random_lift_case(rng)
    ch = case.chain
    g = case.f.inverse()
    assert is_in_Fh(g, ch)
    more = rng.sample(sorted(ch.final.X), 2)
    g2, ch = extend_one_step(g, tuple(sorted(set(g.domain) | set(more))), ch)
    assert is_in_Fh(g2, ch)
    assert all(g2.as_dict()[x] == y for x, y in g.as_dict().items())


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32))
def test_new_image_avoids_representatives(seed):
    case = random_lift_case(random.Random(seed))
    S0 = case.chain.final
    old_dim = S0.dim
    Bx = case.f.images
    f2, ch = extend_one_step(case.f, case.A_prime, case.chain)
    d = ch.final.dim
    image = _span(d, f2.images)
    old_stage = F2Subspace.full(old_dim) if old_dim == d else _span(d, [1 << i for i in range(old_dim)])
    new_points = [y for x, y in f2.as_dict().items() if x not in case.f.as_dict()]
    # the new points land in the grown part whenever the chain was extended
    if d > old_dim:
        assert all(y >> old_dim for y in new_points)
        assert intersect(image, old_stage) == _span(d, Bx)
