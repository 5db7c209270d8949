"""Class-tracking partial isomorphisms and their one-point extensions.

A tracked map lives inside the final stage of a chain: its domain and image
are given by X-elements of that stage, and ``h`` sends E-blocks (named by
their least element) to E-blocks.  Extending a map to a larger domain
follows the controlled-amalgam recipe: copy the new domain abstractly over
the current image, glue it to a set of block representatives with the
partition dictated by ``h``, and embed the result back over those
representatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .amalgam import AmalgamationProblem, amalgamate_k
from .f2core import F2LinearMap, map_from_basis
from .fraisse import Chain, embed_fixing
from .tagged import L_XE, Embedding, XEStructure, generated_substructure, is_embedding


class LiftingError(ValueError):
    pass


@dataclass
class ClassBijection:
    mapping: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.mapping.values())) != len(self.mapping):
            raise LiftingError("class map is not injective")

    @property
    def source_blocks(self) -> tuple[int, ...]:
        return tuple(sorted(self.mapping))

    @property
    def target_blocks(self) -> tuple[int, ...]:
        return tuple(self.mapping[b] for b in self.source_blocks)

    def __call__(self, block: int) -> int:
        return self.mapping[block]

    def inverse(self) -> ClassBijection:
        return ClassBijection({v: k for k, v in self.mapping.items()})


@dataclass
class TrackedPartialIso:
    domain: tuple[int, ...]      # X-elements of the final stage
    images: tuple[int, ...]      # aligned images
    h: ClassBijection

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.domain, self.images))

    def inverse(self) -> TrackedPartialIso:
        pairs = sorted(zip(self.images, self.domain))
        return TrackedPartialIso(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), self.h.inverse())

    def embedding(self, chain: Chain) -> Embedding:
        A = generated_substructure(chain.final, self.domain)
        m = F2LinearMap(A.dim, chain.final.dim, tuple(self.images))
        return Embedding(m, A, chain.final, L_XE)


def _sorted_pairs(domain, images):
    pairs = sorted(zip(domain, images))
    return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)


def is_in_Fh(f: TrackedPartialIso, chain: Chain) -> bool:
    """Literal L_XE-embedding of the generated domain that moves blocks as ``h`` says."""
    S = chain.final
    if len(f.domain) != len(f.images) or len(set(f.images)) != len(f.images):
        return False
    if list(f.domain) != sorted(f.domain):
        return False
    if not (set(f.domain) <= S.X and set(f.images) <= S.X):
        return False
    for x, y in zip(f.domain, f.images):
        if f.h.mapping.get(S.block_id(x)) != S.block_id(y):
            return False
    emb = f.embedding(chain)
    return is_embedding(emb.map, emb.source, S, L_XE)


def _new_block(chain: Chain) -> int:
    """Grow the chain by one point in a new block and return its block id."""
    S = chain.final
    F = XEStructure.build(0)
    D = XEStructure.build(1, {}, [1])
    _, k = embed_fixing(chain, D, Embedding(F2LinearMap(0, 1, ()), F, D),
                        Embedding(F2LinearMap(0, S.dim, ()), F, S))
    return k(1)


def extend_h(h: ClassBijection, blocks: list[int], chain: Chain) -> ClassBijection:
    """Extend ``h`` to ``blocks`` by sending each new block to the lowest unused one."""
    mapping = dict(h.mapping)
    for b in sorted(blocks):
        if b in mapping:
            continue
        used = set(mapping.values())
        free = [min(B) for B in chain.final.blocks_sorted if min(B) not in used]
        target = free[0] if free else _new_block(chain)
        mapping[b] = target
    return ClassBijection(mapping)


def extend_one_step(f: TrackedPartialIso, A_prime: tuple[int, ...] | list[int] | set[int],
                    chain: Chain) -> tuple[TrackedPartialIso, Chain]:
    """Extend ``f`` to the substructure generated by ``A_prime ⊇ dom f``."""
    S = chain.final
    new_dom = tuple(sorted(set(A_prime)))
    if not set(f.domain) <= set(new_dom):
        raise LiftingError("A' must contain the domain of f")
    if not set(new_dom) <= S.X:
        raise LiftingError("A' must consist of X-elements of the final stage")
    if new_dom == f.domain:
        return f, chain
    h = extend_h(f.h, [S.block_id(x) for x in new_dom], chain)
    S = chain.final

    A1 = generated_substructure(S, new_dom)               # the abstract copy C
    cpos = {x: 1 << i for i, x in enumerate(new_dom)}
    Bx = tuple(sorted(f.images))
    B = generated_substructure(S, Bx)
    inv = {y: x for x, y in zip(f.domain, f.images)}
    e_C = Embedding(F2LinearMap(B.dim, A1.dim, tuple(cpos[inv[y]] for y in Bx)), B, A1)

    reps = {}
    for x in new_dom:
        tb = h(S.block_id(x))
        reps[tb] = min(S.block_of[tb])
    Y = tuple(sorted(set(Bx) | set(reps.values())))
    F = generated_substructure(S, Y)
    fpos = {y: 1 << i for i, y in enumerate(Y)}
    e_B = Embedding(F2LinearMap(B.dim, F.dim, tuple(fpos[y] for y in Bx)), B, F)

    # E*: keep E^F and E^C, and link x in the copy to y in F iff h(x/E) = y/E
    parent: dict = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for b in F.E:
        items = [("B", v) for v in b]
        for it in items:
            parent[find(it)] = find(items[0])
    for b in A1.E:
        items = [("C", v) for v in b]
        for it in items:
            parent[find(it)] = find(items[0])
    for x in new_dom:
        tb = h(S.block_id(x))
        for y in Y:
            if S.block_id(y) == tb:
                parent[find(("C", cpos[x]))] = find(("B", fpos[y]))
    groups: dict = {}
    for a in list(parent):
        groups.setdefault(find(a), []).append(a)
    e_star = list(groups.values())

    res = amalgamate_k(AmalgamationProblem(B, F, A1, e_B, e_C), e_star)
    D = res.D
    anchor = Embedding(F2LinearMap(F.dim, S.dim, Y), F, S)
    chain, k = embed_fixing(chain, D, res.i_B, anchor)
    images = tuple(k(res.i_C(cpos[x])) for x in new_dom)
    out = TrackedPartialIso(new_dom, images, h)
    old = f.as_dict()
    if any(old[x] != y for x, y in zip(new_dom, images) if x in old):
        raise LiftingError("extension is not conservative")
    return out, chain


def lift_over(h: ClassBijection | Mapping[int, int], target: tuple[int, ...] | list[int],
              chain: Chain, f: TrackedPartialIso | None = None) -> TrackedPartialIso:
    """Run one-point extensions from ``f`` (default: empty) until ``target`` is covered."""
    h = h if isinstance(h, ClassBijection) else ClassBijection(dict(h))
    if f is None:
        f = TrackedPartialIso((), (), h)
    dom = list(f.domain)
    for x in sorted(set(target)):
        if x in dom:
            continue
        dom.append(x)
        f, chain = extend_one_step(f, dom, chain)
    return f


def identity_tracked(chain: Chain, domain: tuple[int, ...]) -> TrackedPartialIso:
    S = chain.final
    d = tuple(sorted(domain))
    return TrackedPartialIso(d, d, ClassBijection({S.block_id(x): S.block_id(x) for x in d}))
