"""Finite tagged F2-structures in the languages L, L_X and L_XE.

A structure lives on ``F2^dim`` (vectors are ints).  ``tags`` maps a tag index
to a nonzero subspace; an absent index is the zero subgroup.  The distinguished
set ``X`` and the partition ``E`` are stored as frozensets of ints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .f2core import (
    F2LinearMap,
    F2Subspace,
    check_guard,
    ints_independent,
    map_from_basis,
    rref,
    span_elements,
)

L, L_X, L_XE = "L", "L_X", "L_XE"
LEVELS = (L, L_X, L_XE)


class StructureError(ValueError):
    """A structure or map violates a required invariant."""


def _canon_tags(dim: int, tags: Mapping[int, F2Subspace]) -> dict[int, F2Subspace]:
    out = {}
    for n in sorted(tags):
        U = tags[n]
        if not isinstance(n, int) or n < 0:
            raise StructureError(f"tag index must be a nonnegative int, got {n!r}")
        if U.ambient_dim != dim:
            raise StructureError(f"tag {n} lives in dimension {U.ambient_dim}, structure has {dim}")
        if U.rows:
            out[n] = U
    return out


@dataclass(frozen=True, eq=True)
class TaggedStructure:
    dim: int
    tags: Mapping[int, F2Subspace] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dim < 0:
            raise StructureError("dimension must be nonnegative")
        object.__setattr__(self, "tags", _canon_tags(self.dim, self.tags))

    __hash__ = None  # type: ignore[assignment]

    def tag(self, n: int) -> F2Subspace:
        return self.tags.get(n) or F2Subspace.zero(self.dim)

    @cached_property
    def labels(self) -> dict[int, tuple[int, ...]]:
        """Tagged element -> sorted tag indices containing it (0 excluded)."""
        acc: dict[int, list[int]] = {}
        for n, U in self.tags.items():
            for v in span_elements(U.rows):
                if v:
                    acc.setdefault(v, []).append(n)
        return {v: tuple(ns) for v, ns in acc.items()}

    def label(self, v: int) -> tuple[int, ...]:
        return self.labels.get(v, ())

    @property
    def max_index(self) -> int:
        return max(self.tags, default=-1)


@dataclass(frozen=True, eq=True)
class XStructure:
    base: TaggedStructure
    X: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "X", frozenset(self.X))
        for x in self.X:
            if x <= 0 or x >> self.base.dim:
                raise StructureError(f"X element {x} outside the nonzero vectors of dimension {self.base.dim}")

    __hash__ = None  # type: ignore[assignment]

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def tags(self) -> Mapping[int, F2Subspace]:
        return self.base.tags

    @property
    def xs(self) -> XStructure:
        return self

    @cached_property
    def X_sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.X))


@dataclass(frozen=True, eq=True)
class XEStructure:
    xs: XStructure
    E: frozenset[frozenset[int]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "E", frozenset(frozenset(b) for b in self.E))

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def build(cls, dim: int, tags: Mapping[int, F2Subspace] | None = None,
              X: Iterable[int] = (), E: Iterable[Iterable[int]] | None = None) -> XEStructure:
        """Convenience constructor; ``E=None`` means the trivial partition."""
        X = frozenset(X)
        if E is None:
            E = [[x] for x in X]
        return cls(XStructure(TaggedStructure(dim, tags or {}), X), frozenset(frozenset(b) for b in E))

    @property
    def dim(self) -> int:
        return self.xs.base.dim

    @property
    def base(self) -> TaggedStructure:
        return self.xs.base

    @property
    def tags(self) -> Mapping[int, F2Subspace]:
        return self.xs.base.tags

    @property
    def X(self) -> frozenset[int]:
        return self.xs.X

    @property
    def X_sorted(self) -> tuple[int, ...]:
        return self.xs.X_sorted

    @property
    def labels(self) -> dict[int, tuple[int, ...]]:
        return self.xs.base.labels

    @cached_property
    def block_of(self) -> dict[int, frozenset[int]]:
        return {x: b for b in self.E for x in b}

    def block_id(self, x: int) -> int:
        """Blocks are named by their least element."""
        return min(self.block_of[x])

    @cached_property
    def blocks_sorted(self) -> tuple[frozenset[int], ...]:
        return tuple(sorted(self.E, key=min))

    def equivalent(self, x: int, y: int) -> bool:
        return self.block_of[x] is self.block_of[y] or y in self.block_of[x]


AnyStructure = Union[TaggedStructure, XStructure, XEStructure]


def as_xe(S: XStructure | XEStructure) -> XEStructure:
    """Read an L_X structure as an L_XE one with the trivial partition."""
    if isinstance(S, XEStructure):
        return S
    return XEStructure(S, frozenset(frozenset([x]) for x in S.X))


@dataclass
class ValidationReport:
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------- class membership

def compute_X(base: TaggedStructure, guard: int | None = None) -> frozenset[int]:
    """Complement of the union of all tagged subgroups, by enumeration."""
    check_guard(base.dim, guard)
    covered = set(base.labels)
    covered.add(0)
    return frozenset(v for v in range(1 << base.dim) if v not in covered)


def validate_k0(candidate: XStructure | XEStructure, guard: int | None = None) -> ValidationReport:
    xs = candidate.xs
    report = ValidationReport()
    base = xs.base
    for n, U in base.tags.items():
        if U.ambient_dim != base.dim:
            report.failures.append(f"K0.tagged-group: tag {n} is not a subgroup of the universe")
    if xs.X != compute_X(base, guard):
        report.failures.append("K0.X-complement: X is not the complement of the union of the tags")
    if len(xs.X) != base.dim or not ints_independent(list(xs.X)):
        report.failures.append("K0.X-basis: X is not a basis of the universe")
    return report


def validate_k(candidate: XEStructure, guard: int | None = None) -> ValidationReport:
    report = validate_k0(candidate, guard)
    seen: set[int] = set()
    for b in candidate.E:
        if not b:
            report.failures.append("K.E-partition: empty block")
        if seen & b:
            report.failures.append("K.E-partition: blocks overlap")
        seen |= b
    if seen != set(candidate.X):
        report.failures.append("K.E-partition: E does not partition exactly X")
    return report


# ---------------------------------------------------------------- embeddings

@dataclass(frozen=True, eq=True)
class Embedding:
    map: F2LinearMap
    source: AnyStructure
    target: AnyStructure
    level: str = L_XE

    __hash__ = None  # type: ignore[assignment]

    def __call__(self, v: int) -> int:
        return self.map.apply_int(v)

    def compose(self, inner: Embedding) -> Embedding:
        """``self ∘ inner``."""
        return Embedding(self.map.compose(inner.map), inner.source, self.target,
                         _weaker(self.level, inner.level))

    def check(self, reindex: bool = False) -> bool:
        return is_embedding(self.map, self.source, self.target, self.level, reindex=reindex)


def _weaker(a: str, b: str) -> str:
    return LEVELS[min(LEVELS.index(a), LEVELS.index(b))]


def _structure_base(S: AnyStructure) -> TaggedStructure:
    return S if isinstance(S, TaggedStructure) else S.xs.base


def family(S: AnyStructure) -> frozenset[frozenset[int]]:
    """The set of named subgroups, each as a set of elements (indices forgotten)."""
    return frozenset(frozenset(span_elements(U.rows)) for U in _structure_base(S).tags.values())


def _pullback_family(f: F2LinearMap, A_dim: int, B_labels: Mapping[int, tuple[int, ...]]) -> frozenset:
    acc: dict[int, set[int]] = {}
    for a in range(1, 1 << A_dim):
        for n in B_labels.get(f.apply_int(a), ()):
            acc.setdefault(n, {0}).add(a)
    return frozenset(frozenset(s) for s in acc.values())


def is_embedding(f: F2LinearMap, A: AnyStructure, B: AnyStructure, level: str = L_XE,
                 reindex: bool = False, guard: int | None = None) -> bool:
    """Injective, tags preserved and reflected (up to renaming when ``reindex``), X and E respected."""
    a_base, b_base = _structure_base(A), _structure_base(B)
    if f.domain_dim != a_base.dim or f.codomain_dim != b_base.dim or not f.is_injective():
        return False
    check_guard(a_base.dim, guard)
    if a_base.dim == 0:
        return True
    if reindex:
        if _pullback_family(f, a_base.dim, b_base.labels) != family(a_base):
            return False
    else:
        la, lb = a_base.labels, b_base.labels
        for a in range(1, 1 << a_base.dim):
            if la.get(a, ()) != lb.get(f.apply_int(a), ()):
                return False
    if level in (L_X, L_XE):
        if not isinstance(A, (XStructure, XEStructure)) or not isinstance(B, (XStructure, XEStructure)):
            raise StructureError("L_X embeddings need X-structures")
        XB = B.X
        for a in range(1, 1 << a_base.dim):
            if (a in A.X) != (f.apply_int(a) in XB):
                return False
    if level == L_XE:
        A_, B_ = as_xe(A), as_xe(B)
        xs = A_.X_sorted
        for i, x in enumerate(xs):
            for y in xs[i:]:
                if A_.equivalent(x, y) != B_.equivalent(f.apply_int(x), f.apply_int(y)):
                    return False
    return True


def find_embeddings(A: XStructure | XEStructure, B: XStructure | XEStructure, level: str = L_XE,
                    reindex: bool = False, limit: int | None = None,
                    fixed: Mapping[int, int] | None = None) -> list[Embedding]:
    """All embeddings of ``A`` into ``B`` at ``level``, in deterministic order.

    Backtracks over images of ``A``'s X-basis (ascending) among ``B``'s X
    (ascending), checking every newly generated element as soon as it exists.
    ``fixed`` pins some basis images in advance.  With ``reindex`` tag indices
    may be renamed: only the family of named subgroups has to match.
    """
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}")
    A_, B_ = as_xe(A), as_xe(B)
    xa = A_.X_sorted
    xb = B_.X_sorted
    p = len(xa)
    to_coords = map_from_basis(xa, [1 << i for i in range(p)], A_.dim, p)
    la = {to_coords.apply_int(v): ns for v, ns in A_.labels.items()}
    lb = B_.labels
    fixed = dict(fixed or {})
    use_e = level == L_XE

    if reindex:
        fam_a = [frozenset(to_coords.apply_int(v) for v in s) for s in family(A_)]
        restricted = [frozenset(frozenset(v for v in s if v < (1 << k)) for s in fam_a) - {frozenset([0])}
                      for k in range(p + 1)]

    images: list[int] = [0] * p
    # span_imgs[k] lists f(c) for c in range(2**k), c in X-coordinates
    span_imgs: list[int] = [0]
    results: list[Embedding] = []

    def family_ok(k: int) -> bool:
        acc: dict[int, set[int]] = {}
        for c in range(1, 1 << k):
            for n in lb.get(span_imgs[c], ()):
                acc.setdefault(n, {0}).add(c)
        return frozenset(frozenset(s) for s in acc.values()) == restricted[k]

    def rec(k: int) -> bool:
        if k == p:
            fmap = map_from_basis(list(xa), images, A_.dim, B_.dim)
            results.append(Embedding(fmap, A, B, level))
            return limit is not None and len(results) >= limit
        x = xa[k]
        cands = [fixed[x]] if x in fixed else xb
        used = set(images[:k])
        for y in cands:
            if y in used or y not in B_.X:
                continue
            if use_e:
                bad = False
                for j in range(k):
                    if A_.equivalent(xa[j], x) != B_.equivalent(images[j], y):
                        bad = True
                        break
                if bad:
                    continue
            new = [v ^ y for v in span_imgs]
            if not reindex:
                base = 1 << k
                if any(la.get(base | c, ()) != lb.get(new[c], ()) for c in range(base)):
                    continue
            images[k] = y
            span_imgs.extend(new)
            ok = True
            if reindex and not family_ok(k + 1):
                ok = False
            if ok and rec(k + 1):
                return True
            del span_imgs[1 << k:]
        images[k] = 0
        return False

    rec(0)
    return results


# ---------------------------------------------------------------- substructures

def generated_substructure(M: XEStructure, Y: Iterable[int], with_inclusion: bool = False):
    """Smallest L_XE-substructure of ``M`` containing ``Y ⊆ X^M``.

    The result lives on ``span(Y)`` with coordinates given by ``Y`` in
    ascending order; tags are restricted, ``X = Y`` and ``E`` is restricted.
    Elements of ``span(Y)`` outside ``Y`` left uncovered by the restricted tags
    receive fresh singleton tags (smallest indices unused in ``M``), which
    never happens when ``M`` itself is in K.
    """
    Y = sorted(set(Y))
    if not set(Y) <= M.X:
        raise StructureError("Y must be a subset of X^M")
    k = len(Y)
    check_guard(k)
    if k == 0:
        S = XEStructure(XStructure(TaggedStructure(0, {}), frozenset()), frozenset())
        return (S, Embedding(F2LinearMap(0, M.dim, ()), S, M, L_XE)) if with_inclusion else S
    elems = [0]
    for y in Y:
        elems += [v ^ y for v in elems]
    labels = M.labels
    acc: dict[int, list[int]] = {}
    for c in range(1, 1 << k):
        for n in labels.get(elems[c], ()):
            acc.setdefault(n, []).append(c)
    tags = {n: F2Subspace(k, rref(cs)) for n, cs in acc.items()}
    Xs = frozenset(1 << i for i in range(k))
    covered = {c for U in tags.values() for c in span_elements(U.rows)}
    nxt = M.xs.base.max_index + 1
    for c in range(1, 1 << k):
        if c not in covered and c not in Xs:
            tags[nxt] = F2Subspace(k, (c,))
            nxt += 1
    pos = {y: 1 << i for i, y in enumerate(Y)}
    E = frozenset(frozenset(pos[y] for y in b if y in pos) for b in M.E) - {frozenset()}
    S = XEStructure(XStructure(TaggedStructure(k, tags), Xs), E)
    if not with_inclusion:
        return S
    inc = F2LinearMap(k, M.dim, tuple(Y))
    return S, Embedding(inc, S, M, L_XE)


def normalize_tags(S: XEStructure) -> XEStructure:
    """Reindex tags 0, 1, ... in (dimension, canonical basis) order."""
    ordered = sorted(S.tags.values(), key=lambda U: (U.dim, U.rows))
    tags = {i: U for i, U in enumerate(ordered)}
    return XEStructure(XStructure(TaggedStructure(S.dim, tags), S.X), S.E)


def relabel_indices(S: XEStructure, mapping: Mapping[int, int]) -> XEStructure:
    """Rename tag indices (an injective ``mapping`` on the indices of ``S``)."""
    tags = {mapping.get(n, n): U for n, U in S.tags.items()}
    if len(tags) != len(S.tags):
        raise StructureError("index renaming is not injective")
    return XEStructure(XStructure(TaggedStructure(S.dim, tags), S.X), S.E)


def in_x_coordinates(S: XEStructure) -> tuple[frozenset, frozenset]:
    """Family and partition rewritten in coordinates w.r.t. the sorted X-basis."""
    xa = S.X_sorted
    to_c = map_from_basis(list(xa), [1 << i for i in range(len(xa))], S.dim, len(xa))
    fam = frozenset(frozenset(to_c.apply_int(v) for v in s) for s in family(S))
    E = frozenset(frozenset(to_c.apply_int(x) for x in b) for b in S.E)
    return fam, E


def _permute_bits(v: int, perm: Sequence[int]) -> int:
    out = 0
    for i, j in enumerate(perm):
        if v >> i & 1:
            out |= 1 << j
    return out


def type_key(S: XEStructure) -> tuple:
    """Isomorphism invariant up to tag renaming: minimal form over X-permutations."""
    d = len(S.X)
    fam, E = in_x_coordinates(S)
    best = None
    for perm in itertools.permutations(range(d)):
        f2 = tuple(sorted(tuple(sorted(_permute_bits(v, perm) for v in s)) for s in fam))
        e2 = tuple(sorted(tuple(sorted(_permute_bits(x, perm) for x in b)) for b in E))
        key = (d, f2, e2)
        if best is None or key < best:
            best = key
    return best


def structure_from_type(key: tuple) -> XEStructure:
    d, fam, E = key
    tags = {i: F2Subspace(d, rref(s)) for i, s in enumerate(fam)}
    return XEStructure.build(d, tags, [1 << i for i in range(d)], E)


def _partitions(items: list) -> Iterator[list[list]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in _partitions(rest):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]
        yield [[first]] + p


def _avoiding_subspaces(d: int) -> list[frozenset[int]]:
    X = {1 << i for i in range(d)}
    found: set[frozenset[int]] = set()
    nonX = [v for v in range(1, 1 << d) if v not in X]
    for k in range(1, d):
        for gens in itertools.combinations(nonX, k):
            s = frozenset(span_elements(rref(gens)))
            if not s & X:
                found.add(s)
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def k_catalog(max_dim: int) -> list[XEStructure]:
    """Representatives of the K-structures of dimension <= max_dim up to
    isomorphism and renaming of tag indices (max_dim <= 3)."""
    if max_dim > 3:
        raise ValueError("catalog enumeration is limited to dimension 3")
    keys: set[tuple] = set()
    for d in range(max_dim + 1):
        X = {1 << i for i in range(d)}
        nonX = {v for v in range(1, 1 << d)} - X
        avoid = _avoiding_subspaces(d)
        for r in range(len(avoid) + 1):
            for fam in itertools.combinations(avoid, r):
                if set().union(*fam, set()) - {0} != nonX:
                    continue
                for part in _partitions(sorted(X)):
                    S = structure_from_type((d, tuple(tuple(sorted(s)) for s in fam),
                                             tuple(tuple(b) for b in part)))
                    keys.add(type_key(S))
    return [structure_from_type(k) for k in sorted(keys)]


def embeds_up_to_renaming(A: XEStructure, B: XEStructure) -> bool:
    return bool(find_embeddings(A, B, L_XE, reindex=True, limit=1))
