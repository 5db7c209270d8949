"""Disjoint amalgamation for the classes K0 and K.

``D`` is always built on a fresh ambient space: coordinates ``0..|X^B|-1`` are
the images of ``X^B`` in ascending order, followed by the elements of
``X^C`` outside the image of ``A``, also ascending.  When ``X^B`` is the
standard basis the map ``B -> D`` is a prefix inclusion, so vectors of ``B``
keep their integer values in ``D``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from .f2core import F2LinearMap, F2Subspace, map_from_basis, rref, span_elements
from .tagged import (
    L_X,
    L_XE,
    Embedding,
    StructureError,
    TaggedStructure,
    XEStructure,
    XStructure,
    as_xe,
    is_embedding,
)


class AmalgamationError(ValueError):
    pass


@dataclass
class AmalgamationProblem:
    A: XStructure | XEStructure
    B: XStructure | XEStructure
    C: XStructure | XEStructure
    e_B: Embedding
    e_C: Embedding


@dataclass
class AmalgamationResult:
    D: XStructure | XEStructure
    i_B: Embedding
    i_C: Embedding
    fresh_tags: dict[int, int] = field(default_factory=dict)  # vector -> tag index


def _check_problem(problem: AmalgamationProblem, level: str) -> None:
    for name, e, tgt in (("e_B", problem.e_B, problem.B), ("e_C", problem.e_C, problem.C)):
        if e.map.domain_dim != problem.A.dim or e.map.codomain_dim != tgt.dim:
            raise AmalgamationError(f"{name} does not map A into {name[-1]}")
        if not is_embedding(e.map, problem.A, tgt, level):
            raise AmalgamationError(f"{name} is not an {level}-embedding: A is not a common substructure")


def amalgamate_k0(problem: AmalgamationProblem, check: bool = True) -> AmalgamationResult:
    """Amalgamate ``B`` and ``C`` over ``A`` inside K0.

    Active indices (nonzero in ``B`` or ``C``) get the sum of the two embedded
    tags; each remaining element outside ``X^D`` and the active tags receives
    a singleton tag at the smallest index that is neither active nor already
    used, scanning vectors in ascending order.
    """
    if check:
        _check_problem(problem, L_X)
    A, B, C = problem.A, problem.B, problem.C
    xb = B.X_sorted
    dB = len(xb)
    a_images_c = {problem.e_C(a): problem.e_B(a) for a in A.X}
    xc_new = [c for c in C.X_sorted if c not in a_images_c]
    dD = dB + len(xc_new)

    i_B_map = map_from_basis(list(xb), [1 << i for i in range(dB)], B.dim, dD)
    prefix = i_B_map.is_prefix_inclusion
    c_basis, c_imgs = [], []
    for c in C.X_sorted:
        c_basis.append(c)
        if c in a_images_c:
            c_imgs.append(i_B_map.apply_int(a_images_c[c]))
        else:
            c_imgs.append(1 << (dB + xc_new.index(c)))
    i_C_map = map_from_basis(c_basis, c_imgs, C.dim, dD)

    tags: dict[int, F2Subspace] = {}
    b_tags, c_tags = B.tags, C.tags
    touched: list[int] = []  # indices whose D-tag may leave the image of B
    for n, U in b_tags.items():
        if n in c_tags:
            continue
        tags[n] = F2Subspace(dD, U.rows) if prefix else i_B_map.image_of(U)
        if not prefix:
            touched.append(n)
    for n, U in c_tags.items():
        gens = [i_C_map.apply_int(r) for r in U.rows]
        if n in b_tags:
            gens += [i_B_map.apply_int(r) for r in b_tags[n].rows]
        tags[n] = F2Subspace(dD, rref(gens))
        touched.append(n)

    XD = frozenset(1 << i for i in range(dD))
    covered: set[int] = set()
    for n in touched:
        covered.update(span_elements(tags[n].rows))
    start = 1 << dB if prefix else 1
    active = set(tags)
    fresh: dict[int, int] = {}
    nxt = 0
    for v in range(start, 1 << dD):
        if v in covered or v in XD:
            continue
        while nxt in active:
            nxt += 1
        tags[nxt] = F2Subspace(dD, (v,))
        fresh[v] = nxt
        nxt += 1

    D = XStructure(TaggedStructure(dD, tags), XD)
    return AmalgamationResult(D, Embedding(i_B_map, B, D, L_X), Embedding(i_C_map, C, D, L_X), fresh)


def free_extension(E_B: Iterable[Iterable[Hashable]], E_C: Iterable[Iterable[Hashable]]) -> frozenset[frozenset]:
    """Smallest equivalence relation extending both partitions.

    Elements occurring in both supports form the shared part; the two
    partitions must induce the same relation there.
    """
    E_B = [frozenset(b) for b in E_B]
    E_C = [frozenset(b) for b in E_C]
    sup_b = set().union(*E_B) if E_B else set()
    sup_c = set().union(*E_C) if E_C else set()
    shared = sup_b & sup_c
    rb = {frozenset(b & shared) for b in E_B} - {frozenset()}
    rc = {frozenset(b & shared) for b in E_C} - {frozenset()}
    if rb != rc:
        raise AmalgamationError("partitions disagree on the shared part")
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for b in E_B + E_C:
        items = list(b)
        for y in items[1:]:
            parent[find(y)] = find(items[0])
        if items:
            find(items[0])
    groups: dict = {}
    for x in list(parent):
        groups.setdefault(find(x), set()).add(x)
    return frozenset(frozenset(g) for g in groups.values())


def _d_blocks(result: AmalgamationResult, B: XEStructure, C: XEStructure):
    eb = [frozenset(result.i_B(x) for x in b) for b in B.E]
    ec = [frozenset(result.i_C(x) for x in b) for b in C.E]
    return eb, ec


def labeled_to_d(result: AmalgamationResult, blocks: Iterable[Iterable[tuple[str, int]]]) -> frozenset[frozenset[int]]:
    """Translate blocks of ``("B", x)`` / ``("C", x)`` labels into ``D``-vectors."""
    out = []
    for b in blocks:
        members = set()
        for side, x in b:
            if side == "B":
                if x not in result.i_B.source.X:
                    raise AmalgamationError(f"B-element {x} is not in X^B")
                members.add(result.i_B(x))
            elif side == "C":
                if x not in result.i_C.source.X:
                    raise AmalgamationError(f"C-element {x} is not in X^C")
                members.add(result.i_C(x))
            else:
                raise AmalgamationError(f"unknown side {side!r}")
        out.append(frozenset(members))
    return frozenset(out)


def amalgamate_k(problem: AmalgamationProblem,
                 e_star: Iterable[Iterable[tuple[str, int]]] | None = None,
                 check: bool = True) -> AmalgamationResult:
    """Amalgamate in K with any admissible ``e_star`` (default: the free extension).

    ``e_star`` is a partition of ``X^B ∪ X^C`` written with side labels
    ``("B", x)`` and ``("C", x)``; elements of ``A`` may appear under either
    label.  It must restrict to ``E^B`` on ``X^B`` and to ``E^C`` on ``X^C``.
    """
    if check:
        _check_problem(problem, L_XE)
    B, C = as_xe(problem.B), as_xe(problem.C)
    res = amalgamate_k0(problem, check=False)
    eb, ec = _d_blocks(res, B, C)
    if e_star is None:
        blocks = free_extension(eb, ec)
    else:
        blocks = _merge_overlaps(labeled_to_d(res, e_star))
        _check_extends(blocks, eb, ec, res.D.X)
    D = XEStructure(res.D, blocks)
    return AmalgamationResult(D, Embedding(res.i_B.map, problem.B, D, L_XE),
                              Embedding(res.i_C.map, problem.C, D, L_XE), res.fresh_tags)


def _merge_overlaps(blocks: frozenset[frozenset[int]]) -> frozenset[frozenset[int]]:
    # A-elements named once via B and once via C land in two input blocks.
    merged: list[set[int]] = []
    for b in blocks:
        hits = [m for m in merged if m & b]
        new = set(b)
        for m in hits:
            new |= m
            merged.remove(m)
        merged.append(new)
    return frozenset(frozenset(m) for m in merged)


def _check_extends(blocks, eb, ec, XD) -> None:
    support = set().union(*blocks) if blocks else set()
    if support != set(XD):
        raise AmalgamationError("e_star does not partition exactly X^D")
    if sum(len(b) for b in blocks) != len(support):
        raise AmalgamationError("e_star blocks overlap")
    for side, E in (("B", eb), ("C", ec)):
        part = set().union(*E) if E else set()
        restricted = {frozenset(b & part) for b in blocks} - {frozenset()}
        if restricted != set(E):
            raise AmalgamationError(f"e_star does not extend E^{side}")


def admissible(blocks: frozenset[frozenset[int]], result: AmalgamationResult,
               B: XEStructure, C: XEStructure) -> bool:
    """Whether a D-coordinate partition restricts to ``E^B`` and ``E^C``."""
    eb, ec = _d_blocks(result, B, C)
    try:
        _check_extends(blocks, eb, ec, result.D.X)
    except AmalgamationError:
        return False
    return True


def with_partition(result: AmalgamationResult, blocks: frozenset[frozenset[int]],
                   B: XEStructure, C: XEStructure) -> AmalgamationResult:
    """Attach a D-coordinate partition to a K0 amalgam, checking admissibility."""
    eb, ec = _d_blocks(result, B, C)
    _check_extends(blocks, eb, ec, result.D.X)
    D = XEStructure(result.D.xs, blocks)
    return AmalgamationResult(D, Embedding(result.i_B.map, B, D, L_XE),
                              Embedding(result.i_C.map, C, D, L_XE), result.fresh_tags)
