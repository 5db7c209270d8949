"""Seeded random instances for property checks and verification suites."""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass

from .amalgam import AmalgamationProblem, AmalgamationResult, amalgamate_k0, free_extension
from .f2core import F2LinearMap, F2Subspace, intersect, rref, span_elements
from .engine import EngineParams
from .fraisse import Chain, LogEntry, PosedProblem, build_chain
from .graphcodec import CodedStructure, Graph, encode
from .lifting import ClassBijection, TrackedPartialIso, lift_over
from .report import VerificationReport
from .tagged import (
    L_XE,
    Embedding,
    TaggedStructure,
    XEStructure,
    XStructure,
    generated_substructure,
    validate_k,
)


def _avoids_units(rows, dim) -> bool:
    return not any(v & (v - 1) == 0 and v for v in span_elements(rows))


def random_partition(rng: random.Random, items) -> list[list[int]]:
    blocks: list[list[int]] = []
    for x in items:
        j = rng.randrange(len(blocks) + 1)
        if j == len(blocks):
            blocks.append([x])
        else:
            blocks[j].append(x)
    return blocks


def _fill_singletons(rng, dim, tags, index_pool):
    covered = {v for U in tags.values() for v in span_elements(U.rows)}
    units = {1 << i for i in range(dim)}
    free = [n for n in index_pool if n not in tags]
    rng.shuffle(free)
    for v in range(1, 1 << dim):
        if v not in covered and v not in units:
            n = free.pop() if free else max(list(tags) + list(index_pool)) + 1
            tags[n] = F2Subspace(dim, (v,))
            covered.add(v)


def random_k_structure(rng: random.Random, dim: int, index_pool=range(12), max_tags: int = 3) -> XEStructure:
    """Standard-basis X, a few random named subgroups, singleton tags elsewhere."""
    tags: dict[int, F2Subspace] = {}
    pool = list(index_pool)
    for _ in range(rng.randrange(max_tags + 1)):
        if dim < 2:
            break
        gens = [rng.randrange(1, 1 << dim) for _ in range(rng.randint(1, max(1, dim - 1)))]
        rows = rref(gens)
        if rows and _avoids_units(rows, dim):
            n = rng.choice(pool)
            if n not in tags:
                tags[n] = F2Subspace(dim, rows)
    _fill_singletons(rng, dim, tags, pool)
    X = [1 << i for i in range(dim)]
    return XEStructure.build(dim, tags, X, random_partition(rng, X))


def random_extension(rng: random.Random, A: XEStructure, extra: int, index_pool=range(12),
                     tries: int = 50) -> XEStructure:
    """A K-structure on ``A.dim + extra`` coordinates whose first ``A.dim`` span ``A`` literally."""
    a = A.dim
    d = a + extra
    low = F2Subspace(d, tuple(reversed([1 << i for i in range(a)])))
    for _ in range(tries):
        tags: dict[int, F2Subspace] = {}
        for n, U in A.tags.items():
            gens = list(U.rows)
            if extra and rng.random() < 0.5:
                gens.append(rng.randrange(1 << a) | (rng.randrange(1, 1 << extra) << a))
            tags[n] = F2Subspace(d, rref(gens))
        for _ in range(rng.randrange(3)):
            if d < 2 or not extra:
                break
            gens = [rng.randrange(1 << a) | (rng.randrange(1, 1 << extra) << a) for _ in range(rng.randint(1, 2))]
            n = rng.choice(list(index_pool))
            if n not in tags:
                tags[n] = F2Subspace(d, rref(gens))
        if not all(_avoids_units(U.rows, d) for U in tags.values()):
            continue
        if any(intersect(U, low).rows != (A.tags[n].rows if n in A.tags else ()) for n, U in tags.items()):
            continue
        _fill_singletons_above(rng, d, a, tags, index_pool, A)
        blocks = [set(b) for b in A.E]
        for i in range(a, d):
            j = rng.randrange(len(blocks) + 1)
            if j == len(blocks):
                blocks.append({1 << i})
            else:
                blocks[j].add(1 << i)
        C = XEStructure.build(d, tags, [1 << i for i in range(d)], blocks)
        if validate_k(C).ok:
            return C
    raise RuntimeError("could not build a random extension")


def _fill_singletons_above(rng, d, a, tags, index_pool, A):
    covered = {v for U in tags.values() for v in span_elements(U.rows)}
    units = {1 << i for i in range(d)}
    used = set(tags)
    free = [n for n in index_pool if n not in used and n not in A.tags]
    rng.shuffle(free)
    nxt = max(list(used) + list(index_pool)) + 1
    for v in range(1 << a, 1 << d):
        if v not in covered and v not in units:
            if free:
                n = free.pop()
            else:
                n, nxt = nxt, nxt + 1
            tags[n] = F2Subspace(d, (v,))
            covered.add(v)


def random_problem(rng: random.Random, max_dim: int = 8) -> AmalgamationProblem:
    """A random problem ``A -> B, A -> C`` with ``dim D <= max_dim``; ``A`` sits on
    a random subset of ``X^B`` and on the first coordinates of ``C``."""
    b = rng.randint(0, max_dim)
    B = random_k_structure(rng, b)
    Y = sorted(rng.sample(sorted(B.X), rng.randint(0, b)))
    A, e_B = generated_substructure(B, Y, with_inclusion=True)
    extra = rng.randint(0, max_dim - b)
    C = random_extension(rng, A, extra)
    e_C = Embedding(F2LinearMap.inclusion(A.dim, C.dim), A, C, L_XE)
    return AmalgamationProblem(A, B, C, e_B, e_C)


def admissible_coarsenings(rng: random.Random, res: AmalgamationResult, B: XEStructure, C: XEStructure,
                           count: int = 10) -> list[frozenset[frozenset[int]]]:
    """Free extension plus random coarsenings that keep both restrictions."""
    eb = [frozenset(res.i_B(x) for x in b) for b in B.E]
    ec = [frozenset(res.i_C(x) for x in b) for b in C.E]
    free = free_extension(eb, ec)
    xb = set().union(*eb) if eb else set()
    xc = set().union(*ec) if ec else set()
    out = [free]
    for _ in range(count):
        blocks = [set(b) for b in free]
        for _ in range(rng.randint(1, 3)):
            pairs = [(i, j) for i in range(len(blocks)) for j in range(i + 1, len(blocks))
                     if not (blocks[i] & xb and blocks[j] & xb) and not (blocks[i] & xc and blocks[j] & xc)]
            if not pairs:
                break
            i, j = rng.choice(pairs)
            blocks[i] |= blocks.pop(j)
        cand = frozenset(frozenset(b) for b in blocks)
        if cand not in out:
            out.append(cand)
    return out


def inadmissible_partition(rng: random.Random, res: AmalgamationResult, B: XEStructure):
    """Merge two blocks that both meet ``X^B`` (breaks the restriction to E^B), if possible."""
    eb = [frozenset(res.i_B(x) for x in b) for b in B.E]
    if len(eb) < 2:
        return None
    blocks = [set(b) for b in free_extension(eb, [])]
    rest = set(res.D.X) - set().union(*blocks)
    blocks += [{x} for x in rest]
    meet = [i for i, b in enumerate(blocks) if b & set().union(*eb)]
    i, j = sorted(rng.sample(meet, 2))
    blocks[i] |= blocks.pop(j)
    return frozenset(frozenset(b) for b in blocks)


# ---------------------------------------------------------------- lifting cases

@dataclass
class LiftCase:
    chain: Chain
    f: TrackedPartialIso
    A_prime: tuple[int, ...]


_BASE_CHAINS: dict = {}


def base_chain(bound: int = 2, steps: int = 2) -> Chain:
    key = (bound, steps)
    if key not in _BASE_CHAINS:
        _BASE_CHAINS[key] = build_chain(bound, steps)
    return copy.deepcopy(_BASE_CHAINS[key])


def random_lift_case(rng: random.Random) -> LiftCase:
    """A random tracked map on a private copy of a small chain and a larger domain."""
    chain = base_chain()
    S = chain.final
    blocks = [min(b) for b in S.blocks_sorted]
    perm = blocks[:]
    rng.shuffle(perm)
    h = ClassBijection(dict(zip(blocks, perm)))
    dom = rng.sample(list(S.X_sorted), rng.randint(0, 2))
    f = lift_over(h, dom, chain)
    X = list(chain.final.X_sorted)
    more = rng.sample(X, rng.randint(1, 2))
    return LiftCase(chain, f, tuple(sorted(set(f.domain) | set(more))))


# ---------------------------------------------------------------- serializable values

def random_subspace(rng: random.Random, max_dim: int = 10) -> F2Subspace:
    d = rng.randint(0, max_dim)
    gens = [rng.randrange(1 << d) for _ in range(rng.randint(0, d))] if d else []
    return F2Subspace(d, rref(gens))


def random_map(rng: random.Random, max_dim: int = 8) -> F2LinearMap:
    a, b = rng.randint(0, max_dim), rng.randint(0, max_dim)
    return F2LinearMap(a, b, tuple(rng.randrange(1 << b) for _ in range(a)))


def random_graph(rng: random.Random, max_n: int = 7) -> Graph:
    n = rng.randint(0, max_n)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
    return Graph.from_edges(n, edges)


def random_engine_params(rng: random.Random, max_n: int = 3) -> EngineParams:
    return EngineParams(rng.randint(1, max_n), rng.randint(1, 2), rng.randint(1, 2))


def random_coded(rng: random.Random, max_n: int = 4) -> CodedStructure:
    p = random_engine_params(rng, max_n)
    G = Graph.from_edges(p.n, [(u, v) for u in range(p.n) for v in range(u + 1, p.n) if rng.random() < 0.5])
    return encode(G, p)


def random_tracked(rng: random.Random, max_dim: int = 10) -> tuple[TrackedPartialIso, int]:
    d = rng.randint(1, max_dim)
    dom = sorted(rng.sample(range(1 << d), rng.randint(0, min(5, 1 << d))))
    imgs = tuple(rng.randrange(1 << d) for _ in dom)
    src = rng.sample(range(1 << d), rng.randint(0, min(4, 1 << d)))
    dst = rng.sample(range(1 << d), len(src))
    return TrackedPartialIso(tuple(dom), imgs, ClassBijection(dict(zip(src, dst)))), d


def random_chain(rng: random.Random, max_dim: int = 6) -> Chain:
    """A synthetic chain: random final stage, random prefix dimensions and log lines."""
    S = random_k_structure(rng, rng.randint(0, max_dim))
    dims = sorted({0, S.dim} | {rng.randint(0, S.dim) for _ in range(rng.randint(0, 3))})
    ch = Chain(S, dims, rng.randint(0, 3), rng.randrange(1000),
               rounds=sorted(rng.sample(range(len(dims)), rng.randint(0, len(dims)))))
    if rng.random() < 0.2:
        ch.incomplete = "stage dimension cap reached"
    for pid in range(rng.randint(0, 4)):
        copy_ = tuple(sorted(rng.sample(range(8), rng.randint(0, 3))))
        ch.problems.append(PosedProblem(pid, rng.randrange(4), rng.randrange(len(dims)), copy_,
                                        rng.randrange(21), tuple(rng.randrange(64) for _ in copy_)))
        if rng.random() < 0.7:
            ch.log.append(LogEntry(pid, rng.randrange(len(dims)), copy_, rng.randrange(21),
                                   rng.randrange(len(dims)), tuple(rng.randrange(64) for _ in range(2))))
    return ch


def random_report(rng: random.Random) -> VerificationReport:
    rep = VerificationReport(rng.choice(["amalgam", "chain", "claim1"]),
                             params={"seed": rng.randrange(100), "count": rng.randrange(50)})
    for i in range(rng.randint(0, 6)):
        rep.add(f"c{i}", rng.choice([True, False, None]), rng.choice(["", "dim D=3", "x y"]))
    return rep
