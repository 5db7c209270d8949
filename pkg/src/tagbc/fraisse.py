"""Finite chains approximating the generic limit of the class K.

A chain stores only its final stage together with the dimension of every
stage.  Every growth step amalgamates the current final stage (as ``B``) with
a small structure, and ``B``'s standard basis always comes first in the
result, so stage ``i`` is the substructure generated by the first
``dims[i]`` coordinate vectors and every inclusion is the identity on ints.

Scheduling works in rounds.  At the start of a round, extension problems are
posed against the current stage: for every copy ``Y`` of size ``< bound``
and every catalog type ``T`` of dimension ``<= bound`` properly extending it.
Each problem must then be witnessed by a copy of ``T`` over ``Y`` whose
remaining points are new in this round.  A step adds one point ``z`` that
can witness several problems at once on disjoint bases; problems that cannot
be served that way are realized directly by amalgamation.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache

from .amalgam import AmalgamationProblem, amalgamate_k, amalgamate_k0, with_partition
from .f2core import F2LinearMap, F2Subspace, map_from_basis, rref, span_elements
from .tagged import (
    L_XE,
    Embedding,
    TaggedStructure,
    XEStructure,
    XStructure,
    as_xe,
    family,
    find_embeddings,
    generated_substructure,
    in_x_coordinates,
    is_embedding,
    k_catalog,
    _permute_bits,
    validate_k,
    validate_k0,
)

DEFAULT_MAX_STAGE_DIM = 22
DEFAULT_MAX_STAGES = 500
MAX_PACK_SUPPORT = 10  # largest union of bases served by one new point


class ChainError(ValueError):
    pass


@lru_cache(maxsize=None)
def catalog(max_dim: int) -> tuple[XEStructure, ...]:
    return tuple(k_catalog(max_dim))


@dataclass(frozen=True)
class ExtensionProblem:
    A: XEStructure
    A_prime: XEStructure
    inclusion: Embedding  # A -> A_prime, tags up to renaming


@dataclass
class PosedProblem:
    pid: int
    round: int
    stage: int                  # index of the round-start stage
    copy: tuple[int, ...]       # the copy of A: X-elements of that stage
    type_index: int             # position of A_prime in the catalog
    images: tuple[int, ...]     # images in A_prime of ``copy`` (aligned)

    def problem(self, chain: Chain) -> ExtensionProblem:
        A = generated_substructure(chain.final, self.copy)
        T = chain.types[self.type_index]
        m = map_from_basis([1 << i for i in range(len(self.copy))], list(self.images), A.dim, T.dim)
        return ExtensionProblem(A, T, Embedding(m, A, T, L_XE))


@dataclass
class LogEntry:
    pid: int
    stage_i: int
    copy: tuple[int, ...]
    type_index: int
    stage_j: int
    witness: tuple[int, ...]    # images of the type's sorted X-basis in stage j


@dataclass
class RichnessReport:
    bound: int
    bad_entries: list[int] = field(default_factory=list)
    unwitnessed: list[int] = field(default_factory=list)
    missing_types: list[tuple] = field(default_factory=list)
    incomplete: bool = False

    @property
    def unsatisfied(self) -> list:
        return ([("log", i) for i in self.bad_entries] + [("problem", p) for p in self.unwitnessed]
                + [("type", t) for t in self.missing_types])

    @property
    def ok(self) -> bool:
        return not self.unsatisfied


@dataclass
class Chain:
    final: XEStructure
    dims: list[int]
    bound: int = 0
    seed: int = 0
    log: list[LogEntry] = field(default_factory=list)
    problems: list[PosedProblem] = field(default_factory=list)
    rounds: list[int] = field(default_factory=list)   # round-start stage indices
    incomplete: str | None = None

    @classmethod
    def empty(cls, bound: int = 0, seed: int = 0) -> Chain:
        S = XEStructure.build(0)
        return cls(S, [0], bound, seed)

    @property
    def types(self) -> tuple[XEStructure, ...]:
        return catalog(min(max(self.bound, 0), 3))

    def __len__(self) -> int:
        return len(self.dims)

    def stage(self, i: int) -> XEStructure:
        d = self.dims[i]
        if d == self.final.dim:
            return self.final
        return generated_substructure(self.final, [1 << j for j in range(d)])

    @property
    def stages(self) -> list[XEStructure]:
        return [self.stage(i) for i in range(len(self.dims))]

    def inclusion(self, i: int) -> Embedding:
        a, b = self.stage(i), self.stage(i + 1)
        return Embedding(F2LinearMap.inclusion(a.dim, b.dim), a, b, L_XE)

    @property
    def inclusions(self) -> list[Embedding]:
        return [self.inclusion(i) for i in range(len(self.dims) - 1)]

    def append(self, D: XEStructure) -> None:
        if D.dim < self.final.dim:
            raise ChainError("stages must not shrink")
        self.final = D
        self.dims.append(D.dim)

    def truncate(self, i: int) -> Chain:
        """The chain made of stages ``0..i`` with the log restricted accordingly."""
        out = Chain(self.stage(i), self.dims[: i + 1], self.bound, self.seed,
                    [e for e in self.log if e.stage_j <= i],
                    [p for p in self.problems if p.stage <= i],
                    [r for r in self.rounds if r <= i], self.incomplete)
        return out


def classes_count(stage: XEStructure) -> int:
    return len(stage.E)


# ---------------------------------------------------------------- problems

def _marked_key(T: XEStructure, images: tuple[int, ...]) -> tuple:
    fam, E = in_x_coordinates(T)
    best = None
    for perm in itertools.permutations(range(T.dim)):
        key = (tuple(sorted(tuple(sorted(_permute_bits(v, perm) for v in s)) for s in fam)),
               tuple(sorted(tuple(sorted(_permute_bits(x, perm) for x in b)) for b in E)),
               tuple(_permute_bits(v, perm) for v in images))
        if best is None or key < best:
            best = key
    return best


def literal_assignment(T: XEStructure, G: XEStructure, emb_images: list[int]):
    """Name the tags of ``T`` with the literal indices of ``G``.

    ``emb_images`` sends ``G``'s coordinate vectors into ``T``.  Returns
    ``(assign, fresh)`` where ``assign`` maps each index of ``G`` to the member
    of ``T``'s family it must become and ``fresh`` lists the members that meet
    the image trivially, or ``None`` when ``G``'s indices cannot be matched.
    """
    m = map_from_basis([1 << i for i in range(G.dim)], emb_images, G.dim, T.dim)
    if not is_embedding(m, G, T, L_XE, reindex=True):
        return None
    V = set(span_elements(rref(emb_images)))
    by_w: dict[frozenset, list[frozenset]] = {}
    fresh = []
    for M in sorted(family(T), key=lambda s: (len(s), sorted(s))):
        R = frozenset(M & V)
        if len(R) == 1:
            fresh.append(M)
        else:
            by_w.setdefault(R, []).append(M)
    idx_by_w: dict[frozenset, list[int]] = {}
    for n, U in G.tags.items():
        W = frozenset(m.apply_int(v) for v in span_elements(U.rows))
        idx_by_w.setdefault(W, []).append(n)
    if set(idx_by_w) != set(by_w):
        return None
    assign = {}
    for W, members in by_w.items():
        idx = sorted(idx_by_w[W])
        if len(idx) < len(members):
            return None
        rest = W if W in members else members[0]
        for i, n in enumerate(idx):
            assign[n] = members[i] if i < len(members) else rest
    return assign, fresh


def pose_problems(chain: Chain, bound: int, round_no: int) -> list[PosedProblem]:
    S = chain.final
    si = len(chain.dims) - 1
    types = [(i, T) for i, T in enumerate(chain.types) if T.dim <= bound]
    out = []
    for k in range(0, bound):
        for Y in itertools.combinations(S.X_sorted, k):
            A = generated_substructure(S, Y)
            for ti, T in types:
                if T.dim <= k:
                    continue
                seen = set()
                for emb in find_embeddings(A, T, L_XE, reindex=True):
                    imgs = tuple(emb(1 << i) for i in range(k))
                    key = _marked_key(T, imgs)
                    if key in seen:
                        continue
                    seen.add(key)
                    if literal_assignment(T, A, list(imgs)) is None:
                        continue
                    out.append(PosedProblem(len(chain.problems) + len(out), round_no, si, Y, ti, imgs))
    return out


# ---------------------------------------------------------------- one-point designs

@dataclass
class _Design:
    prob: PosedProblem
    base: tuple[int, ...]        # stage X-elements, sorted
    beta: dict[int, int]         # base element -> T basis vector
    c: int                       # T basis vector played by the new point
    assign: dict[int, frozenset]
    fresh: list[frozenset]
    join: int | None             # block id z must join, or None
    avoid: frozenset[int]        # block ids z must stay out of


def _designs(S: XEStructure, T: XEStructure, prob: PosedProblem, new_elems: list[int], cache: dict):
    fixed = dict(zip(prob.copy, prob.images))
    extra = T.dim - 1 - len(prob.copy)
    if extra < 0:
        return
    pool = [x for x in new_elems if x not in fixed]
    for W in itertools.combinations(pool, extra):
        base = tuple(sorted(prob.copy + W))
        G = cache.get(base)
        if G is None:
            G = cache[base] = generated_substructure(S, base)
        free_t = [t for t in T.X_sorted if t not in fixed.values()]
        for c in free_t:
            rest = [t for t in free_t if t != c]
            for perm in itertools.permutations(rest):
                beta = dict(fixed)
                beta.update(zip(W, perm))
                emb = [beta[b] for b in base]
                got = literal_assignment(T, G, emb)
                if got is None:
                    continue
                assign, fresh = got
                mates = {S.block_id(b) for b in base if T.equivalent(beta[b], c)}
                if len(mates) > 1:
                    continue
                join = next(iter(mates)) if mates else None
                avoid = frozenset(S.block_id(b) for b in base) if join is None else frozenset()
                yield _Design(prob, base, beta, c, assign, fresh, join, avoid)


def _t_to_c(design: _Design, coord: dict[int, int], z: int, T: XEStructure):
    basis = list(T.X_sorted)
    inv = {t: b for b, t in design.beta.items()}
    imgs = [z if t == design.c else coord[inv[t]] for t in basis]
    return map_from_basis(basis, imgs, T.dim, z.bit_length())


def _build_c(S: XEStructure, designs: list[_Design], types, join_block: int | None, fresh_start: int):
    U = sorted(set().union(*(d.base for d in designs))) if designs else []
    G = generated_substructure(S, U)
    k = len(U)
    z = 1 << k
    coord = {u: 1 << i for i, u in enumerate(U)}
    gens: dict[int, list[int]] = {n: list(Ut.rows) for n, Ut in G.tags.items()}
    nxt = fresh_start
    maps = []
    for d in designs:
        T = types[d.prob.type_index]
        m = _t_to_c(d, coord, z, T)
        maps.append(m)
        for n, M in d.assign.items():
            gens[n].extend(m.apply_int(v) for v in M)
        for M in d.fresh:
            gens[nxt] = [m.apply_int(v) for v in M]
            nxt += 1
    tags = {n: F2Subspace(k + 1, rref(g)) for n, g in gens.items()}
    covered = {v for Ut in tags.values() for v in span_elements(Ut.rows)}
    for v in range(z + 1, 2 * z):
        if v not in covered:
            tags[nxt] = F2Subspace(k + 1, (v,))
            nxt += 1
    blocks = [set(coord[x] for x in b if x in coord) for b in S.E]
    blocks = [b for b in blocks if b]
    placed = False
    if join_block is not None:
        for b, orig in zip(blocks, [b for b in S.E if any(x in coord for x in b)]):
            if min(orig) == join_block:
                b.add(z)
                placed = True
    if not placed:
        blocks.append({z})
    C = XEStructure.build(k + 1, tags, [1 << i for i in range(k + 1)], blocks)
    return U, G, C, maps


def _c_ok(G: XEStructure, C: XEStructure, designs, maps, types) -> bool:
    if not validate_k(C).ok:
        return False
    inc = F2LinearMap.inclusion(G.dim, C.dim)
    if not is_embedding(inc, G, C, L_XE):
        return False
    for d, m in zip(designs, maps):
        if not is_embedding(m, types[d.prob.type_index], C, L_XE, reindex=True):
            return False
    return True


def _witness_ok(chain: Chain, entry: LogEntry, labels_of=None) -> bool:
    S = chain.final
    T = chain.types[entry.type_index]
    if entry.stage_j >= len(chain.dims) or entry.stage_i > entry.stage_j:
        return False
    dj, di = chain.dims[entry.stage_j], chain.dims[entry.stage_i]
    w = entry.witness
    if len(w) != T.dim or any(not (0 < x < 1 << dj) or x & (x - 1) for x in w):
        return False
    m = map_from_basis(list(T.X_sorted), list(w), T.dim, S.dim)
    if not is_embedding(m, T, S, L_XE, reindex=True):
        return False
    prob = chain.problems[entry.pid]
    if prob.copy != entry.copy or prob.type_index != entry.type_index:
        return False
    pos = {t: i for i, t in enumerate(T.X_sorted)}
    copy_hit = set()
    for y, t in zip(prob.copy, prob.images):
        if y >= 1 << di or w[pos[t]] != y:
            return False
        copy_hit.add(pos[t])
    # every other witness point is new relative to the posing stage
    return all(w[i] >= 1 << di for i in range(T.dim) if i not in copy_hit)


# ---------------------------------------------------------------- building

def _grow_direct(chain: Chain, prob: PosedProblem) -> LogEntry:
    S = chain.final
    T = chain.types[prob.type_index]
    G = generated_substructure(S, prob.copy)
    got = literal_assignment(T, G, list(prob.images))
    assert got is not None
    assign, fresh = got
    gens: dict[int, list[int]] = {n: sorted(M) for n, M in assign.items()}
    nxt = S.base.max_index + 1
    for M in fresh:
        gens[nxt] = sorted(M)
        nxt += 1
    C = XEStructure.build(T.dim, {n: F2Subspace(T.dim, rref(g)) for n, g in gens.items()}, T.X, T.E)
    e_C = Embedding(map_from_basis([1 << i for i in range(G.dim)], list(prob.images), G.dim, T.dim), G, C)
    e_B = Embedding(F2LinearMap(G.dim, S.dim, tuple(prob.copy)), G, S)
    res = amalgamate_k(AmalgamationProblem(G, S, C, e_B, e_C))
    chain.append(res.D)
    w = tuple(res.i_C(t) for t in T.X_sorted)
    return LogEntry(prob.pid, prob.stage, prob.copy, prob.type_index, len(chain.dims) - 1, w)


def _plan_step(S: XEStructure, pending: list[PosedProblem], types, new_elems: list[int]):
    cache: dict = {}
    cands: dict[int, list[_Design]] = {}
    for p in pending:
        cands[p.pid] = list(itertools.islice(_designs(S, types[p.type_index], p, new_elems, cache), 60))
    options: list[int | None] = [None] + [min(b) for b in S.blocks_sorted]
    best = None
    for opt in options:
        chosen, used = [], set()
        for p in pending:
            for d in cands[p.pid]:
                if used & set(d.base):
                    continue
                if (d.join is not None and d.join != opt) or (d.join is None and opt in d.avoid):
                    continue
                if len(used | set(d.base)) > MAX_PACK_SUPPORT:
                    continue
                chosen.append(d)
                used |= set(d.base)
                break
        if best is None or len(chosen) > len(best[1]):
            best = (opt, chosen)
    return best


def _grow_packed(chain: Chain, opt: int | None, chosen: list[_Design]) -> list[LogEntry]:
    S = chain.final
    types = chain.types
    fresh_start = S.base.max_index + 1
    accepted: list[_Design] = []
    for d in chosen:
        trial = accepted + [d]
        U, G, C, maps = _build_c(S, trial, types, opt, fresh_start)
        if _c_ok(G, C, trial, maps, types):
            accepted = trial
    if not accepted:
        return []
    U, G, C, maps = _build_c(S, accepted, types, opt, fresh_start)
    e_B = Embedding(F2LinearMap(G.dim, S.dim, tuple(U)), G, S)
    e_C = Embedding(F2LinearMap.inclusion(G.dim, C.dim), G, C)
    prob = AmalgamationProblem(G, S, C, e_B, e_C)
    res0 = amalgamate_k0(prob, check=False)
    z = 1 << S.dim
    blocks = []
    placed = False
    for b in S.E:
        if opt is not None and min(b) == opt:
            blocks.append(frozenset(b | {z}))
            placed = True
        else:
            blocks.append(b)
    if not placed:
        blocks.append(frozenset([z]))
    res = with_partition(res0, frozenset(blocks), S, C)
    chain.append(res.D)
    out = []
    for d, m in zip(accepted, maps):
        T = types[d.prob.type_index]
        w = tuple(res.i_C(m.apply_int(t)) for t in T.X_sorted)
        out.append(LogEntry(d.prob.pid, d.prob.stage, d.prob.copy, d.prob.type_index, len(chain.dims) - 1, w))
    return out


def build_chain(bound: int, steps: int, seed: int = 0, max_dim: int = DEFAULT_MAX_STAGE_DIM,
                max_stages: int = DEFAULT_MAX_STAGES) -> Chain:
    """Grow a chain for ``steps`` scheduler rounds, witnessing every posed problem.

    Hitting ``max_dim`` or ``max_stages`` stops the build and sets
    ``chain.incomplete`` to a description of the limit reached.
    """
    if bound < 0 or steps < 0:
        raise ValueError("bound and steps must be nonnegative")
    if bound > 3:
        raise ValueError("extension problems are catalogued up to dimension 3")
    chain = Chain.empty(bound, seed)
    rng = random.Random(seed)
    types = chain.types
    for r in range(steps):
        start = len(chain.dims) - 1
        chain.rounds.append(start)
        posed = pose_problems(chain, bound, r)
        chain.problems.extend(posed)
        pending = list(posed)
        rng.shuffle(pending)
        while pending:
            S = chain.final
            new_elems = [1 << j for j in range(chain.dims[start], S.dim)]
            plan = _plan_step(S, pending, types, new_elems)
            if len(chain.dims) >= max_stages:
                chain.incomplete = f"stage limit {max_stages} reached in round {r}"
                return chain
            entries = []
            if plan and plan[1]:
                if S.dim + 1 > max_dim:
                    chain.incomplete = f"dimension limit {max_dim} reached in round {r}"
                    return chain
                entries = _grow_packed(chain, *plan)
            if not entries:
                T = types[pending[0].type_index]
                if S.dim + T.dim - len(pending[0].copy) > max_dim:
                    chain.incomplete = f"dimension limit {max_dim} reached in round {r}"
                    return chain
                entries = [_grow_direct(chain, pending[0])]
            done = {e.pid for e in entries}
            chain.log.extend(entries)
            pending = [p for p in pending if p.pid not in done]
    return chain


# ---------------------------------------------------------------- certification

def check_richness(chain: Chain, bound: int | None = None) -> RichnessReport:
    """Re-verify the log, find posed problems without a witness, and check
    that every catalog type of dimension ``<= bound`` embeds in the final stage."""
    bound = chain.bound if bound is None else bound
    rep = RichnessReport(bound, incomplete=chain.incomplete is not None)
    if bound <= 0:
        return rep
    witnessed = set()
    for i, e in enumerate(chain.log):
        if e.pid < len(chain.problems) and _witness_ok(chain, e):
            witnessed.add(e.pid)
        else:
            rep.bad_entries.append(i)
    for p in chain.problems:
        if p.pid not in witnessed and chain.types[p.type_index].dim <= bound:
            rep.unwitnessed.append(p.pid)
    for T in catalog(min(bound, 3)):
        if not find_embeddings(T, chain.final, L_XE, reindex=True, limit=1):
            fam, E = in_x_coordinates(T)
            rep.missing_types.append((T.dim, tuple(sorted(tuple(sorted(s)) for s in fam)),
                                      tuple(sorted(tuple(sorted(b)) for b in E))))
    return rep


def embed_fixing(chain: Chain, D: XEStructure, e_FD: Embedding, f_anchor: Embedding,
                 e_star=None) -> tuple[Chain, Embedding]:
    """Embed ``D`` into the final stage over ``F``, growing the chain if needed.

    ``e_FD : F -> D`` and ``f_anchor : F -> final``; the returned embedding
    restricted to ``F`` equals ``f_anchor``.  ``e_star`` (side-labelled blocks,
    ``"B"`` for the final stage and ``"C"`` for ``D``) overrides the free
    extension.
    """
    F = e_FD.source
    if not is_embedding(e_FD.map, F, D, L_XE):
        raise ChainError("F is not a substructure of D")
    S = chain.final
    if not is_embedding(f_anchor.map, F, S, L_XE):
        raise ChainError("anchor is not an embedding into the final stage")
    if D.dim == F.dim:
        inv = map_from_basis([e_FD(1 << i) for i in range(F.dim)],
                             [f_anchor(1 << i) for i in range(F.dim)], D.dim, S.dim)
        return chain, Embedding(inv, D, S, L_XE)
    prob = AmalgamationProblem(F, S, D, f_anchor, e_FD)
    res = amalgamate_k(prob, e_star, check=False)
    chain.append(res.D)
    return chain, Embedding(res.i_C.map, D, res.D, L_XE)
