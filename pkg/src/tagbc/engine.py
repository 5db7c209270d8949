"""The doubled coding structure in finite truncation.

Coordinates: ``X0`` is ``e_0 .. e_{N0-1}`` with ``N0 = n*m0``, class ``c``
owning ``c*m0 .. c*m0+m0-1``.  ``X1`` follows, one fiber of ``m1`` vectors per
unordered pair ``{x_i, x_j}`` (``i < j``, lexicographic), so ``k`` sends the
``t``-th pair sum to E1-class ``t``.

Recovery functions only look at the subspaces ``V0, V1, W0, W1`` and the
sets ``X0, X1``; they never consult the stored ``k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

from .f2core import (
    F2LinearMap,
    F2Subspace,
    F2Vector,
    bit_indices,
    check_guard,
    get_enumeration_guard,
    preimage_coset,
    preimage_set,
    projection,
    rref,
    solve_combination,
    span_elements,
)
from .report import VerificationReport
from .tagged import TaggedStructure, compute_X

V0_TAG, V1_TAG, W0_TAG, W1_TAG = 0, 1, 2, 3
MAX_ENGINE_DIM = 4096


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class EngineParams:
    n: int
    m0: int = 1
    m1: int = 1

    def __post_init__(self) -> None:
        if self.n < 1 or self.m0 < 1 or self.m1 < 1:
            raise EngineError("n, m0 and m1 must be positive")
        if self.dim > MAX_ENGINE_DIM:
            raise EngineError(f"engine dimension {self.dim} exceeds {MAX_ENGINE_DIM}")

    @property
    def n0(self) -> int:
        return self.n * self.m0

    @property
    def pairs(self) -> int:
        return self.n0 * (self.n0 - 1) // 2

    @property
    def n1(self) -> int:
        return self.pairs * self.m1

    @property
    def dim(self) -> int:
        return self.n0 + self.n1


@dataclass(frozen=True)
class RecoveryData:
    """What an isomorphism can see: two complementary blocks, two bases, two subgroups."""
    dim: int
    V0: F2Subspace
    V1: F2Subspace
    X0: frozenset[int]
    X1: frozenset[int]
    W0: F2Subspace
    W1: F2Subspace

    def permuted(self, perm: Sequence[int]) -> RecoveryData:
        """Move coordinate ``i`` to ``perm[i]``."""
        m = F2LinearMap(self.dim, self.dim, tuple(1 << p for p in perm))
        return RecoveryData(self.dim, m.image_of(self.V0), m.image_of(self.V1),
                            frozenset(m.apply_int(x) for x in self.X0), frozenset(m.apply_int(x) for x in self.X1),
                            m.image_of(self.W0), m.image_of(self.W1))


@dataclass(frozen=True)
class Engine:
    params: EngineParams

    @property
    def dim(self) -> int:
        return self.params.dim

    @cached_property
    def X0(self) -> tuple[int, ...]:
        return tuple(1 << i for i in range(self.params.n0))

    @cached_property
    def X1(self) -> tuple[int, ...]:
        n0 = self.params.n0
        return tuple(1 << (n0 + i) for i in range(self.params.n1))

    @cached_property
    def V0(self) -> F2Subspace:
        return F2Subspace(self.dim, tuple(reversed(self.X0)))

    @cached_property
    def V1(self) -> F2Subspace:
        return F2Subspace(self.dim, tuple(reversed(self.X1)))

    @cached_property
    def E0(self) -> tuple[tuple[int, ...], ...]:
        m0 = self.params.m0
        return tuple(self.X0[c * m0:(c + 1) * m0] for c in range(self.params.n))

    @cached_property
    def E1(self) -> tuple[tuple[int, ...], ...]:
        m1 = self.params.m1
        return tuple(self.X1[t * m1:(t + 1) * m1] for t in range(self.params.pairs))

    @cached_property
    def pair_list(self) -> tuple[tuple[int, int], ...]:
        """The ``t``-th unordered pair of X0 elements (as vectors)."""
        return tuple((self.X0[i], self.X0[j]) for i, j in itertools.combinations(range(self.params.n0), 2))

    @cached_property
    def k_table(self) -> dict[int, int]:
        """Pair sum ``s`` -> index of its E1-class."""
        return {x | y: t for t, (x, y) in enumerate(self.pair_list)}

    def k_star(self, x: int, y: int) -> tuple[int, ...]:
        return self.E1[self.k_table[x ^ y]]

    def class0(self, x: int) -> int:
        return (x.bit_length() - 1) // self.params.m0

    def class1(self, z: int) -> int:
        return (z.bit_length() - 1 - self.params.n0) // self.params.m1

    @cached_property
    def S0(self) -> tuple[int, ...]:
        return tuple(x | y for x, y in self.pair_list)

    @cached_property
    def T(self) -> tuple[int, ...]:
        return tuple(s ^ z for s in self.S0 for z in self.E1[self.k_table[s]])

    @cached_property
    def Q(self) -> tuple[int, ...]:
        out = []
        for t, (x, y) in enumerate(self.pair_list):
            if self.class0(x) == self.class0(y):
                out.extend(self.E1[t])
        return tuple(sorted(out))

    @cached_property
    def W0(self) -> F2Subspace:
        return F2Subspace(self.dim, rref(self.T))

    @cached_property
    def W1(self) -> F2Subspace:
        return F2Subspace(self.dim, rref(self.Q))

    def data(self) -> RecoveryData:
        return RecoveryData(self.dim, self.V0, self.V1, frozenset(self.X0), frozenset(self.X1), self.W0, self.W1)

    def check_invariants(self) -> None:
        seen = sorted(z for t in range(self.params.pairs) for z in self.E1[t])
        if seen != sorted(self.X1):
            raise EngineError("k-fibers do not partition X1")
        if self.W0.dim != len(self.T):
            raise EngineError("T is not independent")


def build_engine(params: EngineParams | None = None, *, n: int | None = None, m0: int = 1, m1: int = 1) -> Engine:
    if params is None:
        params = EngineParams(n, m0, m1)
    eng = Engine(params)
    eng.check_invariants()
    return eng


# ---------------------------------------------------------------- projection preimages

def pi1(data: RecoveryData | Engine) -> F2LinearMap:
    return projection(data.V1, data.V0)


def pi0(data: RecoveryData | Engine) -> F2LinearMap:
    return projection(data.V0, data.V1)


def claim1_check(engine: Engine, guard: int | None = None) -> VerificationReport:
    """Each ``z`` in X1 has exactly one preimage in W0 under the projection to V1, lying in T."""
    rep = VerificationReport("claim1", params={"n": engine.params.n, "m0": engine.params.m0, "m1": engine.params.m1})
    p1 = pi1(engine)
    Tset = set(engine.T)
    limit = get_enumeration_guard() if guard is None else guard
    method = "both" if engine.W0.dim <= limit else "solve"
    rep.params["method"] = method
    for i, z in enumerate(engine.X1):
        try:
            pre = preimage_set(p1, engine.W0, F2Vector(engine.dim, z), method=method, guard=guard)
        except AssertionError:
            rep.add(f"z{i}", False, "enumeration and rank methods disagree")
            continue
        ws = [w.bits for w in pre]
        ok = len(ws) == 1 and ws[0] in Tset
        rep.add(f"z{i}", ok, f"preimages={len(ws)}")
    return rep


# ---------------------------------------------------------------- lifting

@dataclass(frozen=True)
class Sigma:
    sigma0: F2LinearMap   # on V0 coordinates (dimension N0)
    sigma1: F2LinearMap   # on V1 coordinates (dimension N1)
    h: tuple[int, ...]    # h[c] = image class of E0-class c
    h1: tuple[int, ...]   # h1[t] = image class of E1-class t
    map: F2LinearMap      # the assembled total map

    def __call__(self, v: int) -> int:
        return self.map.apply_int(v)


def _as_perm(h, n: int) -> tuple[int, ...]:
    if isinstance(h, Mapping):
        h = tuple(h.get(c, -1) for c in range(n))
    elif hasattr(h, "mapping"):
        h = tuple(h.mapping.get(c, -1) for c in range(n))
    h = tuple(h)
    if len(h) != n or sorted(h) != list(range(n)):
        raise EngineError("class map must be a bijection of all E0-classes")
    return h


def assemble_sigma(engine: Engine, perm0: Sequence[int], perm1: Sequence[int],
                   h: Sequence[int] = (), h1: Sequence[int] = ()) -> Sigma:
    """Sigma from coordinate permutations of X0 and X1 (index ``i`` goes to ``perm[i]``)."""
    n0, n1 = engine.params.n0, engine.params.n1
    s0 = F2LinearMap(n0, n0, tuple(1 << p for p in perm0))
    s1 = F2LinearMap(n1, n1, tuple(1 << p for p in perm1))
    full = F2LinearMap(engine.dim, engine.dim, tuple([1 << p for p in perm0] + [1 << (n0 + p) for p in perm1]))
    return Sigma(s0, s1, tuple(h), tuple(h1), full)


def sigma_lift(engine: Engine, h) -> Sigma:
    """Lift a permutation of the E0-classes, matching elements by index order."""
    p = engine.params
    h = _as_perm(h, p.n)
    perm0 = [h[i // p.m0] * p.m0 + i % p.m0 for i in range(p.n0)]
    h1 = []
    for t, (x, y) in enumerate(engine.pair_list):
        sx, sy = 1 << perm0[x.bit_length() - 1], 1 << perm0[y.bit_length() - 1]
        h1.append(engine.k_table[sx | sy])
    perm1 = [h1[i // p.m1] * p.m1 + i % p.m1 for i in range(p.n1)]
    return assemble_sigma(engine, perm0, perm1, h, h1)


def verify_sigma(engine: Engine, sigma: Sigma) -> VerificationReport:
    rep = VerificationReport("claim2", params={"n": engine.params.n, "m0": engine.params.m0, "m1": engine.params.m1})
    s = sigma.map
    X0, X1 = set(engine.X0), set(engine.X1)
    rep.add("V0", s.image_of(engine.V0) == engine.V0)
    rep.add("V1", s.image_of(engine.V1) == engine.V1)
    rep.add("X0", {s.apply_int(x) for x in X0} == X0)
    rep.add("X1", {s.apply_int(z) for z in X1} == X1)
    rep.add("T", {s.apply_int(w) for w in engine.T} == set(engine.T))
    rep.add("Q", {s.apply_int(z) for z in engine.Q} == set(engine.Q))
    rep.add("W0", s.image_of(engine.W0) == engine.W0)
    rep.add("W1", s.image_of(engine.W1) == engine.W1)
    ok = True
    for x, y in engine.pair_list:
        want = set(engine.k_star(s.apply_int(x), s.apply_int(y))) if s.apply_int(x) in X0 and s.apply_int(y) in X0 \
            and s.apply_int(x) != s.apply_int(y) else None
        for z in engine.k_star(x, y):
            if want is None or s.apply_int(z) not in want:
                ok = False
    rep.add("i", ok, "sigma(z)/E1 = k*({sigma(x), sigma(y)})")
    blocks1 = {frozenset(b) for b in engine.E1}
    rep.add("ii", {frozenset(s.apply_int(z) for z in b) for b in engine.E1} == blocks1, "E1 blocks permuted")
    W1 = engine.W1
    rep.add("iii", {z for z in X1 if z in W1} == set(engine.Q), "W1 ∩ X1 = Q")
    Qs = set(engine.Q)
    ok = True
    for x, y in engine.pair_list:
        fib = set(engine.k_star(x, y))
        inside = fib <= Qs
        if bool(fib & Qs) != inside or inside != (engine.class0(x) == engine.class0(y)):
            ok = False
    blocks0 = {frozenset(b) for b in engine.E0}
    ok = ok and {frozenset(s.apply_int(x) for x in b) for b in engine.E0} == blocks0
    rep.add("iv", ok, "E0(x,y) iff k(x+y) ⊆ Q; E0 blocks permuted")
    return rep


# ---------------------------------------------------------------- recovery

@dataclass
class RecoveredE1:
    blocks: tuple[tuple[int, ...], ...]     # sorted by least element
    s_of: dict[int, int]                    # z -> V0-component of its W0-witness
    pair_of_block: dict[int, tuple[int, int]]   # least z of a block -> (x, y), x < y


def recover_E1(data: RecoveryData | Engine) -> RecoveredE1:
    if isinstance(data, Engine):
        data = data.data()
    p1, p0 = pi1(data), pi0(data)
    s_of = {}
    for z in sorted(data.X1):
        w, ker = preimage_coset(p1, data.W0, z)
        if w is None or ker.rows:
            raise EngineError("W0 does not have a unique preimage over some z in X1")
        s_of[z] = p0.apply_int(w)
    groups: dict[int, list[int]] = {}
    for z, s in s_of.items():
        groups.setdefault(s, []).append(z)
    x0 = sorted(data.X0)
    pair_of_block = {}
    blocks = []
    for s, zs in groups.items():
        comb = solve_combination(s, x0)
        idx = list(bit_indices(comb)) if comb is not None else []
        if len(idx) != 2:
            raise EngineError("a W0-witness is not a sum of two X0 elements")
        blocks.append(tuple(zs))
        pair_of_block[zs[0]] = (x0[idx[0]], x0[idx[1]])
    blocks.sort(key=lambda b: b[0])
    return RecoveredE1(tuple(blocks), s_of, pair_of_block)


def recover_E0(data: RecoveryData | Engine, rec1: RecoveredE1 | None = None) -> tuple[tuple[int, ...], ...]:
    if isinstance(data, Engine):
        data = data.data()
    if rec1 is None:
        rec1 = recover_E1(data)
    Q = {z for z in data.X1 if z in data.W1}
    parent = {x: x for x in data.X0}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    related = set()
    for b in rec1.blocks:
        inside = set(b) <= Q
        if not inside and set(b) & Q:
            raise EngineError("W1 ∩ X1 is not a union of E1-classes")
        if inside:
            x, y = rec1.pair_of_block[b[0]]
            related.add(frozenset((x, y)))
            parent[find(x)] = find(y)
    groups: dict[int, list[int]] = {}
    for x in sorted(data.X0):
        groups.setdefault(find(x), []).append(x)
    out = tuple(sorted((tuple(g) for g in groups.values()), key=lambda g: g[0]))
    for g in out:
        for x, y in itertools.combinations(g, 2):
            if frozenset((x, y)) not in related:
                raise EngineError("recovered E0 is not transitive")
    return out


# ---------------------------------------------------------------- export

def export_full_tagged(engine: Engine, guard: int | None = None) -> TaggedStructure:
    """Pure tagged form: V0, V1, W0, W1 at indices 0-3, then singleton tags
    for the non-X elements of each block (V0 first, ascending)."""
    check_guard(engine.dim, guard)
    tags = {V0_TAG: engine.V0, V1_TAG: engine.V1, W0_TAG: engine.W0, W1_TAG: engine.W1}
    nxt = 4
    for X in (engine.X0, engine.X1):
        Xs = set(X)
        for v in span_elements(sorted(X, reverse=True)):
            if v and v not in Xs:
                tags[nxt] = F2Subspace(engine.dim, (v,))
                nxt += 1
    return TaggedStructure(engine.dim, tags)


def singleton_block(full: TaggedStructure, block: F2Subspace) -> TaggedStructure:
    """The singleton tags of an export lying in ``block``, on block coordinates."""
    coords = sorted(block.rows)
    pos = {c: i for i, c in enumerate(coords)}
    tags = {}
    for n, U in full.tags.items():
        if n < 4:
            continue
        v = U.rows[0]
        if v in block:
            local = 0
            for b in bit_indices(v):
                if (1 << b) not in pos:
                    break
                local |= 1 << pos[1 << b]
            else:
                tags[n] = F2Subspace(len(coords), (local,))
    return TaggedStructure(len(coords), tags)


def blockwise_X(full: TaggedStructure, engine: Engine) -> tuple[frozenset[int], frozenset[int]]:
    """``compute_X`` on each block of an export, mapped back to ambient vectors."""
    out = []
    for block in (engine.V0, engine.V1):
        coords = sorted(block.rows)
        loc = compute_X(singleton_block(full, block))
        out.append(frozenset(sum(coords[i] for i in bit_indices(v)) for v in loc))
    return out[0], out[1]
