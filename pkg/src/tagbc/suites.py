"""Verification suites behind ``tagbc verify``."""

from __future__ import annotations

import itertools
import random

from .amalgam import AmalgamationError, amalgamate_k0, with_partition
from .engine import EngineParams, build_engine, claim1_check, sigma_lift, verify_sigma
from .fraisse import build_chain, check_richness, classes_count
from .generators import admissible_coarsenings, inadmissible_partition, random_lift_case, random_problem
from .graphcodec import (
    all_graph_isos,
    apply_sigma,
    decode,
    encode,
    graph_catalog,
    reduction_experiment,
    transport,
)
from .lifting import extend_one_step, is_in_Fh
from .report import VerificationReport
from .tagged import as_xe, validate_k, validate_k0


def amalgam_suite(count: int = 1000, seed: int = 0, max_dim: int = 8) -> VerificationReport:
    rep = VerificationReport("amalgam", params={"count": count, "seed": seed, "max_dim": max_dim})
    rng = random.Random(seed)
    for i in range(count):
        p = random_problem(rng, max_dim)
        r = amalgamate_k0(p)
        XD = {r.i_B(x) for x in p.B.X} | {r.i_C(x) for x in p.C.X}
        square = all(r.i_B(p.e_B(1 << j)) == r.i_C(p.e_C(1 << j)) for j in range(p.A.dim))
        ok = validate_k0(r.D).ok and XD == set(r.D.X) and square
        rep.add(f"p{i}", ok, f"dim D={r.D.dim}")
    return rep


def k_amalgam_suite(count: int = 200, seed: int = 0, coarsenings: int = 10) -> VerificationReport:
    rep = VerificationReport("k-amalgam", params={"count": count, "seed": seed})
    rng = random.Random(seed)
    for i in range(count):
        p = random_problem(rng, 8)
        r0 = amalgamate_k0(p)
        B, C = as_xe(p.B), as_xe(p.C)
        good = all(validate_k(with_partition(r0, E, B, C).D).ok
                   for E in admissible_coarsenings(rng, r0, B, C, coarsenings))
        bad = inadmissible_partition(rng, r0, B)
        rejected = True
        if bad is not None:
            try:
                with_partition(r0, bad, B, C)
                rejected = False
            except AmalgamationError:
                pass
        rep.add(f"p{i}", good and rejected)
    return rep


def chain_suite(bound: int = 2, steps: int = 2, seed: int = 0) -> VerificationReport:
    rep = VerificationReport("chain", params={"bound": bound, "steps": steps, "seed": seed})
    ch = build_chain(bound, steps, seed)
    rich = check_richness(ch, bound)
    rep.add("complete", ch.incomplete is None, ch.incomplete or "")
    rep.add("log", not rich.bad_entries, f"{len(ch.log)} entries")
    rep.add("problems", not rich.unwitnessed, f"{len(ch.problems)} posed")
    rep.add("age", not rich.missing_types, f"missing {len(rich.missing_types)}")
    counts = [classes_count(ch.stage(i)) for i in range(len(ch.dims))]
    rep.add("monotone", counts == sorted(counts), f"classes {counts[-1]}")
    rep.add("stages-valid", all(validate_k(ch.stage(i)).ok for i in range(len(ch.dims))))
    return rep


def lifting_suite(count: int = 100, seed: int = 0) -> VerificationReport:
    rep = VerificationReport("lifting", params={"count": count, "seed": seed})
    rng = random.Random(seed)
    for i in range(count):
        case = random_lift_case(rng)
        f2, ch = extend_one_step(case.f, case.A_prime, case.chain)
        conservative = all(f2.as_dict()[x] == y for x, y in case.f.as_dict().items())
        ok = is_in_Fh(f2, ch) and conservative and tuple(f2.domain) == case.A_prime
        rep.add(f"c{i}", ok, f"|dom|={len(f2.domain)}")
    return rep


def claim1_suite(n: int, m0: int = 1, m1: int = 1) -> VerificationReport:
    return claim1_check(build_engine(EngineParams(n, m0, m1)))


def claim2_suite(n: int, m0: int = 1, m1: int = 1) -> VerificationReport:
    eng = build_engine(EngineParams(n, m0, m1))
    rep = VerificationReport("claim2", params={"n": n, "m0": m0, "m1": m1})
    for h in itertools.permutations(range(n)):
        sub = verify_sigma(eng, sigma_lift(eng, h))
        bad = [c[0] for c in sub.failures]
        rep.add("h=" + "".join(map(str, h)), not bad, ",".join(bad))
    return rep


def reduction_suite(max_n: int = 4, m0: int = 1, m1: int = 1) -> VerificationReport:
    return reduction_experiment(max_n, m0, m1)


def roundtrip_suite(max_n: int = 5, params=((1, 1), (2, 1), (1, 2))) -> VerificationReport:
    rep = VerificationReport("roundtrip", params={"max_n": max_n})
    for n in range(1, max_n + 1):
        for gi, G in enumerate(graph_catalog(n)):
            for m0, m1 in params:
                rep.add(f"n{n}g{gi}m{m0}{m1}", decode(encode(G, EngineParams(n, m0, m1))) == G)
    return rep


def equivariance_suite(n: int = 4, m0: int = 1, m1: int = 1) -> VerificationReport:
    """Every relabelling of every catalog graph: transport and decode agree with the relabelling."""
    rep = VerificationReport("equivariance", params={"n": n, "m0": m0, "m1": m1})
    eng = build_engine(EngineParams(n, m0, m1))
    for gi, G in enumerate(graph_catalog(n)):
        for perm in itertools.permutations(range(n)):
            H = G.relabel(perm)
            for h in all_graph_isos(G, H):
                cg, ch = encode(G, eng), encode(H, eng)
                sigma, audit = transport(h, cg, ch)
                ok = audit.ok and decode(apply_sigma(cg, sigma)) == G.relabel(h)
                rep.add(f"g{gi}p{''.join(map(str, perm))}h{''.join(map(str, h))}", ok)
    return rep
