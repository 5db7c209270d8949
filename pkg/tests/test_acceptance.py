"""Acceptance criteria 1-10. Each test records one pass/fail line."""

import itertools
import random
import time

import pytest

from tagbc import formats as fmt
from tagbc import generators as gen
from tagbc.engine import EngineParams, build_engine, claim1_check
from tagbc.fraisse import build_chain, classes_count
from tagbc.graphcodec import graph_catalog
from tagbc.report import VerificationReport
from tagbc.suites import (
    amalgam_suite,
    claim2_suite,
    equivariance_suite,
    k_amalgam_suite,
    lifting_suite,
    reduction_suite,
    roundtrip_suite,
)

SMALL_PARAMS = [(n, m0, m1) for n in range(1, 5) for m0 in (1, 2) for m1 in (1, 2)]


def test_c01_amalgamation_closure(record_criterion):
    t = time.perf_counter()
    rep = amalgam_suite(count=1000, seed=0, max_dim=8)
    dt = time.perf_counter() - t
    c = rep.counts()
    ok = rep.ok and c["pass"] == 1000 and dt < 60
    record_criterion(1, ok, f"{c['pass']}/1000 valid amalgams in {dt:.1f}s")
    assert ok, rep.failures[:5]


def test_c02_strong_amalgamation_with_partitions(record_criterion):
    rep = k_amalgam_suite(count=200, seed=0, coarsenings=10)
    c = rep.counts()
    ok = rep.ok and c["pass"] == 200
    record_criterion(2, ok, f"{c['pass']}/200 problems: admissible E* valid, inadmissible rejected")
    assert ok, rep.failures[:5]


def test_c03_classes_grow(record_criterion):
    reached = {}
    for k in (5, 10, 20):
        ch = build_chain(1, k, seed=0)
        reached[k] = classes_count(ch.final)
    ok = all(reached[k] >= k for k in reached)
    record_criterion(3, ok, "classes " + ", ".join(f"k={k}: {v}" for k, v in reached.items()))
    assert ok


def test_c04_back_and_forth_closure(record_criterion):
    rep = lifting_suite(count=100, seed=0)
    c = rep.counts()
    ok = rep.ok and c["pass"] == 100
    record_criterion(4, ok, f"{c['pass']}/100 one-step extensions tracked and conservative")
    assert ok, rep.failures[:5]


def test_c05_unique_preimages(record_criterion):
    bad, cases, both = [], 0, 0
    for n, m0, m1 in SMALL_PARAMS:
        rep = claim1_check(build_engine(EngineParams(n, m0, m1)))
        cases += len(rep.cases)
        both += rep.params["method"] == "both"
        bad += [(n, m0, m1, cid) for cid, _, _ in rep.failures]
    ok = not bad
    record_criterion(5, ok, f"{cases} points over {len(SMALL_PARAMS)} engines, "
                            f"{both} engines cross-checked by enumeration, {len(bad)} failures")
    assert ok, bad[:5]


def test_c06_sigma_lifts(record_criterion):
    bad, count = [], 0
    for n, m0, m1 in SMALL_PARAMS:
        rep = claim2_suite(n, m0, m1)
        count += len(rep.cases)
        bad += [(n, m0, m1, cid, det) for cid, _, det in rep.failures]
    ok = not bad and count == sum(len(list(itertools.permutations(range(n)))) for n, _, _ in SMALL_PARAMS)
    record_criterion(6, ok, f"{count} lifts verified, {len(bad)} failures")
    assert ok, bad[:5]


def test_c07_reduction_iff(record_criterion):
    assert len(graph_catalog(4)) == 11
    t = time.perf_counter()
    rep = reduction_suite(max_n=4, m0=1, m1=1)
    dt = time.perf_counter() - t
    c = rep.counts()
    ok = rep.ok and c["pass"] == 121 and dt < 60
    record_criterion(7, ok, f"{c['pass']}/121 ordered pairs agree in {dt:.1f}s")
    assert ok, rep.failures[:5]


def test_c08_roundtrip(record_criterion):
    assert [len(graph_catalog(n)) for n in range(1, 6)] == [1, 2, 4, 11, 34]
    rep = roundtrip_suite(max_n=5, params=((1, 1), (2, 1), (1, 2)))
    c = rep.counts()
    ok = rep.ok and c["pass"] == 3 * (1 + 2 + 4 + 11 + 34)
    record_criterion(8, ok, f"{c['pass']} decode(encode(G)) == G over n=1..5 and 3 parameter pairs")
    assert ok, rep.failures[:5]


def test_c09_equivariance(record_criterion):
    rep = equivariance_suite(n=4)
    c = rep.counts()
    ok = rep.ok and c["pass"] > 0
    record_criterion(9, ok, f"{c['pass']} (relabelling, isomorphism) cases transported exactly")
    assert ok, rep.failures[:5]


def _emit_engine(e):
    return fmt.emit_engine(e, full=e.dim <= 20)


SERIALIZABLE = [
    ("subspace", gen.random_subspace, fmt.emit_subspace, fmt.parse_subspace, True),
    ("map", gen.random_map, fmt.emit_map, fmt.parse_map, True),
    ("tagged", lambda r: gen.random_k_structure(r, r.randint(0, 7)), fmt.emit_tagged, fmt.parse_tagged, True),
    ("graph", gen.random_graph, fmt.emit_graph, fmt.parse_graph, True),
    ("engine", lambda r: build_engine(gen.random_engine_params(r)), _emit_engine, fmt.parse_engine, False),
    ("coded", gen.random_coded, fmt.emit_coded, fmt.parse_coded, False),
    ("tracked", gen.random_tracked, lambda t: fmt.emit_tracked(*t), fmt.parse_tracked, True),
    ("chain", gen.random_chain, fmt.emit_chain, fmt.parse_chain, True),
    ("report", gen.random_report, lambda r: r.render(), VerificationReport.parse, False),
]


def test_c10_serialization(record_criterion):
    summary = []
    bad = []
    for name, make, emit, parse, compare in SERIALIZABLE:
        rng = random.Random(sum(map(ord, name)))
        fails = 0
        for _ in range(500):
            value = make(rng)
            text = emit(value)
            back = parse(text)
            if emit(back) != text or (compare and back != value):
                fails += 1
        summary.append(f"{name} {500 - fails}/500")
        if fails:
            bad.append(name)
    ok = not bad
    record_criterion(10, ok, ", ".join(summary))
    assert ok, bad
