import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tagbc import generators as gen
from tagbc.engine import EngineParams, build_engine
from tagbc.f2core import F2LinearMap, F2Subspace
from tagbc.formats import (
    ParseError,
    emit_chain,
    emit_coded,
    emit_engine,
    emit_graph,
    emit_map,
    emit_subspace,
    emit_tagged,
    emit_tracked,
    parse_chain,
    parse_coded,
    parse_engine,
    parse_graph,
    parse_map,
    parse_subspace,
    parse_tagged,
    parse_tracked,
    read_archive,
    write_archive,
)
from tagbc.fraisse import build_chain
from tagbc.graphcodec import Graph, encode
from tagbc.report import VerificationReport
from tagbc.tagged import TaggedStructure, XEStructure, XStructure


def test_tagged_text_layout():
    S = XEStructure.build(2, {0: F2Subspace(2, (0b11,))}, [1, 2], [[1, 2]])
    assert emit_tagged(S) == "level L_XE\ndim 2\ntag 0: 11\nX: 01 10\nEblock: 01 10\n"
    assert parse_tagged(emit_tagged(S)) == S


def test_dimension_zero_roundtrips():
    Z = XEStructure.build(0)
    assert parse_tagged(emit_tagged(Z)) == Z
    assert parse_subspace(emit_subspace(F2Subspace.zero(0))) == F2Subspace.zero(0)
    assert parse_map(emit_map(F2LinearMap(0, 3, ()))) == F2LinearMap(0, 3, ())
    assert parse_map(emit_map(F2LinearMap(2, 0, (0, 0)))) == F2LinearMap(2, 0, (0, 0))


def test_lower_levels_roundtrip():
    base = TaggedStructure(2, {3: F2Subspace(2, (0b11,))})
    assert parse_tagged(emit_tagged(base)) == base
    xs = XStructure(base, frozenset([1, 2]))
    assert parse_tagged(emit_tagged(xs)) == xs


def test_x_conflict_names_the_bullet():
    text = "level L_X\ndim 2\nX: 01 10\n"
    with pytest.raises(ParseError, match="K0.X-complement"):
        parse_tagged(text)
    text = "level L_X\ndim 2\nX: 01 10 11\n"
    with pytest.raises(ParseError, match="K0.X-basis"):
        parse_tagged(text)
    text = "level L_XE\ndim 2\ntag 0: 11\nX: 01 10\nEblock: 01\n"
    with pytest.raises(ParseError, match="K.E-partition"):
        parse_tagged(text)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as exc:
        parse_tagged("dim 2\ntag 0: 1x\n")
    assert exc.value.line == 2
    with pytest.raises(ParseError) as exc:
        parse_graph("n 3\ne 0 3\n")
    assert exc.value.line == 2
    with pytest.raises(ParseError):
        parse_tagged("tag 0: 11\n")
    with pytest.raises(ParseError):
        parse_tagged("dim 2\ntag 0: 11 11\n")


def test_graph_format():
    assert parse_graph("n 0\n") == Graph(0)
    G = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert emit_graph(G) == "n 3\ne 0 1\ne 1 2\n"
    assert parse_graph("# comment\nn 3\ne 0 1\n\ne 1 2\n") == G
    with pytest.raises(ParseError):
        parse_graph("n 3\ne 0 1\ne 0 1\n")


def test_engine_and_coded_format():
    e = build_engine(n=2)
    text = emit_engine(e, full=True)
    assert text.startswith("engine 2 1 1\n")
    assert parse_engine(text).params == e.params
    assert parse_engine("engine 3 2 1\n").params == EngineParams(3, 2, 1)
    tampered = text.replace("tag 4: 011", "tag 4: 111")
    with pytest.raises(ParseError):
        parse_engine(tampered)
    c = encode(Graph.from_edges(2, [(0, 1)]), e)
    assert emit_coded(c).endswith("Uplus: 100\n")
    back = parse_coded(emit_coded(c, full=True))
    assert back.Z == c.Z and back.U_plus == c.U_plus
    with pytest.raises(ParseError):
        parse_engine("engine 0 1 1\n")


def test_tracked_format():
    f, d = gen.random_tracked(random.Random(1))
    assert parse_tracked(emit_tracked(f, d)) == (f, d)
    with pytest.raises(ParseError):
        parse_tracked("tracked 2\npair: 10 01\npair: 01 10\n")


def test_real_chain_archive(tmp_path):
    ch = build_chain(2, 1, seed=1)
    files = emit_chain(ch)
    write_archive(files, tmp_path / "c")
    back = parse_chain(read_archive(tmp_path / "c"))
    assert back == ch
    assert emit_chain(back) == files
    files["stage_0001.txt"] = emit_tagged(ch.final)
    if ch.dims[1] != ch.final.dim:
        with pytest.raises(ParseError):
            parse_chain(files)
    with pytest.raises(ParseError):
        read_archive(tmp_path / "missing")


def test_report_roundtrip_text():
    rep = VerificationReport("demo", params={"seed": 3})
    rep.add("a", True)
    rep.add("b", False, "why")
    rep.add("c", None)
    text = rep.render()
    assert text.splitlines()[-2:] == ["summary: 1 pass, 1 fail, 1 skip", "verdict: fail"]
    assert VerificationReport.parse(text).render() == text
    with pytest.raises(ValueError):
        VerificationReport.parse("case x: maybe\n")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_roundtrip_properties(seed):
    rng = random.Random(seed)
    S = gen.random_k_structure(rng, rng.randint(0, 6))
    assert parse_tagged(emit_tagged(S)) == S
    U = gen.random_subspace(rng)
    assert parse_subspace(emit_subspace(U)) == U
    m = gen.random_map(rng)
    assert parse_map(emit_map(m)) == m
    ch = gen.random_chain(rng)
    files = emit_chain(ch)
    assert parse_chain(files) == ch and emit_chain(parse_chain(files)) == files
