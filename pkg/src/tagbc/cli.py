"""Command-line entry point: ``tagbc <command> ...``.

The exit status is nonzero exactly when a check fails or an input is rejected.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import formats as fm
from . import suites
from .amalgam import AmalgamationError, AmalgamationProblem, amalgamate_k, amalgamate_k0
from .engine import EngineParams, build_engine, claim1_check, sigma_lift, verify_sigma
from .f2core import GuardError, set_enumeration_guard, to_bitstring
from .fraisse import DEFAULT_MAX_STAGE_DIM, build_chain, check_richness, classes_count
from .graphcodec import (
    CodecError,
    brute_force_iso,
    decode,
    encode,
    induced_graph_iso,
)
from .lifting import ClassBijection, is_in_Fh, lift_over
from .report import VerificationReport
from .tagged import L_X, L_XE, Embedding, XEStructure, as_xe, find_embeddings, is_embedding


class CliError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- amalgamate

def _embedding(path: str | None, A, T, level) -> Embedding:
    if path:
        f = fm.parse_map(_read(path))
        if not is_embedding(f, A, T, level):
            raise CliError(f"{path} is not an embedding at level {level}")
        return Embedding(f, A, T, level)
    found = find_embeddings(A, T, level, limit=1)
    if not found:
        raise CliError("A does not embed; pass the embedding explicitly")
    return found[0]


def _parse_estar(text: str, B, C):
    blocks = []
    for ln, s in fm._lines(text):
        if not s.startswith("block:"):
            raise fm.ParseError("expected 'block:' lines", ln)
        members = []
        for tok in s[6:].split():
            side, _, bits = tok.partition(":")
            if side not in ("B", "C"):
                raise fm.ParseError(f"member {tok!r} needs a B: or C: prefix", ln)
            dim = B.dim if side == "B" else C.dim
            members.append((side, fm._bits(bits, dim, ln)))
        blocks.append(members)
    return blocks


def cmd_amalgamate(args) -> int:
    A, B, C = (fm.parse_tagged(_read(p)) for p in (args.A, args.B, args.C))
    k_level = args.estar is not None or args.free or isinstance(B, XEStructure)
    level = L_XE if k_level else L_X
    if k_level:
        A, B, C = as_xe(A), as_xe(B), as_xe(C)
    prob = AmalgamationProblem(A, B, C, _embedding(args.eB, A, B, level), _embedding(args.eC, A, C, level))
    if k_level:
        estar = _parse_estar(_read(args.estar), B, C) if args.estar else None
        res = amalgamate_k(prob, estar)
    else:
        res = amalgamate_k0(prob)
    text = fm.emit_tagged(res.D) + "# i_B\n" + fm.emit_map(res.i_B.map) + "# i_C\n" + fm.emit_map(res.i_C.map)
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------- chains and lifting

def cmd_chain(args) -> int:
    if args.action == "build":
        ch = build_chain(args.bound, args.steps, args.seed, max_dim=args.max_stage_dim)
        files = fm.emit_chain(ch, include_stages=ch.final.dim <= args.stage_files_up_to)
        if args.out:
            fm.write_archive(files, args.out)
        rep = VerificationReport("chain-build", params={"bound": args.bound, "steps": args.steps, "seed": args.seed})
        rep.add("complete", ch.incomplete is None, ch.incomplete or "")
        rep.add("size", True, f"stages={len(ch.dims)} dim={ch.final.dim} classes={classes_count(ch.final)}")
        sys.stdout.write(rep.render())
        return 0 if rep.ok else 1
    ch = fm.parse_chain(fm.read_archive(args.chain))
    bound = ch.bound if args.bound is None else args.bound
    rich = check_richness(ch, bound)
    rep = VerificationReport("chain-check", params={"bound": bound})
    rep.add("log", not rich.bad_entries, f"{len(ch.log)} entries, bad {rich.bad_entries}")
    rep.add("problems", not rich.unwitnessed, f"unwitnessed {len(rich.unwitnessed)}")
    rep.add("age", not rich.missing_types, f"missing {len(rich.missing_types)}")
    _emit(rep.render(), args.out)
    return 0 if rep.ok else 1


def _parse_pairs(spec: str) -> dict[int, int]:
    out = {}
    for part in filter(None, spec.split(",")):
        a, sep, b = part.partition(":")
        if not sep:
            raise CliError(f"bad class pair {part!r}; use i:j")
        out[int(a)] = int(b)
    return out


def cmd_lift(args) -> int:
    ch = fm.parse_chain(fm.read_archive(args.chain))
    S = ch.final
    h = ClassBijection({1 << a: 1 << b for a, b in _parse_pairs(args.h).items()})
    for b in list(h.mapping) + list(h.mapping.values()):
        if b not in S.X or S.block_id(b) != b:
            raise CliError(f"coordinate {b.bit_length() - 1} does not name an E-block")
    target = [1 << int(t) for t in filter(None, args.target.split(","))]
    if not set(target) <= S.X:
        raise CliError("target coordinates must be X-elements of the final stage")
    f = lift_over(h, target, ch)
    d = ch.final.dim
    rep = VerificationReport("lift")
    for x, y in zip(f.domain, f.images):
        bx, by = ch.final.block_id(x), ch.final.block_id(y)
        rep.add(f"x{x.bit_length() - 1}", f.h(bx) == by,
                f"{to_bitstring(x, d)} -> {to_bitstring(y, d)} class {bx.bit_length() - 1} -> {by.bit_length() - 1}")
    rep.add("in-Fh", is_in_Fh(f, ch))
    text = fm.emit_tracked(f, d) + fm.emit_map(f.embedding(ch).map) + rep.render()
    if args.save_chain:
        fm.write_archive(fm.emit_chain(ch, include_stages=False), args.save_chain)
    _emit(text, args.out)
    return 0 if rep.ok else 1


# ---------------------------------------------------------------- engine and codec

def cmd_engine(args) -> int:
    params = EngineParams(args.n, args.m0, args.m1)
    eng = build_engine(params)
    if args.action == "build":
        _emit(fm.emit_engine(eng, full=args.export_full), args.out)
        return 0
    claims = {c.strip() for c in args.claims.split(",")}
    rep = VerificationReport("engine-verify", params={"n": args.n, "m0": args.m0, "m1": args.m1})
    if "1" in claims:
        rep.extend(claim1_check(eng), "claim1/")
    if "2" in claims:
        rep.extend(suites.claim2_suite(args.n, args.m0, args.m1), "claim2/")
    _emit(rep.render(), args.out)
    return 0 if rep.ok else 1


def cmd_encode(args) -> int:
    G = fm.parse_graph(_read(args.graph))
    n = G.n if args.n is None else args.n
    if n != G.n:
        raise CliError(f"--n {n} does not match the graph's {G.n} vertices")
    coded = encode(G, EngineParams(n, args.m0, args.m1))
    _emit(fm.emit_coded(coded), args.out)
    return 0


def cmd_decode(args) -> int:
    coded = fm.parse_coded(_read(args.input))
    _emit(fm.emit_graph(decode(coded)), args.out)
    return 0


def cmd_iso(args) -> int:
    cg = fm.parse_coded(_read(args.left))
    ch = fm.parse_coded(_read(args.right))
    f = brute_force_iso(cg, ch)
    rep = VerificationReport("iso")
    if f is None:
        rep.add("structure-iso", None, "none exists")
        text = rep.render()
    else:
        h = induced_graph_iso(f, cg, ch)
        rep.add("structure-iso", True, "found")
        rep.add("induced-graph-iso", True, " ".join(map(str, h)))
        text = fm.emit_map(f.map) + rep.render()
    _emit(text, args.out)
    return 0


def cmd_verify(args) -> int:
    s = args.suite
    if s == "amalgam":
        rep = suites.amalgam_suite(args.count or 1000, args.seed)
        rep.extend(suites.k_amalgam_suite(args.count and max(1, args.count // 5) or 200, args.seed), "k/")
    elif s == "chain":
        rep = suites.chain_suite(args.bound, args.steps, args.seed)
    elif s == "lifting":
        rep = suites.lifting_suite(args.count or 100, args.seed)
    elif s == "claim1":
        rep = suites.claim1_suite(args.n, args.m0, args.m1)
    elif s == "claim2":
        rep = suites.claim2_suite(args.n, args.m0, args.m1)
    else:
        rep = suites.reduction_suite(args.max_n, args.m0, args.m1)
    rep.params["seed"] = args.seed
    _emit(rep.render(), args.out)
    return 0 if rep.ok else 1


def cmd_reduce(args) -> int:
    rep = suites.reduction_suite(args.max_n, args.m0, args.m1)
    _emit(rep.render(), args.out)
    return 0 if rep.ok else 1


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-dim", type=int, default=None, help="enumeration guard (default 20)")
    common.add_argument("--out", default=None, help="write output here instead of stdout")

    p = argparse.ArgumentParser(prog="tagbc", description="Tagged F2-structure laboratory.", parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("amalgamate", parents=[common], help="amalgamate B and C over A")
    a.add_argument("--A", required=True)
    a.add_argument("--B", required=True)
    a.add_argument("--C", required=True)
    a.add_argument("--eB", help="map file A -> B (default: first embedding found)")
    a.add_argument("--eC", help="map file A -> C (default: first embedding found)")
    g = a.add_mutually_exclusive_group()
    g.add_argument("--estar", help="file of 'block: B:<bits> C:<bits> ...' lines")
    g.add_argument("--free", action="store_true", help="use the free extension of E")
    a.set_defaults(func=cmd_amalgamate)

    c = sub.add_parser("chain", parents=[common], help="build or check a chain")
    c.add_argument("action", choices=["build", "check"])
    c.add_argument("--bound", type=int, default=None)
    c.add_argument("--steps", type=int, default=2)
    c.add_argument("--chain", help="archive directory (check)")
    c.add_argument("--max-stage-dim", type=int, default=DEFAULT_MAX_STAGE_DIM)
    c.add_argument("--stage-files-up-to", type=int, default=12,
                   help="write per-stage files when the final dimension is at most this")
    c.set_defaults(func=cmd_chain)

    lf = sub.add_parser("lift", parents=[common], help="lift a class bijection over a target")
    lf.add_argument("--chain", required=True)
    lf.add_argument("--h", required=True, help="class pairs i:j naming blocks by least coordinate")
    lf.add_argument("--target", required=True, help="comma-separated X coordinates")
    lf.add_argument("--save-chain", help="write the possibly grown chain here")
    lf.set_defaults(func=cmd_lift)

    e = sub.add_parser("engine", parents=[common], help="build or verify an engine")
    e.add_argument("action", choices=["build", "verify"])
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--m0", type=int, default=1)
    e.add_argument("--m1", type=int, default=1)
    e.add_argument("--export-full", action="store_true")
    e.add_argument("--claims", default="1,2")
    e.set_defaults(func=cmd_engine)

    en = sub.add_parser("encode", parents=[common], help="code a graph")
    en.add_argument("--graph", required=True)
    en.add_argument("--n", type=int)
    en.add_argument("--m0", type=int, default=1)
    en.add_argument("--m1", type=int, default=1)
    en.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", parents=[common], help="recover a graph from a code")
    d.add_argument("--in", dest="input", required=True)
    d.set_defaults(func=cmd_decode)

    i = sub.add_parser("iso", parents=[common], help="search a structure isomorphism between two codes")
    i.add_argument("--left", required=True)
    i.add_argument("--right", required=True)
    i.set_defaults(func=cmd_iso)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=["amalgam", "chain", "lifting", "claim1", "claim2", "reduction"])
    v.add_argument("--count", type=int, default=None)
    v.add_argument("--bound", type=int, default=2)
    v.add_argument("--steps", type=int, default=2)
    v.add_argument("--n", type=int, default=3)
    v.add_argument("--m0", type=int, default=1)
    v.add_argument("--m1", type=int, default=1)
    v.add_argument("--max-n", type=int, default=4)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reduce-experiment", parents=[common], help="pairwise iff experiment")
    r.add_argument("--max-n", type=int, default=4)
    r.add_argument("--m0", type=int, default=1)
    r.add_argument("--m1", type=int, default=1)
    r.set_defaults(func=cmd_reduce)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.max_dim is not None:
        set_enumeration_guard(args.max_dim)
    if getattr(args, "bound", 0) is None and args.command == "chain" and args.action == "build":
        args.bound = 2
    try:
        return args.func(args)
    except (fm.ParseError, CliError, AmalgamationError, CodecError, GuardError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
