"""Line-oriented text formats.  Every ``emit_*`` has a ``parse_*`` inverse.

Vectors are bitstrings padded to the ambient dimension, most-significant
coordinate first.  Parse errors carry the offending line number.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

from .engine import Engine, EngineParams, build_engine, export_full_tagged
from .f2core import F2LinearMap, F2Subspace, from_bitstring, rref, to_bitstring
from .fraisse import Chain, LogEntry, PosedProblem
from .graphcodec import CodedStructure, Graph
from .lifting import ClassBijection, TrackedPartialIso
from .tagged import (
    L,
    L_X,
    L_XE,
    TaggedStructure,
    XEStructure,
    XStructure,
    validate_k,
    validate_k0,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _lines(text: str) -> list[tuple[int, str]]:
    return [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)
            if ln.strip() and not ln.strip().startswith("#")]


def _bits(tok: str, dim: int, ln: int) -> int:
    if len(tok) != dim or set(tok) - {"0", "1"}:
        raise ParseError(f"expected a {dim}-bit vector, got {tok!r}", ln)
    return from_bitstring(tok) if dim else 0


def _vecs(rest: str, dim: int, ln: int) -> list[int]:
    return [_bits(t, dim, ln) for t in rest.split()]


def _fmt(vs: Iterable[int], dim: int) -> str:
    return " ".join(to_bitstring(v, dim) for v in vs)


def _int(tok: str, ln: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", ln) from None


# ---------------------------------------------------------------- subspaces and maps

def emit_subspace(S: F2Subspace) -> str:
    return f"subspace {S.ambient_dim}\nrows: {_fmt(S.rows, S.ambient_dim)}\n".replace("rows: \n", "rows:\n")


def parse_subspace(text: str) -> F2Subspace:
    lines = _lines(text)
    if len(lines) != 2 or not lines[0][1].startswith("subspace "):
        raise ParseError("expected 'subspace <dim>' and 'rows:' lines", lines[0][0] if lines else None)
    d = _int(lines[0][1].split()[1], lines[0][0])
    ln, row = lines[1]
    if not row.startswith("rows:"):
        raise ParseError("expected 'rows:'", ln)
    vs = _vecs(row[5:], d, ln)
    if tuple(vs) != rref(vs):
        raise ParseError("rows are not in reduced echelon form", ln)
    return F2Subspace(d, tuple(vs))


def emit_map(f: F2LinearMap) -> str:
    out = [f"map {f.domain_dim} {f.codomain_dim}"]
    out += [f"image: {to_bitstring(w, f.codomain_dim)}" for w in f.images]
    return "\n".join(out) + "\n"


def parse_map(text: str) -> F2LinearMap:
    lines = _lines(text)
    if not lines or not lines[0][1].startswith("map "):
        raise ParseError("expected 'map <domain> <codomain>'", lines[0][0] if lines else None)
    parts = lines[0][1].split()
    if len(parts) != 3:
        raise ParseError("expected 'map <domain> <codomain>'", lines[0][0])
    d, c = _int(parts[1], lines[0][0]), _int(parts[2], lines[0][0])
    imgs = []
    for ln, s in lines[1:]:
        if not s.startswith("image:"):
            raise ParseError("expected 'image:'", ln)
        toks = s[6:].split()
        if len(toks) != (1 if c else 0) and not (c == 0 and not toks):
            raise ParseError("one vector per image line", ln)
        imgs.append(_bits(toks[0], c, ln) if toks else 0)
    if len(imgs) != d:
        raise ParseError(f"expected {d} image lines, got {len(imgs)}")
    return F2LinearMap(d, c, tuple(imgs))


# ---------------------------------------------------------------- tagged structures

def emit_tagged(S: TaggedStructure | XStructure | XEStructure) -> str:
    level = L_XE if isinstance(S, XEStructure) else L_X if isinstance(S, XStructure) else L
    base = S if isinstance(S, TaggedStructure) else S.xs.base
    d = base.dim
    out = [f"level {level}", f"dim {d}"]
    for n in sorted(base.tags):
        out.append(f"tag {n}: {_fmt(base.tags[n].rows, d)}")
    if level != L:
        out.append(f"X: {_fmt(sorted(S.X), d)}".rstrip())
    if level == L_XE:
        for b in S.blocks_sorted:
            out.append(f"Eblock: {_fmt(sorted(b), d)}")
    return "\n".join(out) + "\n"


def parse_tagged(text: str, validate: bool = True):
    """Parse a tagged structure; X-levels are checked against K0 or K."""
    level = None
    dim = None
    tags: dict[int, F2Subspace] = {}
    X = None
    blocks = []
    for ln, s in _lines(text):
        key, _, rest = s.partition(" ")
        if key == "level":
            if rest not in (L, L_X, L_XE) or level is not None:
                raise ParseError(f"bad level {rest!r}", ln)
            level = rest
        elif key == "dim":
            if dim is not None:
                raise ParseError("repeated dim", ln)
            dim = _int(rest, ln)
            if dim < 0:
                raise ParseError("dim must be nonnegative", ln)
        elif dim is None:
            raise ParseError("'dim' must come first", ln)
        elif key == "tag":
            idx, sep, vecs = rest.partition(":")
            if not sep:
                raise ParseError("expected 'tag <index>: rows'", ln)
            n = _int(idx.strip(), ln)
            if n < 0 or n in tags:
                raise ParseError(f"bad or repeated tag index {n}", ln)
            vs = _vecs(vecs, dim, ln)
            if not vs or tuple(vs) != rref(vs):
                raise ParseError("tag rows must be a nonempty reduced echelon basis", ln)
            tags[n] = F2Subspace(dim, tuple(vs))
        elif s.startswith("X:"):
            if X is not None:
                raise ParseError("repeated X line", ln)
            X = _vecs(s[2:], dim, ln)
            if len(set(X)) != len(X):
                raise ParseError("repeated X element", ln)
        elif s.startswith("Eblock:"):
            b = _vecs(s[7:], dim, ln)
            if not b:
                raise ParseError("empty E-block", ln)
            blocks.append(b)
        else:
            raise ParseError(f"unrecognized line {s!r}", ln)
    if dim is None:
        raise ParseError("missing 'dim' line")
    if level is None:
        level = L_XE if blocks else (L_X if X is not None else L)
    base = TaggedStructure(dim, tags)
    if level == L:
        if X is not None or blocks:
            raise ParseError("level L carries no X or E")
        return base
    xs = XStructure(base, frozenset(X or ()))
    if level == L_X:
        if blocks:
            raise ParseError("level L_X carries no E")
        if validate:
            rep = validate_k0(xs)
            if not rep.ok:
                raise ParseError("; ".join(rep.failures))
        return xs
    S = XEStructure(xs, frozenset(frozenset(b) for b in blocks))
    if validate:
        rep = validate_k(S)
        if sum(len(b) for b in blocks) != len(S.X) or any(len(set(b)) != len(b) for b in blocks):
            rep.failures.append("K.E-partition: E does not partition exactly X")
        if not rep.ok:
            raise ParseError("; ".join(rep.failures))
    return S


# ---------------------------------------------------------------- graphs

def emit_graph(G: Graph) -> str:
    return "\n".join([f"n {G.n}"] + [f"e {u} {v}" for u, v in G.sorted_edges()]) + "\n"


def parse_graph(text: str) -> Graph:
    n = None
    edges = []
    for ln, s in _lines(text):
        parts = s.split()
        if parts[0] == "n" and len(parts) == 2 and n is None:
            n = _int(parts[1], ln)
            if n < 0:
                raise ParseError("vertex count must be nonnegative", ln)
        elif parts[0] == "e" and len(parts) == 3 and n is not None:
            u, v = _int(parts[1], ln), _int(parts[2], ln)
            if not (0 <= u < v < n):
                raise ParseError("edges need 0 <= u < v < n", ln)
            if (u, v) in edges:
                raise ParseError("repeated edge", ln)
            edges.append((u, v))
        else:
            raise ParseError(f"unrecognized line {s!r}", ln)
    if n is None:
        raise ParseError("missing 'n' line")
    return Graph(n, frozenset(edges))


# ---------------------------------------------------------------- engines and codes

def emit_engine(engine: Engine, full: bool = False) -> str:
    p = engine.params
    out = f"engine {p.n} {p.m0} {p.m1}\n"
    if full:
        out += emit_tagged(export_full_tagged(engine))
    return out


def _split_engine(text: str):
    lines = _lines(text)
    if not lines or not lines[0][1].startswith("engine "):
        raise ParseError("expected 'engine <n> <m0> <m1>'", lines[0][0] if lines else None)
    ln, head = lines[0]
    parts = head.split()
    if len(parts) != 4:
        raise ParseError("expected 'engine <n> <m0> <m1>'", ln)
    try:
        params = EngineParams(*(_int(t, ln) for t in parts[1:]))
    except ValueError as exc:
        raise ParseError(str(exc), ln) from None
    return params, lines[1:]


def parse_engine(text: str) -> Engine:
    params, rest = _split_engine(text)
    engine = build_engine(params)
    body = [s for _, s in rest if not s.startswith("Uplus:")]
    if body:
        S = parse_tagged("\n".join(body), validate=False)
        if not isinstance(S, TaggedStructure) or S != export_full_tagged(engine):
            raise ParseError("embedded tagged block does not match the engine parameters")
    return engine


def emit_coded(coded: CodedStructure, full: bool = False) -> str:
    d = coded.engine.dim
    return emit_engine(coded.engine, full) + f"Uplus: {_fmt(coded.U_plus.rows, d)}".rstrip() + "\n"


def parse_coded(text: str) -> CodedStructure:
    engine = parse_engine(text)
    ups = [(ln, s) for ln, s in _lines(text) if s.startswith("Uplus:")]
    if len(ups) != 1:
        raise ParseError("expected exactly one 'Uplus:' line")
    ln, s = ups[0]
    vs = _vecs(s[6:], engine.dim, ln)
    if tuple(vs) != rref(vs):
        raise ParseError("Uplus rows are not in reduced echelon form", ln)
    U = F2Subspace(engine.dim, tuple(vs))
    Z = frozenset(z for z in engine.X1 if z in U)
    return CodedStructure(engine, Z, U)


# ---------------------------------------------------------------- tracked maps

def emit_tracked(f: TrackedPartialIso, dim: int) -> str:
    out = [f"tracked {dim}"]
    out += [f"pair: {to_bitstring(x, dim)} {to_bitstring(y, dim)}" for x, y in zip(f.domain, f.images)]
    out += [f"class: {to_bitstring(a, dim)} {to_bitstring(b, dim)}" for a, b in sorted(f.h.mapping.items())]
    return "\n".join(out) + "\n"


def parse_tracked(text: str) -> tuple[TrackedPartialIso, int]:
    lines = _lines(text)
    if not lines or not lines[0][1].startswith("tracked "):
        raise ParseError("expected 'tracked <dim>'", lines[0][0] if lines else None)
    d = _int(lines[0][1].split()[1], lines[0][0])
    dom, img, h = [], [], {}
    for ln, s in lines[1:]:
        if s.startswith("pair:"):
            x, y = _vecs(s[5:], d, ln)
            dom.append(x)
            img.append(y)
        elif s.startswith("class:"):
            a, b = _vecs(s[6:], d, ln)
            h[a] = b
        else:
            raise ParseError(f"unrecognized line {s!r}", ln)
    if dom != sorted(dom):
        raise ParseError("pairs must be listed in ascending domain order")
    return TrackedPartialIso(tuple(dom), tuple(img), ClassBijection(h)), d


# ---------------------------------------------------------------- chains

def _ints(vs: Iterable[int]) -> str:
    return " ".join(str(v) for v in vs)


def emit_chain(chain: Chain, include_stages: bool = True) -> dict[str, str]:
    """Archive as a mapping file name -> text."""
    files = {"final.txt": emit_tagged(chain.final)}
    meta = [f"bound {chain.bound}", f"seed {chain.seed}", f"dims {_ints(chain.dims)}",
            f"rounds {_ints(chain.rounds)}"]
    if chain.incomplete:
        meta.append(f"incomplete {chain.incomplete}")
    files["chain.txt"] = "\n".join(meta) + "\n"
    inc = []
    for i in range(len(chain.dims) - 1):
        inc.append(f"inclusion {i}")
        inc.append(emit_map(F2LinearMap.inclusion(chain.dims[i], chain.dims[i + 1])).rstrip())
    files["inclusions.txt"] = "\n".join(inc) + ("\n" if inc else "")
    log = []
    for p in chain.problems:
        log.append(f"problem {p.pid} {p.round} {p.stage} {p.type_index} | {_ints(p.copy)} | {_ints(p.images)}")
    for e in chain.log:
        log.append(f"entry {e.pid} {e.stage_i} {e.stage_j} {e.type_index} | {_ints(e.copy)} | {_ints(e.witness)}")
    files["log.txt"] = "\n".join(log) + ("\n" if log else "")
    if include_stages:
        for i in range(len(chain.dims)):
            files[f"stage_{i:04d}.txt"] = emit_tagged(chain.stage(i))
    return files


def _bar_fields(s: str, ln: int, heads: int) -> tuple[list[int], list[int], list[int]]:
    parts = s.split("|")
    if len(parts) != 3:
        raise ParseError("expected three '|'-separated fields", ln)
    head = [_int(t, ln) for t in parts[0].split()[1:]]
    if len(head) != heads:
        raise ParseError("wrong number of leading fields", ln)
    return head, [_int(t, ln) for t in parts[1].split()], [_int(t, ln) for t in parts[2].split()]


def parse_chain(files: Mapping[str, str]) -> Chain:
    for need in ("final.txt", "chain.txt", "log.txt"):
        if need not in files:
            raise ParseError(f"archive is missing {need}")
    final = parse_tagged(files["final.txt"])
    if not isinstance(final, XEStructure):
        raise ParseError("final stage must be an L_XE structure")
    meta = {}
    for ln, s in _lines(files["chain.txt"]):
        k, _, v = s.partition(" ")
        meta[k] = (ln, v)
    try:
        bound = _int(meta["bound"][1], meta["bound"][0])
        seed = _int(meta["seed"][1], meta["seed"][0])
        dims = [_int(t, meta["dims"][0]) for t in meta["dims"][1].split()]
        rounds = [_int(t, meta["rounds"][0]) for t in meta["rounds"][1].split()] if "rounds" in meta else []
    except KeyError as exc:
        raise ParseError(f"chain.txt is missing {exc.args[0]!r}") from None
    if not dims or dims[-1] != final.dim or dims != sorted(dims):
        raise ParseError("stage dimensions inconsistent with the final stage")
    chain = Chain(final, dims, bound, seed, rounds=rounds,
                  incomplete=meta["incomplete"][1] if "incomplete" in meta else None)
    for ln, s in _lines(files["log.txt"]):
        if s.startswith("problem "):
            (pid, rnd, st, ti), copy, imgs = _bar_fields(s, ln, 4)
            chain.problems.append(PosedProblem(pid, rnd, st, tuple(copy), ti, tuple(imgs)))
        elif s.startswith("entry "):
            (pid, si, sj, ti), copy, wit = _bar_fields(s, ln, 4)
            chain.log.append(LogEntry(pid, si, tuple(copy), ti, sj, tuple(wit)))
        else:
            raise ParseError(f"unrecognized line {s!r}", ln)
    for name, text in files.items():
        if name.startswith("stage_"):
            i = int(name[6:10])
            if i >= len(dims) or parse_tagged(text) != chain.stage(i):
                raise ParseError(f"{name} does not match the final stage prefix")
    return chain


def write_archive(files: Mapping[str, str], path: str | Path) -> None:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (p / name).write_text(text)


def read_archive(path: str | Path) -> dict[str, str]:
    p = Path(path)
    if not p.is_dir():
        raise ParseError(f"{p} is not an archive directory")
    return {f.name: f.read_text() for f in sorted(p.iterdir()) if f.suffix == ".txt"}
