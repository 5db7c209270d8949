"""Exact linear algebra over the two-element field.

Vectors are fixed-width bit sequences stored as Python ints: coordinate ``i``
is bit ``i`` and the text form is the binary numeral padded to ``dim``
characters, most-significant coordinate first (``"10110"``).  Subspaces keep a
basis in reduced row-echelon form, so two subspaces are equal exactly when
their basis tuples are identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

DEFAULT_ENUM_GUARD = 20
_enum_guard = DEFAULT_ENUM_GUARD


class DimensionError(ValueError):
    """Operands live in ambient spaces of different dimension."""


class GuardError(RuntimeError):
    """An enumeration was refused because the dimension exceeds the guard."""


def get_enumeration_guard() -> int:
    return _enum_guard


def set_enumeration_guard(limit: int) -> int:
    """Set the global enumeration ceiling; returns the previous value."""
    global _enum_guard
    if limit < 0:
        raise ValueError("guard must be nonnegative")
    previous, _enum_guard = _enum_guard, int(limit)
    return previous


def check_guard(dim: int, guard: int | None = None, what: str = "enumeration") -> None:
    limit = _enum_guard if guard is None else guard
    if dim > limit:
        raise GuardError(f"{what} of a {dim}-dimensional space refused (guard {limit})")


# ---------------------------------------------------------------- raw helpers

def to_bitstring(bits: int, dim: int) -> str:
    return format(bits, f"0{dim}b") if dim else ""


def from_bitstring(text: str) -> int:
    if text and set(text) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {text!r}")
    return int(text, 2) if text else 0


def reduce_against(v: int, rows: Sequence[int]) -> int:
    """Residue of ``v`` modulo the span of an RREF row set."""
    for r in rows:
        if v >> (r.bit_length() - 1) & 1:
            v ^= r
    return v


def rref(vectors: Iterable[int]) -> tuple[int, ...]:
    """Reduced row-echelon basis of the span, pivots (leading bits) descending."""
    rows: list[int] = []
    for v in vectors:
        v = reduce_against(v, rows)
        if not v:
            continue
        p = 1 << (v.bit_length() - 1)
        rows = [r ^ v if r & p else r for r in rows]
        rows.append(v)
    rows.sort(reverse=True)
    return tuple(rows)


def rank(vectors: Iterable[int]) -> int:
    return len(rref(vectors))


def span_elements(rows: Sequence[int]) -> list[int]:
    """All elements of the span of ``rows`` (no guard; callers check)."""
    out = [0]
    for r in rows:
        out += [x ^ r for x in out]
    return out


def bit_indices(v: int) -> Iterator[int]:
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low


def solve_combination(target: int, gens: Sequence[int]) -> int | None:
    """Mask ``c`` (bit j = use gens[j]) with XOR of chosen gens == target, or None."""
    pivots: list[tuple[int, int]] = []  # (reduced vector, combination mask)
    for j, g in enumerate(gens):
        comb = 1 << j
        for r, rc in pivots:
            if g >> (r.bit_length() - 1) & 1:
                g ^= r
                comb ^= rc
        if g:
            pivots.append((g, comb))
            pivots.sort(reverse=True)
    comb = 0
    for r, rc in pivots:
        if target >> (r.bit_length() - 1) & 1:
            target ^= r
            comb ^= rc
    return comb if target == 0 else None


def kernel_masks(gens: Sequence[int]) -> list[int]:
    """Basis (as combination masks) of the relations among ``gens``."""
    pivots: list[tuple[int, int]] = []
    relations: list[int] = []
    for j, g in enumerate(gens):
        comb = 1 << j
        for r, rc in pivots:
            if g >> (r.bit_length() - 1) & 1:
                g ^= r
                comb ^= rc
        if g:
            pivots.append((g, comb))
            pivots.sort(reverse=True)
        else:
            relations.append(comb)
    return relations


# ---------------------------------------------------------------- value types

@dataclass(frozen=True, slots=True)
class F2Vector:
    dim: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.dim < 0:
            raise ValueError("dimension must be nonnegative")
        if self.bits < 0 or self.bits >> self.dim:
            raise ValueError(f"bits {self.bits} do not fit in dimension {self.dim}")

    @classmethod
    def parse(cls, text: str) -> F2Vector:
        return cls(len(text), from_bitstring(text))

    @classmethod
    def zero(cls, dim: int) -> F2Vector:
        return cls(dim, 0)

    @classmethod
    def unit(cls, dim: int, i: int) -> F2Vector:
        return cls(dim, 1 << i)

    def __add__(self, other: F2Vector) -> F2Vector:
        return add(self, other)

    def __bool__(self) -> bool:
        return bool(self.bits)

    def __str__(self) -> str:
        return to_bitstring(self.bits, self.dim)

    @property
    def weight(self) -> int:
        return self.bits.bit_count()


@dataclass(frozen=True, slots=True)
class F2Subspace:
    """A subspace given by its canonical RREF basis rows (as ints)."""

    ambient_dim: int
    rows: tuple[int, ...] = ()

    @classmethod
    def zero(cls, dim: int) -> F2Subspace:
        return cls(dim, ())

    @classmethod
    def full(cls, dim: int) -> F2Subspace:
        return cls(dim, tuple(1 << i for i in reversed(range(dim))))

    @classmethod
    def from_ints(cls, dim: int, vectors: Iterable[int]) -> F2Subspace:
        vectors = list(vectors)
        for v in vectors:
            if v < 0 or v >> dim:
                raise DimensionError(f"vector {v} outside dimension {dim}")
        return cls(dim, rref(vectors))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def basis(self) -> tuple[F2Vector, ...]:
        return tuple(F2Vector(self.ambient_dim, r) for r in self.rows)

    @property
    def size(self) -> int:
        return 1 << len(self.rows)

    def __contains__(self, v: int | F2Vector) -> bool:
        if isinstance(v, F2Vector):
            if v.dim != self.ambient_dim:
                raise DimensionError("vector and subspace dimensions differ")
            v = v.bits
        return reduce_against(v, self.rows) == 0

    def __bool__(self) -> bool:
        return bool(self.rows)

    def __len__(self) -> int:
        return 1 << len(self.rows)

    def elements(self, guard: int | None = None) -> list[int]:
        check_guard(self.dim, guard)
        return span_elements(self.rows)

    def residue(self, v: int) -> int:
        return reduce_against(v, self.rows)

    def __str__(self) -> str:
        return " ".join(to_bitstring(r, self.ambient_dim) for r in self.rows)


@dataclass(frozen=True, slots=True)
class F2LinearMap:
    """Linear map given by the image of each standard basis vector ``e_i = 1 << i``.

    ``domain`` restricts a map built on a non-spanning basis; applying it
    outside that subspace raises.
    """

    domain_dim: int
    codomain_dim: int
    images: tuple[int, ...]
    domain: F2Subspace | None = None

    def __post_init__(self) -> None:
        if len(self.images) != self.domain_dim:
            raise DimensionError("need one image per domain basis vector")
        for w in self.images:
            if w < 0 or w >> self.codomain_dim:
                raise DimensionError(f"image {w} outside codomain dimension {self.codomain_dim}")

    @classmethod
    def identity(cls, dim: int) -> F2LinearMap:
        return cls(dim, dim, tuple(1 << i for i in range(dim)))

    @classmethod
    def zero_map(cls, domain_dim: int, codomain_dim: int) -> F2LinearMap:
        return cls(domain_dim, codomain_dim, (0,) * domain_dim)

    @classmethod
    def inclusion(cls, domain_dim: int, codomain_dim: int) -> F2LinearMap:
        """Coordinate-prefix inclusion; leaves int values unchanged."""
        if codomain_dim < domain_dim:
            raise DimensionError("prefix inclusion needs codomain_dim >= domain_dim")
        return cls(domain_dim, codomain_dim, tuple(1 << i for i in range(domain_dim)))

    @property
    def is_total(self) -> bool:
        return self.domain is None

    @property
    def is_prefix_inclusion(self) -> bool:
        return all(w == 1 << i for i, w in enumerate(self.images))

    def apply_int(self, v: int) -> int:
        if self.domain is not None and reduce_against(v, self.domain.rows):
            raise ValueError("vector outside the domain of a partial map")
        out = 0
        images = self.images
        while v:
            low = v & -v
            out ^= images[low.bit_length() - 1]
            v ^= low
        return out

    def __call__(self, v: F2Vector | int) -> F2Vector | int:
        if isinstance(v, F2Vector):
            if v.dim != self.domain_dim:
                raise DimensionError("vector not in the map's domain space")
            return F2Vector(self.codomain_dim, self.apply_int(v.bits))
        return self.apply_int(v)

    def image_of(self, S: F2Subspace) -> F2Subspace:
        if S.ambient_dim != self.domain_dim:
            raise DimensionError("subspace not in the map's domain space")
        if self.is_prefix_inclusion:
            return F2Subspace(self.codomain_dim, S.rows)
        return F2Subspace(self.codomain_dim, rref(self.apply_int(r) for r in S.rows))

    def image(self) -> F2Subspace:
        gens = self.images if self.domain is None else [self.apply_int(r) for r in self.domain.rows]
        return F2Subspace(self.codomain_dim, rref(gens))

    def kernel(self) -> F2Subspace:
        gens = list(self.domain.rows) if self.domain is not None else [1 << i for i in range(self.domain_dim)]
        imgs = [self.apply_int(g) for g in gens]
        rel = kernel_masks(imgs)
        return F2Subspace(self.domain_dim, rref(_combine(gens, m) for m in rel))

    def is_injective(self) -> bool:
        return not self.kernel().rows

    def compose(self, inner: F2LinearMap) -> F2LinearMap:
        """``self ∘ inner``."""
        if inner.codomain_dim != self.domain_dim:
            raise DimensionError("cannot compose: dimensions do not chain")
        return F2LinearMap(inner.domain_dim, self.codomain_dim,
                           tuple(self.apply_int(w) for w in inner.images), inner.domain)

    def matrix_rows(self) -> list[str]:
        return [to_bitstring(w, self.codomain_dim) for w in self.images]


def _combine(gens: Sequence[int], mask: int) -> int:
    out = 0
    for j in bit_indices(mask):
        out ^= gens[j]
    return out


# ---------------------------------------------------------------- operations

def _same_dim(*dims: int) -> int:
    if len(set(dims)) > 1:
        raise DimensionError(f"dimension mismatch: {dims}")
    return dims[0]


def add(u: F2Vector, v: F2Vector) -> F2Vector:
    _same_dim(u.dim, v.dim)
    return F2Vector(u.dim, u.bits ^ v.bits)


def span(vectors: Iterable[F2Vector], dim: int | None = None) -> F2Subspace:
    """Canonical subspace generated by ``vectors``; ``dim`` is needed for empty input."""
    vectors = list(vectors)
    if not vectors:
        if dim is None:
            raise ValueError("span of an empty set needs an explicit dim")
        return F2Subspace.zero(dim)
    d = _same_dim(*(v.dim for v in vectors), *(() if dim is None else (dim,)))
    return F2Subspace(d, rref(v.bits for v in vectors))


def member(v: F2Vector, S: F2Subspace) -> bool:
    _same_dim(v.dim, S.ambient_dim)
    return reduce_against(v.bits, S.rows) == 0


def sum_subspaces(S: F2Subspace, T: F2Subspace) -> F2Subspace:
    d = _same_dim(S.ambient_dim, T.ambient_dim)
    return F2Subspace(d, rref((*S.rows, *T.rows)))


def intersect(S: F2Subspace, T: F2Subspace) -> F2Subspace:
    """Zassenhaus: reduce rows (s|s) and (t|0); zero-left rows carry S ∩ T."""
    d = _same_dim(S.ambient_dim, T.ambient_dim)
    if not S.rows or not T.rows:
        return F2Subspace.zero(d)
    mask = (1 << d) - 1
    reduced = rref([(s << d) | s for s in S.rows] + [t << d for t in T.rows])
    return F2Subspace(d, rref(r & mask for r in reduced if not r >> d))


def is_linearly_independent(vectors: Iterable[F2Vector]) -> bool:
    vectors = list(vectors)
    if not vectors:
        return True
    _same_dim(*(v.dim for v in vectors))
    if len({v.bits for v in vectors}) != len(vectors):
        return False
    return rank(v.bits for v in vectors) == len(vectors)


def ints_independent(vectors: Sequence[int]) -> bool:
    return rank(vectors) == len(vectors)


def extend_map_on_basis(domain_basis: Sequence[F2Vector], images: Sequence[F2Vector],
                        domain_dim: int | None = None,
                        codomain_dim: int | None = None) -> F2LinearMap:
    """The linear map sending ``domain_basis[i]`` to ``images[i]``.

    Total when the basis spans the domain space; otherwise the map carries its
    domain subspace and refuses vectors outside it.
    """
    if len(domain_basis) != len(images):
        raise ValueError("domain_basis and images differ in length")
    if domain_dim is None:
        if not domain_basis:
            raise ValueError("empty basis needs explicit dimensions")
        domain_dim = domain_basis[0].dim
    if codomain_dim is None:
        codomain_dim = images[0].dim if images else domain_dim
    _same_dim(domain_dim, *(v.dim for v in domain_basis))
    _same_dim(codomain_dim, *(w.dim for w in images))
    return map_from_basis([v.bits for v in domain_basis], [w.bits for w in images],
                          domain_dim, codomain_dim)


def map_from_basis(basis: Sequence[int], images: Sequence[int], domain_dim: int,
                   codomain_dim: int) -> F2LinearMap:
    """Int-level version of :func:`extend_map_on_basis`."""
    if len(basis) != len(images):
        raise ValueError("basis and images differ in length")
    if not ints_independent(basis):
        raise ValueError("domain basis is linearly dependent")
    gens = list(basis)
    imgs = list(images)
    total = len(gens) == domain_dim
    if not total:
        # complete with standard vectors sent to 0; domain records the true span
        for i in range(domain_dim):
            e = 1 << i
            if not ints_independent(gens + [e]):
                continue
            gens.append(e)
            imgs.append(0)
    out = []
    for i in range(domain_dim):
        comb = solve_combination(1 << i, gens)
        assert comb is not None
        out.append(_combine(imgs, comb))
    domain = None if total else F2Subspace(domain_dim, rref(basis))
    return F2LinearMap(domain_dim, codomain_dim, tuple(out), domain)


def preimage_coset(f: F2LinearMap, S: F2Subspace, target: int) -> tuple[int | None, F2Subspace]:
    """Solve ``f(w) = target`` for ``w`` in ``S``.

    Returns a particular solution (or None) and the subspace ``ker f ∩ S``;
    the solution set is the coset ``particular + kernel``.
    """
    imgs = [f.apply_int(r) for r in S.rows]
    comb = solve_combination(target, imgs)
    kernel = F2Subspace(S.ambient_dim, rref(_combine(S.rows, m) for m in kernel_masks(imgs)))
    if comb is None:
        return None, kernel
    return _combine(S.rows, comb), kernel


def preimage_set(f: F2LinearMap, S: F2Subspace, target: F2Vector, method: str = "both",
                 guard: int | None = None) -> set[F2Vector]:
    """All ``w`` in ``S`` with ``f(w) = target``.

    ``method`` is ``"enumerate"``, ``"solve"`` or ``"both"``; with ``"both"``
    the two answers are compared and enumeration is skipped when ``S`` is too
    large for the guard.
    """
    _same_dim(target.dim, f.codomain_dim)
    _same_dim(S.ambient_dim, f.domain_dim)
    results = []
    if method in ("solve", "both"):
        particular, kernel = preimage_coset(f, S, target.bits)
        if particular is None:
            solved: set[int] = set()
        else:
            check_guard(kernel.dim, guard, "coset enumeration")
            solved = {particular ^ k for k in span_elements(kernel.rows)}
        results.append(solved)
    limit = _enum_guard if guard is None else guard
    if method == "enumerate" or (method == "both" and S.dim <= limit):
        check_guard(S.dim, guard)
        results.append({w for w in span_elements(S.rows) if f.apply_int(w) == target.bits})
    if not results:
        raise ValueError(f"unknown method {method!r}")
    if len(results) == 2 and results[0] != results[1]:
        raise AssertionError("enumeration and linear solve disagree")
    return {F2Vector(f.domain_dim, w) for w in results[0]}


def projection(onto: F2Subspace, along: F2Subspace) -> F2LinearMap:
    """Projection onto ``onto`` along a complementary ``along``."""
    d = _same_dim(onto.ambient_dim, along.ambient_dim)
    if onto.dim + along.dim != d or rank((*onto.rows, *along.rows)) != d:
        raise ValueError("subspaces are not complementary")
    basis = list(onto.rows) + list(along.rows)
    images = list(onto.rows) + [0] * along.dim
    return map_from_basis(basis, images, d, d)


def pullback(f: F2LinearMap, U: F2Subspace) -> F2Subspace:
    """``{a : f(a) ∈ U}`` for a total map ``f``."""
    _same_dim(f.codomain_dim, U.ambient_dim)
    residues = [U.residue(w) for w in f.images]
    gens = [1 << i for i in range(f.domain_dim)]
    return F2Subspace(f.domain_dim, rref(_combine(gens, m) for m in kernel_masks(residues)))


def all_vectors(dim: int, guard: int | None = None) -> range:
    check_guard(dim, guard)
    return range(1 << dim)

