"""E2-page algebra over F2, reconstructed from generator/relation/basis tables.

Monomials are sparse vectors ((g1, e1), (g2, e2), ...) in ring generators,
optionally times one module generator.  An element is a set of monomials
(F2 coefficients: presence means 1).  The basis table of each bidegree fixes
the normal monomials; relations act as rewrite rules whose head is the first
monomial listed in the file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import (
    DegreeMismatch,
    MissingImage,
    ModuleTimesModule,
    NonConfluent,
    OutOfRange,
    UnknownGenerator,
)

REWRITE_STEP_LIMIT = 10_000


class BiDegree(NamedTuple):
    stem: int
    s: int

    @property
    def t(self) -> int:
        return self.stem + self.s

    def __add__(self, other):  # type: ignore[override]
        return BiDegree(self.stem + other[0], self.s + other[1])

    def __str__(self) -> str:
        return f"({self.stem},{self.s})"


class Generator(NamedTuple):
    id: int
    name: Optional[str]  # latex name; None when the file holds [NULL]
    degree: BiDegree


class Monomial(NamedTuple):
    """ring_part sorted by generator id with exponents >= 1."""

    ring_part: tuple[tuple[int, int], ...]
    module_gen: Optional[int] = None

    def tokens(self) -> tuple[int, ...]:
        toks: list[int] = []
        for g, e in self.ring_part:
            toks += [g, e]
        if self.module_gen is not None:
            toks.append(self.module_gen)
        return tuple(toks)

    @property
    def is_unit(self) -> bool:
        return not self.ring_part and self.module_gen is None


UNIT = Monomial(())


def mon_sort_key(m: Monomial) -> tuple[int, tuple[int, ...]]:
    """File-canonical monomial order: shorter token lists first, then lex."""
    toks = m.tokens()
    return (len(toks), toks)


@dataclass(frozen=True)
class Element:
    """An F2 sum of monomials; the empty set is the zero element."""

    mons: frozenset[Monomial]

    @staticmethod
    def zero() -> "Element":
        return Element(frozenset())

    @staticmethod
    def of(*mons: Monomial) -> "Element":
        return Element(frozenset(mons))

    @property
    def is_zero(self) -> bool:
        return not self.mons

    def sorted_mons(self) -> list[Monomial]:
        return sorted(self.mons, key=mon_sort_key)

    def __xor__(self, other: "Element") -> "Element":
        return Element(self.mons ^ other.mons)


@dataclass(frozen=True)
class BasisVec:
    """Sparse F2 vector over the indexed monomial basis of one bidegree."""

    degree: BiDegree
    indices: tuple[int, ...]  # strictly increasing

    def __post_init__(self):
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError(f"indices must be strictly increasing: {self.indices}")

    @staticmethod
    def zero(degree: BiDegree) -> "BasisVec":
        return BasisVec(degree, ())

    @property
    def is_zero(self) -> bool:
        return not self.indices

    @property
    def bits(self) -> int:
        b = 0
        for i in self.indices:
            b |= 1 << i
        return b

    @staticmethod
    def from_bits(degree: BiDegree, bits: int) -> "BasisVec":
        idx = []
        i = 0
        while bits:
            if bits & 1:
                idx.append(i)
            bits >>= 1
            i += 1
        return BasisVec(degree, tuple(idx))

    def __xor__(self, other: "BasisVec") -> "BasisVec":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.degree != other.degree:
            raise DegreeMismatch(f"cannot add {self.degree} and {other.degree}")
        return BasisVec.from_bits(self.degree, self.bits ^ other.bits)

    def __str__(self) -> str:
        return "[" + ",".join(str(i) for i in self.indices) + "]"


class Unknown:
    """Singleton marker distinct from the zero element ([NULL] in files)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unknown"


UNKNOWN = Unknown()


@dataclass
class SpectrumData:
    """Immutable-after-load E2 page of one spectrum."""

    name: str
    is_ring: bool
    generators: list[Generator]
    relations: list[Element]  # first monomial in file order is the rewrite head
    basis: dict[BiDegree, list[Monomial]]
    d2: dict[tuple[BiDegree, int], object]  # BasisVec | UNKNOWN; absent means zero
    max_t: int
    ring: Optional["SpectrumData"] = None  # ring spectrum acting; None when is_ring
    relation_heads: list[Monomial] = field(default_factory=list)
    _basis_index: dict[Monomial, tuple[BiDegree, int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.is_ring:
            self.ring = self
        if not self.relation_heads:
            self.relation_heads = [rel_head(r) for r in self.relations]
        if not self._basis_index:
            for deg, mons in self.basis.items():
                for i, m in enumerate(mons):
                    self._basis_index[m] = (deg, i)

    # -- lookups --

    def ring_gen(self, gid: int) -> Generator:
        ring = self.ring
        if ring is None:
            raise UnknownGenerator(f"{self.name}: no ring to resolve generator {gid}")
        if not 0 <= gid < len(ring.generators):
            raise UnknownGenerator(f"{ring.name}: no generator {gid}")
        return ring.generators[gid]

    def module_gen(self, gid: int) -> Generator:
        if not 0 <= gid < len(self.generators):
            raise UnknownGenerator(f"{self.name}: no generator {gid}")
        return self.generators[gid]

    def dim(self, degree: BiDegree) -> int:
        return len(self.basis.get(degree, ()))

    def basis_monomial(self, degree: BiDegree, index: int) -> Monomial:
        mons = self.basis.get(degree, [])
        if not 0 <= index < len(mons):
            raise UnknownGenerator(f"{self.name}: no basis index {index} at {degree}")
        return mons[index]

    def index_of(self, mon: Monomial) -> Optional[tuple[BiDegree, int]]:
        return self._basis_index.get(mon)

    def d2_of(self, degree: BiDegree, index: int):
        """d2 of a basis line: BasisVec (empty = trivial) or UNKNOWN."""
        target = BiDegree(degree.stem - 1, degree.s + 2)
        val = self.d2.get((degree, index))
        if val is UNKNOWN:
            return UNKNOWN
        if val is None:
            return BasisVec.zero(target)
        return val


def rel_head(rel: Element) -> Monomial:
    """The rewrite head is the first monomial in file-canonical order."""
    if rel.is_zero:
        raise ValueError("empty relation")
    return rel.sorted_mons()[0]


# ---------- degrees ----------

def degree_of(mon: Monomial, ctx: SpectrumData) -> BiDegree:
    stem = 0
    s = 0
    for gid, exp in mon.ring_part:
        g = ctx.ring_gen(gid)
        stem += g.degree.stem * exp
        s += g.degree.s * exp
    if mon.module_gen is not None:
        g = ctx.module_gen(mon.module_gen)
        stem += g.degree.stem
        s += g.degree.s
    return BiDegree(stem, s)


def element_degree(e: Element, ctx: SpectrumData) -> Optional[BiDegree]:
    """The uniform degree of e, or None for zero.  DegreeMismatch if mixed."""
    deg: Optional[BiDegree] = None
    for m in e.mons:
        d = degree_of(m, ctx)
        if deg is None:
            deg = d
        elif deg != d:
            raise DegreeMismatch(f"{ctx.name}: mixed degrees {deg} and {d}")
    return deg


def elem_add(a: Element, b: Element, ctx: Optional[SpectrumData] = None) -> Element:
    if ctx is not None and not a.is_zero and not b.is_zero:
        da, db = element_degree(a, ctx), element_degree(b, ctx)
        if da != db:
            raise DegreeMismatch(f"{ctx.name}: {da} + {db}")
    return a ^ b


# ---------- normal form ----------

def _divides(head: Monomial, mon: Monomial) -> bool:
    if head.module_gen is not None and head.module_gen != mon.module_gen:
        return False
    exps = dict(mon.ring_part)
    for g, e in head.ring_part:
        if exps.get(g, 0) < e:
            return False
    return True


def _quotient(mon: Monomial, head: Monomial) -> Monomial:
    exps = dict(mon.ring_part)
    for g, e in head.ring_part:
        exps[g] -= e
        if exps[g] == 0:
            del exps[g]
    mg = None if head.module_gen is not None else mon.module_gen
    return Monomial(tuple(sorted(exps.items())), mg)


def mul_mons(a: Monomial, b: Monomial) -> Monomial:
    if a.module_gen is not None and b.module_gen is not None:
        raise ModuleTimesModule("cannot multiply two module monomials")
    exps: dict[int, int] = dict(a.ring_part)
    for g, e in b.ring_part:
        exps[g] = exps.get(g, 0) + e
    mg = a.module_gen if a.module_gen is not None else b.module_gen
    return Monomial(tuple(sorted(exps.items())), mg)


def _rewrite_rules(ctx: SpectrumData):
    """Module relations plus the acting ring's relations, as (head, tail) pairs.

    Heads come from file order (relation_heads), not from re-sorting.
    """
    rules = []

    def add(rels, heads):
        for rel, head in zip(rels, heads):
            tail = [m for m in rel.sorted_mons() if m != head]
            rules.append((head, tail))

    add(ctx.relations, ctx.relation_heads)
    if not ctx.is_ring and ctx.ring is not None:
        add(ctx.ring.relations, ctx.ring.relation_heads)
    return rules


def normal_form(e: Element, ctx: SpectrumData) -> BasisVec:
    """Reduce e to its basis coordinates by iterated rewriting."""
    deg = element_degree(e, ctx)
    if deg is None:
        # zero of indeterminate degree; callers wanting a located zero pass one in
        return BasisVec.zero(BiDegree(0, 0))
    if deg.t > ctx.max_t:
        raise OutOfRange(f"{ctx.name}: t={deg.t} beyond max_t={ctx.max_t}")
    rules = _rewrite_rules(ctx)
    data = set(e.mons)
    steps = 0
    while True:
        pending = sorted((m for m in data if ctx.index_of(m) is None), key=mon_sort_key)
        if not pending:
            break
        progressed = False
        for mon in pending:
            if mon not in data:
                continue  # cancelled by an earlier rewrite this sweep
            for head, tail in rules:
                if _divides(head, mon):
                    steps += 1
                    if steps > REWRITE_STEP_LIMIT:
                        raise NonConfluent(
                            f"{ctx.name}: rewriting exceeded {REWRITE_STEP_LIMIT} steps at {deg}")
                    q = _quotient(mon, head)
                    data.discard(mon)
                    for t in tail:
                        prod = mul_mons(q, t)
                        if prod in data:
                            data.discard(prod)
                        else:
                            data.add(prod)
                    progressed = True
                    break
            if progressed:
                break
        if not progressed:
            bad = pending[0]
            raise NonConfluent(
                f"{ctx.name}: monomial {bad.tokens()} at {deg} is neither basis nor reducible")
    indices = sorted(ctx.index_of(m)[1] for m in data)
    return BasisVec(deg, tuple(indices))


def mul(a: Element, b: Element, ctx: SpectrumData) -> BasisVec:
    """Distribute monomial products, then reduce to basis coordinates."""
    if a.is_zero or b.is_zero:
        da = element_degree(a, ctx) if not a.is_zero else None
        db = element_degree(b, ctx) if not b.is_zero else None
        if da is not None and db is not None:
            return BasisVec.zero(da + db)
        return BasisVec.zero(BiDegree(0, 0))
    acc: set[Monomial] = set()
    for m1 in a.mons:
        for m2 in b.mons:
            prod = mul_mons(m1, m2)
            if prod in acc:
                acc.discard(prod)
            else:
                acc.add(prod)
    return normal_form(Element(frozenset(acc)), ctx)


def vec_to_element(v: BasisVec, ctx: SpectrumData) -> Element:
    mons = [ctx.basis_monomial(v.degree, i) for i in v.indices]
    return Element(frozenset(mons))


def mul_vec(x: BasisVec, y: BasisVec, ctx: SpectrumData) -> BasisVec:
    if x.is_zero or y.is_zero:
        return BasisVec.zero(x.degree + y.degree)
    return mul(vec_to_element(x, ctx), vec_to_element(y, ctx), ctx)


# ---------- maps between E2 pages ----------

@dataclass
class MapData:
    """Sparse table generator id -> image Element in the target's arity."""

    name: str
    images: dict[int, Element]
    _shift: Optional[tuple[int, int]] = None  # (k, AF) once inferred

    def image_of(self, gid: int) -> Element:
        if gid not in self.images:
            raise MissingImage(f"{self.name}: no image for generator {gid}")
        return self.images[gid]

    def shift(self, src: SpectrumData, dst: SpectrumData) -> tuple[int, int]:
        """(k, AF): targets live at (stem - k, s + AF).  Constant across the table."""
        if self._shift is not None:
            return self._shift
        got: Optional[tuple[int, int]] = None
        for gid in sorted(self.images):
            img = self.images[gid]
            if img.is_zero:
                continue
            sdeg = (src.module_gen(gid) if not src.is_ring else src.ring_gen(gid)).degree
            ideg = element_degree(img, dst)
            assert ideg is not None
            cur = (sdeg.stem - ideg.stem, ideg.s - sdeg.s)
            if got is None:
                got = cur
            elif got != cur:
                raise DegreeMismatch(
                    f"{self.name}: generator {gid} shifts by {cur}, expected {got}")
        if got is None:
            got = (0, 0)  # all images zero or table empty
        self._shift = got
        return got


def apply_map(f: MapData, e: Element, src: SpectrumData, dst: SpectrumData) -> BasisVec:
    """Push e through f, extending linearly over the ring action."""
    k, af = f.shift(src, dst)
    if e.is_zero:
        return BasisVec.zero(BiDegree(0, 0))
    deg = element_degree(e, src)
    assert deg is not None
    if deg.t > src.max_t:
        raise OutOfRange(f"{f.name}: source t={deg.t} beyond {src.name} max_t")
    target = BiDegree(deg.stem - k, deg.s + af)
    if target.t > dst.max_t:
        raise OutOfRange(f"{f.name}: image t={target.t} beyond {dst.name} max_t")
    acc = BasisVec.zero(target)
    for mon in e.mons:
        if src.is_ring:
            # ring map: extend multiplicatively over generator images
            term = Element.of(UNIT)
            for gid, exp in mon.ring_part:
                img = f.image_of(gid)
                for _ in range(exp):
                    term = vec_to_element(mul(term, img, dst), dst)
        else:
            assert mon.module_gen is not None
            img = f.image_of(mon.module_gen)
            carrier = Element.of(Monomial(mon.ring_part))
            term = vec_to_element(mul(carrier, img, dst) if not img.is_zero
                                  else BasisVec.zero(target), dst)
        v = normal_form(term, dst) if not term.is_zero else BasisVec.zero(target)
        acc = acc ^ v if not v.is_zero else acc
    return acc if not acc.is_zero else BasisVec.zero(target)


# ---------- Leibniz ----------

def leibniz_product(x: BasisVec, dx: BasisVec, y: BasisVec, dy: BasisVec,
                    r: int, ctx: SpectrumData,
                    x_ctx: Optional[SpectrumData] = None,
                    y_ctx: Optional[SpectrumData] = None) -> tuple[BasisVec, BasisVec]:
    """(x*y, dx*y + x*dy): a representative of d_r(xy); target read as a coset.

    x and y may live in different spectra (module times acting ring); the
    product is reduced in ctx.  x_ctx/y_ctx name each factor's own basis
    table and default to ctx.
    """
    x_ctx = x_ctx or ctx
    y_ctx = y_ctx or ctx
    for v, dv in ((x, dx), (y, dy)):
        if not dv.is_zero and dv.degree != BiDegree(v.degree.stem - 1, v.degree.s + r):
            raise DegreeMismatch(
                f"d_{r} of {v.degree} must land in ({v.degree.stem - 1},{v.degree.s + r}),"
                f" got {dv.degree}")

    def cross(a: BasisVec, actx: SpectrumData, b: BasisVec,
              bctx: SpectrumData) -> BasisVec:
        if a.is_zero or b.is_zero:
            return BasisVec.zero(a.degree + b.degree)
        return mul(vec_to_element(a, actx), vec_to_element(b, bctx), ctx)

    xy = cross(x, x_ctx, y, y_ctx)
    prod_deg = x.degree + y.degree
    dxy = BasisVec.zero(BiDegree(prod_deg.stem - 1, prod_deg.s + r))
    dxy = dxy ^ cross(dx, x_ctx, y, y_ctx)
    dxy = dxy ^ cross(x, x_ctx, dy, y_ctx)
    if xy.is_zero:
        xy = BasisVec.zero(prod_deg)
    if dxy.is_zero:
        dxy = BasisVec.zero(BiDegree(prod_deg.stem - 1, prod_deg.s + r))
    return xy, dxy
