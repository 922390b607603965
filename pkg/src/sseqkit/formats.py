"""Parsers and serializers for the seven table families.

CSV dialect: comma separated, first line header, RFC-style quoting (fields
containing commas, quotes or newlines are double-quoted).  Unknown ("[NULL]")
is distinct from zero ("") everywhere.  Content must be ASCII.
"""

from __future__ import annotations

import csv
import io
import sqlite3
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union

from . import algebra
from .algebra import (
    UNKNOWN,
    BasisVec,
    BiDegree,
    Element,
    Generator,
    MapData,
    Monomial,
    SpectrumData,
    Unknown,
    degree_of,
    element_degree,
)
from .errors import (
    ArityMismatch,
    CrossValidation,
    DuplicateIndex,
    FormatError,
    MalformedInteger,
    MissingFile,
    NonMonotoneIds,
    SchemaError,
)

NULL = "[NULL]"

GENERATORS_HEADER = ["id", "name", "stem", "s"]
RELATIONS_HEADER = ["rel", "stem", "s"]
BASIS_HEADER = ["index", "mon", "stem", "s", "d2"]
MAP_HEADER = ["id", "map"]
SS_HEADER = ["stem", "s", "base", "diff", "level"]
COFSEQ_HEADER = ["iC", "stem", "s", "base", "diff", "level"]
PROOFS_HEADER = ["id", "depth", "reason", "name", "stem", "s", "t", "r", "x", "dx", "info"]

REASON_CODES = frozenset({
    "d2", "N", "G", "XX", "XY", "ToCs", "OutCsI", "CsCm",
    "Syn", "SynCs", "SynIn", "T", "D", "TI", "DI", "GI",
})
DX_KEYED_REASONS = frozenset({"OutCsI", "TI", "DI", "GI"})


# ---------- expression grammar ----------

def _int(tok: str, ctx: str = "") -> int:
    tok = tok.strip()
    if not tok or not (tok.isdigit() or (tok[0] == "-" and tok[1:].isdigit())):
        raise MalformedInteger(f"bad integer {tok!r} {ctx}".rstrip())
    return int(tok)


def parse_mon(text: str, module: bool) -> Monomial:
    """One semicolon-free segment: even token count (ring) or odd (module)."""
    if text == "":
        if module:
            raise ArityMismatch("empty monomial in a module expression")
        return algebra.UNIT
    toks = [_int(t, f"in monomial {text!r}") for t in text.split(",")]
    if module:
        if len(toks) % 2 == 0:
            raise ArityMismatch(f"module monomial needs odd token count: {text!r}")
        mg: Optional[int] = toks[-1]
        toks = toks[:-1]
    else:
        if len(toks) % 2 == 1:
            raise ArityMismatch(f"ring monomial needs even token count: {text!r}")
        mg = None
    pairs = []
    prev = -1
    for g, e in zip(toks[::2], toks[1::2]):
        if g <= prev:
            raise ArityMismatch(f"ring generator ids must strictly increase: {text!r}")
        if e < 1:
            raise ArityMismatch(f"exponents must be >= 1: {text!r}")
        pairs.append((g, e))
        prev = g
    return Monomial(tuple(pairs), mg)


def parse_expr(text: str, module: bool) -> Element:
    """Semicolon-separated sum of monomials; empty text is zero."""
    if text == "":
        return Element.zero()
    mons = frozenset(parse_mon(seg, module) for seg in text.split(";"))
    return Element(mons)


def serialize_mon(mon: Monomial) -> str:
    return ",".join(str(t) for t in mon.tokens())


def serialize_expr(e: Element) -> str:
    """Inverse of parse_expr; monomials in file-canonical order."""
    return ";".join(serialize_mon(m) for m in e.sorted_mons())


def parse_index_vec(text: str, degree: BiDegree) -> Union[Unknown, BasisVec]:
    """"" is zero, "[NULL]" undetermined, else a sorted index set."""
    if text == NULL:
        return UNKNOWN
    if text == "":
        return BasisVec.zero(degree)
    indices = [_int(t, f"in index vector {text!r}") for t in text.split(",")]
    if len(set(indices)) != len(indices):
        raise DuplicateIndex(f"duplicate index in {text!r}")
    return BasisVec(degree, tuple(sorted(indices)))


def serialize_index_vec(v: Union[Unknown, BasisVec, None]) -> str:
    if v is UNKNOWN or v is None:
        return NULL
    return ",".join(str(i) for i in v.indices)


# ---------- CSV plumbing ----------

def _check_ascii(path: Path) -> None:
    data = path.read_bytes()
    if any(b > 0x7F for b in data):
        raise FormatError("non-ASCII byte in file", path=str(path))


def _with_context(err: FormatError, path: Path, line: int) -> FormatError:
    if err.path is not None:
        return err
    return type(err)(err.args[0] if err.args else str(err),
                     path=str(path), line=line)


def _read_rows(path: Path, header: list[str]) -> list[tuple[int, list[str]]]:
    if not path.exists():
        raise MissingFile(f"no such file", path=str(path))
    _check_ascii(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise SchemaError("empty file", path=str(path))
        if first != header:
            raise SchemaError(f"header {first!r}, expected {header!r}", path=str(path))
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"expected {len(header)} fields, got {len(row)}",
                                  path=str(path), line=reader.line_num)
            rows.append((reader.line_num, row))
        return rows


def write_csv(path: Path, header: list[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _fmt_rows(header: list[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


# ---------- spectrum loading ----------

def load_spectrum(path_or_dir: Union[str, Path], name: Optional[str] = None,
                  is_ring: bool = False, ring: Optional[SpectrumData] = None,
                  max_t: Optional[int] = None) -> SpectrumData:
    """Load X_AdamsE2_{generators,relations,basis}.csv and cross-validate.

    `path_or_dir` is the directory holding the three files; `name` the spectrum
    name X.  A ring context is required for modules.
    """
    d = Path(path_or_dir)
    if name is None:
        name = d.name
    gen_path = d / f"{name}_AdamsE2_generators.csv"
    rel_path = d / f"{name}_AdamsE2_relations.csv"
    basis_path = d / f"{name}_AdamsE2_basis.csv"

    generators: list[Generator] = []
    for line, row in _read_rows(gen_path, GENERATORS_HEADER):
        try:
            gid = _int(row[0])
            degree = BiDegree(_int(row[2]), _int(row[3]))
        except FormatError as err:
            raise _with_context(err, gen_path, line)
        if gid != len(generators):
            raise SchemaError(f"generator ids must be dense, got {gid}",
                              path=str(gen_path), line=line)
        gname = None if row[1] == NULL else row[1]
        generators.append(Generator(gid, gname, degree))

    module = not is_ring
    if module and ring is None:
        raise CrossValidation("module spectra need a ring context", path=str(gen_path))

    data = SpectrumData(name=name, is_ring=is_ring, generators=generators,
                        relations=[], basis={}, d2={},
                        max_t=max_t if max_t is not None else 10**9, ring=ring)

    relations: list[Element] = []
    heads: list[Monomial] = []
    for line, row in _read_rows(rel_path, RELATIONS_HEADER):
        try:
            rel = parse_expr(row[0], module)
            _int(row[1]), _int(row[2])
        except FormatError as err:
            raise _with_context(err, rel_path, line)
        if rel.is_zero:
            raise SchemaError("empty relation", path=str(rel_path), line=line)
        head = parse_mon(row[0].split(";")[0], module)
        deg = BiDegree(_int(row[1]), _int(row[2]))
        try:
            got = element_degree(rel, data)
        except Exception as err:
            raise CrossValidation(f"relation is not homogeneous: {err}",
                                  path=str(rel_path), line=line)
        if got != deg:
            raise CrossValidation(f"relation degree {got}, row says {deg}",
                                  path=str(rel_path), line=line)
        relations.append(rel)
        heads.append(head)

    basis: dict[BiDegree, list[Monomial]] = {}
    d2raw: list[tuple[int, BiDegree, int, str]] = []
    for line, row in _read_rows(basis_path, BASIS_HEADER):
        try:
            idx = _int(row[0])
            mon = parse_mon(row[1], module)
            deg = BiDegree(_int(row[2]), _int(row[3]))
        except FormatError as err:
            raise _with_context(err, basis_path, line)
        got = degree_of(mon, data)
        if got != deg:
            raise CrossValidation(
                f"basis monomial {row[1]!r} has degree {got}, row says {deg}",
                path=str(basis_path), line=line)
        mons = basis.setdefault(deg, [])
        if idx != len(mons):
            raise SchemaError(f"basis indices must be dense per bidegree, got {idx}",
                              path=str(basis_path), line=line)
        mons.append(mon)
        if row[4] != "":
            d2raw.append((line, deg, idx, row[4]))

    if max_t is None:
        ts = [g.degree.t for g in generators]
        ts += [deg.t for deg in basis]
        max_t = max(ts, default=0)

    out = SpectrumData(name=name, is_ring=is_ring, generators=generators,
                       relations=relations, basis=basis, d2={}, max_t=max_t,
                       ring=ring, relation_heads=heads)
    for line, deg, idx, text in d2raw:
        target = BiDegree(deg.stem - 1, deg.s + 2)
        val = parse_index_vec(text, target)
        if isinstance(val, BasisVec):
            if any(i >= out.dim(target) for i in val.indices):
                raise CrossValidation(
                    f"d2 index out of range at {target}: {text!r}",
                    path=str(basis_path), line=line)
        out.d2[(deg, idx)] = val
    return out


def dump_spectrum(data: SpectrumData, directory: Union[str, Path]) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_csv(d / f"{data.name}_AdamsE2_generators.csv", GENERATORS_HEADER,
              ([str(g.id), g.name if g.name is not None else NULL,
                str(g.degree.stem), str(g.degree.s)] for g in data.generators))
    write_csv(d / f"{data.name}_AdamsE2_relations.csv", RELATIONS_HEADER,
              ([serialize_expr(r), str(element_degree(r, data).stem),
                str(element_degree(r, data).s)] for r in data.relations))

    def basis_rows():
        for deg in sorted(data.basis, key=lambda b: (b.t, b.stem)):
            for i, mon in enumerate(data.basis[deg]):
                d2 = data.d2.get((deg, i))
                if d2 is None:
                    text = ""
                elif d2 is UNKNOWN:
                    text = NULL
                else:
                    text = serialize_index_vec(d2)
                yield [str(i), serialize_mon(mon), str(deg.stem), str(deg.s), text]

    write_csv(d / f"{data.name}_AdamsE2_basis.csv", BASIS_HEADER, basis_rows())


# ---------- maps ----------

def map_path(directory: Union[str, Path], src: str, dst: str) -> Path:
    """Either filename vintage: map_X_to_Y.csv or map_X_Y.csv."""
    d = Path(directory)
    with_to = d / f"map_{src}_to_{dst}.csv"
    if with_to.exists():
        return with_to
    without = d / f"map_{src}_{dst}.csv"
    if without.exists():
        return without
    return with_to


def load_map(path: Union[str, Path], module_target: bool,
             name: Optional[str] = None) -> MapData:
    p = Path(path)
    if name is None:
        stem = p.stem
        name = stem[4:] if stem.startswith("map_") else stem
    images: dict[int, Element] = {}
    for line, row in _read_rows(p, MAP_HEADER):
        try:
            gid = _int(row[0])
            if gid in images:
                raise SchemaError(f"duplicate map row for id {gid}")
            images[gid] = parse_expr(row[1], module_target)
        except FormatError as err:
            raise _with_context(err, p, line)
    return MapData(name=name, images=images)


def dump_map(data: MapData, path: Union[str, Path]) -> None:
    write_csv(Path(path), MAP_HEADER,
              ([str(gid), serialize_expr(data.images[gid])] for gid in sorted(data.images)))


# ---------- ss and cofseq rows ----------

@dataclass(frozen=True)
class SsRow:
    stem: int
    s: int
    base: str
    diff: str
    level: int

    @property
    def degree(self) -> BiDegree:
        return BiDegree(self.stem, self.s)

    def fields(self) -> list[str]:
        return [str(self.stem), str(self.s), self.base, self.diff, str(self.level)]


@dataclass(frozen=True)
class CofseqRow:
    iC: int
    stem: int
    s: int
    base: str
    diff: str
    level: int

    @property
    def degree(self) -> BiDegree:
        return BiDegree(self.stem, self.s)

    def fields(self) -> list[str]:
        return [str(self.iC), str(self.stem), str(self.s), self.base, self.diff,
                str(self.level)]


def load_ss(path: Union[str, Path]) -> list[SsRow]:
    rows = []
    for line, row in _read_rows(Path(path), SS_HEADER):
        try:
            level = _int(row[4])
            if not 1 <= level <= 10000:
                raise SchemaError(f"level {level} outside [1,10000]")
            rows.append(SsRow(_int(row[0]), _int(row[1]), row[2], row[3], level))
        except FormatError as err:
            raise _with_context(err, Path(path), line)
    return rows


def dump_ss(rows: Iterable[SsRow], path: Union[str, Path]) -> None:
    write_csv(Path(path), SS_HEADER, (r.fields() for r in rows))


def load_cofseq(path: Union[str, Path]) -> list[CofseqRow]:
    rows = []
    for line, row in _read_rows(Path(path), COFSEQ_HEADER):
        try:
            ic = _int(row[0])
            if ic not in (0, 1, 2):
                raise SchemaError(f"iC must be 0, 1 or 2, got {ic}")
            level = _int(row[5])
            if not 1 <= level <= 10000:
                raise SchemaError(f"level {level} outside [1,10000]")
            rows.append(CofseqRow(ic, _int(row[1]), _int(row[2]), row[3],
                                  row[4], level))
        except FormatError as err:
            raise _with_context(err, Path(path), line)
    return rows


def dump_cofseq(rows: Iterable[CofseqRow], path: Union[str, Path]) -> None:
    write_csv(Path(path), COFSEQ_HEADER, (r.fields() for r in rows))


# ---------- proofs ----------

@dataclass(frozen=True)
class ProofRow:
    id: int
    depth: int
    reason: str
    name: str
    stem: int
    s: int
    t: int
    r: int
    x: str
    dx: str
    info: Optional[str]

    @property
    def dx_keyed(self) -> bool:
        """(stem, s, t) refer to dx's degree instead of x's."""
        return self.reason in DX_KEYED_REASONS

    def fields(self) -> list[str]:
        return [str(self.id), str(self.depth), self.reason, self.name,
                str(self.stem), str(self.s), str(self.t), str(self.r),
                self.x, self.dx, self.info if self.info is not None else ""]


def load_proofs(paths: Sequence[Union[str, Path]]) -> Iterator[ProofRow]:
    """Stream 1..22 part files preserving global id order."""
    last_id: Optional[int] = None
    for path in paths:
        for line, row in _read_rows(Path(path), PROOFS_HEADER):
            try:
                reason = row[2]
                if reason not in REASON_CODES:
                    raise SchemaError(f"unknown reason code {reason!r}")
                depth = _int(row[1])
                if depth < 0:
                    raise SchemaError(f"negative depth {depth}")
                rid = _int(row[0])
                if last_id is not None and rid <= last_id:
                    raise NonMonotoneIds(f"proof id {rid} after {last_id}")
                last_id = rid
                info = row[10] if row[10] != "" else None
                out = ProofRow(rid, depth, reason, row[3], _int(row[4]),
                               _int(row[5]), _int(row[6]), _int(row[7]),
                               row[8], row[9], info)
            except FormatError as err:
                raise _with_context(err, Path(path), line)
            yield out


def dump_proofs(rows: Iterable[ProofRow], path: Union[str, Path]) -> None:
    write_csv(Path(path), PROOFS_HEADER, (r.fields() for r in rows))


def format_proofs(rows: Iterable[ProofRow]) -> str:
    return _fmt_rows(PROOFS_HEADER, (r.fields() for r in rows))


# ---------- byte round-trip helpers ----------

_TABLE_HEADERS = {
    "generators": GENERATORS_HEADER,
    "relations": RELATIONS_HEADER,
    "basis": BASIS_HEADER,
    "map": MAP_HEADER,
    "ss": SS_HEADER,
    "cofseq": COFSEQ_HEADER,
    "proofs": PROOFS_HEADER,
}


def table_kind(path: Union[str, Path]) -> Optional[str]:
    name = Path(path).name
    if name.startswith("map_"):
        return "map"
    if name.startswith("cofseq_"):
        return "cofseq"
    if name.startswith("proofs"):
        return "proofs"
    for kind in ("generators", "relations", "basis", "ss"):
        if name.endswith(f"_{kind}.csv"):
            return kind
    return None


def roundtrip_file(path: Union[str, Path]) -> str:
    """Parse a table file and re-serialize it; returns the new byte content."""
    kind = table_kind(path)
    if kind is None:
        raise SchemaError("unrecognized table file", path=str(path))
    header = _TABLE_HEADERS[kind]
    rows = _read_rows(Path(path), header)
    out_rows: list[list[str]] = []
    for line, row in rows:
        if kind == "generators":
            gname = None if row[1] == NULL else row[1]
            out = [str(_int(row[0])), row[1] if gname is not None else NULL,
                   str(_int(row[2])), str(_int(row[3]))]
        elif kind == "relations":
            # ring tables and module tables share the grammar; sniff the parity
            module = len(row[0].split(";")[0].split(",")) % 2 == 1
            out = [serialize_expr(parse_expr(row[0], module)),
                   str(_int(row[1])), str(_int(row[2]))]
        elif kind == "basis":
            toks = row[1].split(",") if row[1] else []
            module = len(toks) % 2 == 1
            mon = parse_mon(row[1], module)
            d2 = row[4] if row[4] in ("", NULL) else serialize_index_vec(
                parse_index_vec(row[4], BiDegree(0, 0)))
            out = [str(_int(row[0])), serialize_mon(mon), str(_int(row[2])),
                   str(_int(row[3])), d2]
        elif kind == "map":
            seg = row[1].split(";")[0]
            module = (len(seg.split(",")) % 2 == 1) if row[1] else True
            out = [str(_int(row[0])), serialize_expr(parse_expr(row[1], module))]
        elif kind == "ss":
            r = SsRow(_int(row[0]), _int(row[1]),
                      _ivec_text(row[2]), _ivec_text(row[3]), _int(row[4]))
            out = r.fields()
        elif kind == "cofseq":
            r = CofseqRow(_int(row[0]), _int(row[1]), _int(row[2]),
                          _ivec_text(row[3]), _ivec_text(row[4]), _int(row[5]))
            out = r.fields()
        else:  # proofs
            out = ProofRow(_int(row[0]), _int(row[1]), row[2], row[3], _int(row[4]),
                           _int(row[5]), _int(row[6]), _int(row[7]), row[8], row[9],
                           row[10] if row[10] != "" else None).fields()
        out_rows.append(out)
    return _fmt_rows(header, out_rows)


def _ivec_text(text: str) -> str:
    if text in ("", NULL):
        return text
    return serialize_index_vec(parse_index_vec(text, BiDegree(0, 0)))


# ---------- optional read-only SQLite adapter ----------

def load_spectrum_db(db_path: Union[str, Path], name: str, is_ring: bool = False,
                     ring: Optional[SpectrumData] = None,
                     max_t: Optional[int] = None) -> SpectrumData:
    """Read the same logical tables from X_AdamsSS.db (CSV stays normative)."""
    p = Path(db_path)
    if not p.exists():
        raise MissingFile("no such database", path=str(p))
    import tempfile

    conn = sqlite3.connect(f"file:{p}?mode=ro", uri=True)
    try:
        with tempfile.TemporaryDirectory() as tmp:
            tdir = Path(tmp)
            for kind, header in (("generators", GENERATORS_HEADER),
                                 ("relations", RELATIONS_HEADER),
                                 ("basis", BASIS_HEADER)):
                table = f"{name}_AdamsE2_{kind}"
                cols = ", ".join(f'"{c}"' for c in header)
                cur = conn.execute(f'SELECT {cols} FROM "{table}"')
                rows = [["" if v is None else str(v) for v in row] for row in cur]
                write_csv(tdir / f"{name}_AdamsE2_{kind}.csv", header, rows)
            return load_spectrum(tdir, name, is_ring=is_ring, ring=ring, max_t=max_t)
    finally:
        conn.close()


NULLCOMP_HEADER = ["left", "right"]


def load_null_compositions(path: Union[str, Path]) -> frozenset[tuple[str, str]]:
    """Pairs of keywords whose composite is null-homotopic (CsCm checking)."""
    pairs = []
    for line, row in _read_rows(Path(path), NULLCOMP_HEADER):
        pairs.append((row[0], row[1]))
    return frozenset(pairs)


def load_proofs_db(db_path: Union[str, Path]) -> Iterator[ProofRow]:
    """Read the proofs table from proofs.db; identical logical columns."""
    p = Path(db_path)
    if not p.exists():
        raise MissingFile("no such database", path=str(p))
    conn = sqlite3.connect(f"file:{p}?mode=ro", uri=True)
    try:
        cols = ", ".join(f'"{c}"' for c in PROOFS_HEADER)
        cur = conn.execute(f'SELECT {cols} FROM "proofs" ORDER BY "id"')
        last_id: Optional[int] = None
        for row in cur:
            rid, depth, reason, name, stem, s, t, r, x, dx, info = row
            if reason not in REASON_CODES:
                raise SchemaError(f"unknown reason code {reason!r}", path=str(p))
            if last_id is not None and int(rid) <= last_id:
                raise NonMonotoneIds(f"proof id {rid} after {last_id}",
                                     path=str(p))
            last_id = int(rid)
            yield ProofRow(int(rid), int(depth), reason, str(name), int(stem),
                           int(s), int(t), int(r),
                           "" if x is None else str(x),
                           "" if dx is None else str(dx),
                           None if info in (None, "") else str(info))
    finally:
        conn.close()


def load_ss_db(db_path: Union[str, Path], name: str) -> list[SsRow]:
    p = Path(db_path)
    if not p.exists():
        raise MissingFile("no such database", path=str(p))
    conn = sqlite3.connect(f"file:{p}?mode=ro", uri=True)
    try:
        cur = conn.execute(f'SELECT stem, s, base, diff, level FROM "{name}_AdamsE2_ss"')
        rows = []
        for stem, s, base, diff, level in cur:
            rows.append(SsRow(int(stem), int(s),
                              "" if base is None else str(base),
                              NULL if diff is None else str(diff), int(level)))
        return rows
    finally:
        conn.close()
