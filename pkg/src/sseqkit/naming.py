"""Grammar for CW-spectrum, map and cofiber-sequence names.

Names are plain text over [A-Za-z0-9_].  The letter m denotes a negative
sign in stunted projective space names.  Underscore separates both chain
keywords and smash factors; smash readings are tried against the spectrum
vocabulary first, then the keyword-chain reading.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import (
    AmbiguousParse,
    InconsistentCells,
    KeywordDegreeError,
    Malformed,
    UnknownKeyword,
    Unsupported,
)

# keyword -> topological degree of the attaching element
KEYWORDS: dict[str, int] = {
    "2": 0,
    "eta": 1,
    "nu": 3,
    "sigma": 7,
    "2nu": 3,
    "2sigma": 7,
    "sigmasq": 14,
    "theta4": 30,
    "theta5": 62,
}

ALIASES: dict[str, str] = {
    "C2h4": "CW_2_sigmasq",
    "C2h5": "CW_2_theta4",
    "C2h6": "CW_2_theta5",
    "Joker": "CW_2_eta_2_Eq_eta_eta",
}

FPHI_DEFAULT_BOUND = 257

_STRUCTURE_MARKERS = {"V", "A", "Eq"}


@dataclass(frozen=True)
class SpectrumAst:
    """kind in {S0, Sn, tmf, cone, chain, wedge, cowedge, chain_v, eq,
    smash, dual, rp, cp, fphi, fphik}."""

    kind: str
    words: tuple[str, ...] = ()
    parts: tuple["SpectrumAst", ...] = ()
    ints: tuple[int, ...] = ()
    alias: Optional[str] = None

    @property
    def infinite(self) -> bool:
        if self.kind in ("tmf", "fphi"):
            return True
        if self.kind == "dual":
            return self.parts[0].infinite
        if self.kind == "smash":
            return any(p.infinite for p in self.parts)
        return False

    def core(self) -> "SpectrumAst":
        """Structural identity with alias spelling erased."""
        if self.alias is None and not self.parts:
            return self
        return SpectrumAst(self.kind, self.words,
                           tuple(p.core() for p in self.parts), self.ints, None)


def _deg(word: str) -> int:
    if word not in KEYWORDS:
        raise UnknownKeyword(f"unknown keyword {word!r}")
    return KEYWORDS[word]


def _parse_rp_int(text: str) -> int:
    if text.startswith("m"):
        text = "-" + text[1:]
    if not re.fullmatch(r"-?\d+", text):
        raise Malformed(f"bad stunted-space bound {text!r}")
    return int(text)


def _parse_primary(text: str) -> Optional[SpectrumAst]:
    """One reading without smash splitting; None when the shape does not apply."""
    if text in ALIASES:
        inner = _parse_primary(ALIASES[text])
        assert inner is not None
        return SpectrumAst(inner.kind, inner.words, inner.parts, inner.ints, alias=text)
    if text == "S0":
        return SpectrumAst("S0")
    if text == "tmf":
        return SpectrumAst("tmf")
    m = re.fullmatch(r"S(\d+)", text)
    if m:
        return SpectrumAst("Sn", ints=(int(m.group(1)),))
    m = re.fullmatch(r"Fphi(\d*)", text)
    if m:
        if m.group(1):
            return SpectrumAst("fphik", ints=(int(m.group(1)),))
        return SpectrumAst("fphi")
    m = re.fullmatch(r"(RP|CP)(m?\d+)_(m?\d+)", text)
    if m:
        lo, hi = _parse_rp_int(m.group(2)), _parse_rp_int(m.group(3))
        if lo > hi:
            raise Malformed(f"empty cell interval in {text!r}")
        return SpectrumAst("rp" if m.group(1) == "RP" else "cp", ints=(lo, hi))
    if text.startswith("CW_"):
        return _parse_cw(text)
    if text.startswith("D") and len(text) > 1:
        inner = parse_spectrum_name(text[1:])
        return SpectrumAst("dual", parts=(inner,))
    if text.startswith("C") and len(text) > 1:
        word = text[1:]
        if word in KEYWORDS:
            return SpectrumAst("cone", words=(word,))
        return None
    return None


def _parse_cw(text: str) -> SpectrumAst:
    parts = text.split("_")[1:]
    if not parts or "" in parts:
        raise Malformed(f"malformed CW name {text!r}")
    markers = [i for i, p in enumerate(parts) if p in _STRUCTURE_MARKERS]
    for p in parts:
        if p not in _STRUCTURE_MARKERS and p not in KEYWORDS:
            raise UnknownKeyword(f"unknown keyword {p!r} in {text!r}")
    if not markers:
        if len(parts) < 2:
            raise Malformed(f"CW chain needs at least two keywords: {text!r}")
        return SpectrumAst("chain", words=tuple(parts))
    if len(markers) == 1:
        i = markers[0]
        marker = parts[i]
        if marker == "Eq":
            # CW_a_b_c_Eq_d_e
            if i == 3 and len(parts) == 6:
                return SpectrumAst("eq", words=tuple(parts[:3] + parts[4:]))
            raise Malformed(f"Eq expects CW_a_b_c_Eq_d_e: {text!r}")
        if marker == "V":
            if i == 1 and len(parts) == 3:
                return SpectrumAst("wedge", words=(parts[0], parts[2]))
            if i == 2 and len(parts) == 4:
                # CW_a_b_V_c
                return SpectrumAst("chain_v", words=(parts[0], parts[1], parts[3]))
            raise Malformed(f"V expects CW_a_V_b or CW_a_b_V_c: {text!r}")
        if marker == "A":
            if i == 1 and len(parts) == 3:
                return SpectrumAst("cowedge", words=(parts[0], parts[2]))
            raise Malformed(f"A expects CW_a_A_b: {text!r}")
    raise Malformed(f"unsupported structure markers in {text!r}")


def parse_spectrum_name(text: str) -> SpectrumAst:
    if not re.fullmatch(r"[A-Za-z0-9_]+", text or ""):
        raise Malformed(f"spectrum name must be over [A-Za-z0-9_]: {text!r}")
    candidates: list[SpectrumAst] = []
    primary_error: Optional[Exception] = None
    try:
        primary = _parse_primary(text)
        if primary is not None:
            candidates.append(primary)
    except (Malformed, UnknownKeyword) as err:
        primary_error = err
    # smash readings: every underscore split whose halves are both spectra
    for i, ch in enumerate(text):
        if ch != "_" or i == 0 or i == len(text) - 1:
            continue
        left, right = text[:i], text[i + 1:]
        try:
            last = parse_spectrum_name(left)
            rast = parse_spectrum_name(right)
        except Exception:
            continue
        candidates.append(SpectrumAst("smash", parts=(last, rast)))
    if not candidates:
        if primary_error is not None:
            raise primary_error
        raise Malformed(f"cannot parse spectrum name {text!r}")
    distinct = []
    for c in candidates:
        if all(c.core() != d.core() for d in distinct):
            distinct.append(c)
    if len(distinct) > 1:
        raise AmbiguousParse(f"ambiguous name {text!r}", distinct)
    return distinct[0]


def unparse(ast: SpectrumAst) -> str:
    if ast.alias is not None:
        return ast.alias
    k = ast.kind
    if k == "S0":
        return "S0"
    if k == "tmf":
        return "tmf"
    if k == "Sn":
        return f"S{ast.ints[0]}"
    if k == "fphi":
        return "Fphi"
    if k == "fphik":
        return f"Fphi{ast.ints[0]}"
    if k in ("rp", "cp"):
        fmt = lambda v: f"m{-v}" if v < 0 else str(v)
        return ("RP" if k == "rp" else "CP") + f"{fmt(ast.ints[0])}_{fmt(ast.ints[1])}"
    if k == "cone":
        return "C" + ast.words[0]
    if k == "chain":
        return "CW_" + "_".join(ast.words)
    if k == "wedge":
        return f"CW_{ast.words[0]}_V_{ast.words[1]}"
    if k == "cowedge":
        return f"CW_{ast.words[0]}_A_{ast.words[1]}"
    if k == "chain_v":
        return f"CW_{ast.words[0]}_{ast.words[1]}_V_{ast.words[2]}"
    if k == "eq":
        a, b, c, d, e = ast.words
        return f"CW_{a}_{b}_{c}_Eq_{d}_{e}"
    if k == "dual":
        return "D" + unparse(ast.parts[0])
    if k == "smash":
        return unparse(ast.parts[0]) + "_" + unparse(ast.parts[1])
    raise Malformed(f"cannot print {ast!r}")


# ---------- cells ----------

def cells_of(ast: SpectrumAst, bound: Optional[int] = None) -> list[int]:
    """Cell dimensions as a sorted multiset.

    Infinite spectra (Fphi, tmf) take a bound; Fphi defaults to 257 so that
    Fphi -> Sigma RP1_256 stays a quotient of cells.
    """
    k = ast.kind
    if k in ("S0",):
        return [0]
    if k == "Sn":
        return [ast.ints[0]]
    if k == "tmf":
        raise Unsupported("tmf has unbounded cells")
    if k == "fphi":
        b = bound if bound is not None else FPHI_DEFAULT_BOUND
        return [0] + list(range(2, b + 1))
    if k == "fphik":
        return [0] + list(range(2, ast.ints[0] + 1))
    if k in ("rp", "cp"):
        lo, hi = ast.ints
        mul = 1 if k == "rp" else 2
        return [mul * i for i in range(lo, hi + 1)]
    if k == "cone":
        return [0, _deg(ast.words[0]) + 1]
    if k == "chain":
        cells = [0]
        for w in ast.words:
            cells.append(cells[-1] + _deg(w) + 1)
        return cells
    if k == "wedge":
        a, b = ast.words
        return sorted([0, _deg(a) + 1, _deg(b) + 1])
    if k == "cowedge":
        inner = SpectrumAst("wedge", words=ast.words)
        return cells_of(SpectrumAst("dual", parts=(inner,)))
    if k == "chain_v":
        a, b, c = ast.words
        base = cells_of(SpectrumAst("chain", words=(a, b)))
        return sorted(base + [_deg(c) + 1])
    if k == "eq":
        a, b, c, d, e = ast.words
        base = cells_of(SpectrumAst("chain_v", words=(a, b, d)))
        return sorted(base + [_deg(a) + _deg(b) + _deg(c) + 3])
    if k == "dual":
        inner = cells_of(ast.parts[0], bound)
        top = max(inner)
        return sorted(top - c for c in inner)
    if k == "smash":
        left = cells_of(ast.parts[0], bound)
        right = cells_of(ast.parts[1], bound)
        return sorted(a + b for a in left for b in right)
    raise Unsupported(f"no cell rule for {k}")


def validate_keyword_degrees(spectra: dict[str, "object"]) -> None:
    """Cross-check built-in sigmasq/theta4/theta5 degrees against loaded data.

    For Ckw-style two-cell spectra the top cell must appear as a generator
    stem; a mismatch aborts with KeywordDegreeError.  Spectra not loaded are
    skipped.
    """
    for alias, word in (("C2h4", "sigmasq"), ("C2h5", "theta4"), ("C2h6", "theta5")):
        data = spectra.get(alias)
        if data is None:
            continue
        top = KEYWORDS[word] + 2
        stems = {g.degree.stem for g in data.generators}  # type: ignore[attr-defined]
        if top not in stems:
            raise KeywordDegreeError(
                f"{alias}: no generator at stem {top} = |{word}|+2; keyword table wrong?")


# ---------- maps ----------

MAP_KINDS = ("inclusion", "quotient", "boundary", "by_cell", "kahn_priddy",
             "hurewicz", "rp_quotient", "general")


@dataclass(frozen=True)
class MapAst:
    source: SpectrumAst
    target: SpectrumAst
    kind: str
    suspension: Optional[int]  # map lands in Sigma^k target; None when unresolved
    by_word: Optional[str] = None

    @property
    def name(self) -> str:
        base = f"{unparse(self.source)}__"
        if self.kind == "boundary":
            base += "Q_"
        base += unparse(self.target)
        if self.by_word is not None:
            base += f"_by_{self.by_word}"
        return base


def _multiset_contains(big: list[int], small: list[int]) -> bool:
    pool = list(big)
    for c in small:
        if c in pool:
            pool.remove(c)
        else:
            return False
    return True


def _inclusion_k(src: list[int], dst: list[int]) -> int:
    """src included in Sigma^k dst, bottom-anchored."""
    k = min(src) - min(dst)
    if _multiset_contains([c + k for c in dst], src):
        return k
    hits = sorted({cs - cd for cs in src for cd in dst})
    valid = [k for k in hits if _multiset_contains([c + k for c in dst], src)]
    if len(valid) == 1:
        return valid[0]
    raise InconsistentCells(f"no unique inclusion suspension: {src} into {dst}")


def _quotient_k(src: list[int], dst: list[int]) -> int:
    """Sigma^k dst is a quotient of src, top-anchored."""
    k = max(src) - max(dst)
    if _multiset_contains(src, [c + k for c in dst]):
        return k
    hits = sorted({cs - cd for cs in src for cd in dst})
    valid = [k for k in hits if _multiset_contains(src, [c + k for c in dst])]
    if len(valid) == 1:
        return valid[0]
    raise InconsistentCells(f"no unique quotient suspension: {src} onto {dst}")


def _is_rp_boundary(src: SpectrumAst, dst: SpectrumAst) -> bool:
    """RPn_l__RPp_q with p < q = n-1 < n < l is the boundary RPn_l__Q_RPp_l."""
    if src.kind != "rp" or dst.kind != "rp":
        return False
    n, l = src.ints
    p, q = dst.ints
    return p < q and q == n - 1 and n < l


def parse_map_name(text: str) -> MapAst:
    halves = text.split("__")
    if len(halves) != 2:
        raise Malformed(f"map name needs one '__': {text!r}")
    src_text, dst_text = halves
    source = parse_spectrum_name(src_text)

    by_word = None
    m = re.fullmatch(r"(.+)_by_([A-Za-z0-9]+)", dst_text)
    if m and m.group(2) in KEYWORDS:
        dst_text, by_word = m.group(1), m.group(2)

    boundary = dst_text.startswith("Q_")
    if boundary:
        dst_text = dst_text[2:]
    target = parse_spectrum_name(dst_text)

    if by_word is not None:
        src_cells = cells_of(source)
        dst_cells = cells_of(target)
        k = min(src_cells) - max(dst_cells) - KEYWORDS[by_word]
        return MapAst(source, target, "by_cell", k, by_word)
    if boundary:
        # cofseq X -> Y -> Sigma^q Z -> Sigma X; this is the third map
        try:
            q = _quotient_k(cells_of(target), cells_of(source))
            k: Optional[int] = 1 - q
        except (InconsistentCells, Unsupported):
            k = None
        return MapAst(source, target, "boundary", k)
    if unparse(source) == "RP1_256" and target.kind == "S0":
        return MapAst(source, target, "kahn_priddy", 0)
    if target.kind == "tmf" or (target.kind == "smash"
                                and target.parts[0].kind == "tmf"):
        kind = "hurewicz" if (source.kind == "S0" or target.kind == "smash") else "inclusion"
        return MapAst(source, target, kind, 0)
    if _is_rp_boundary(source, target):
        return MapAst(source, target, "rp_quotient", 1)

    src_cells = cells_of(source, bound=FPHI_DEFAULT_BOUND) \
        if source.kind != "tmf" else None
    dst_cells = cells_of(target, bound=FPHI_DEFAULT_BOUND) \
        if target.kind != "tmf" else None
    if src_cells is None or dst_cells is None:
        return MapAst(source, target, "general", None)
    if target.kind == "Sn" and len(src_cells) > 1:
        # Sn names carry their own suspension: the kept cell is dimension n
        if _multiset_contains(src_cells, dst_cells):
            return MapAst(source, target, "quotient", 0)
        raise InconsistentCells(f"{text!r}: cell {dst_cells[0]} absent from source")
    if len(src_cells) < len(dst_cells):
        return MapAst(source, target, "inclusion", _inclusion_k(src_cells, dst_cells))
    if len(src_cells) > len(dst_cells):
        return MapAst(source, target, "quotient", _quotient_k(src_cells, dst_cells))
    # equal counts: James-periodicity style equivalences and ad hoc maps
    hits = sorted({cs - cd for cs in src_cells for cd in dst_cells})
    for k in hits:
        if sorted(c + k for c in dst_cells) == sorted(src_cells):
            return MapAst(source, target, "general", k)
    return MapAst(source, target, "general", None)


# ---------- cofiber sequences ----------

@dataclass(frozen=True)
class CofseqRef:
    x: SpectrumAst
    y: SpectrumAst
    z: SpectrumAst
    leg: Optional[int] = None  # 0, 1, 2 for f, g, h; None for the whole sequence

    @property
    def name(self) -> str:
        base = f"{unparse(self.x)}__{unparse(self.y)}__{unparse(self.z)}"
        return base if self.leg is None else f"{base}:{self.leg}"


def parse_cofseq_ref(text: str) -> CofseqRef:
    leg: Optional[int] = None
    if ":" in text:
        text, leg_text = text.rsplit(":", 1)
        if leg_text not in ("0", "1", "2"):
            raise Malformed(f"cofseq leg must be 0, 1 or 2: {leg_text!r}")
        leg = int(leg_text)
    names = text.split("__")
    if len(names) != 3:
        raise Malformed(f"cofseq name needs X__Y__Z: {text!r}")
    x, y, z = (parse_spectrum_name(n) for n in names)
    return CofseqRef(x, y, z, leg)


def _multiset_sub(big: list[int], small: list[int]) -> Optional[list[int]]:
    pool = list(big)
    for c in small:
        if c in pool:
            pool.remove(c)
        else:
            return None
    return pool


def cofseq_shifts(ref: CofseqRef) -> tuple[int, int, int]:
    """Per-leg stem shifts (k_f, k_g, k_h) for X -> Y -> Z -> Sigma X.

    Solved from the triangle X -> Sigma^m Y -> Sigma^n Z -> Sigma X as a cell
    multiset equation; the h shift 1-n includes the +1 from Sigma X.
    """
    ycells = cells_of(ref.y)
    zcells = cells_of(ref.z)
    if not ref.x.infinite:
        xcells = cells_of(ref.x)
        solutions = []
        for m in sorted({cx - cy for cx in xcells for cy in ycells} | {0}):
            rest = _multiset_sub([c + m for c in ycells], xcells)
            if rest is None or not rest:
                continue
            n = min(rest) - min(zcells)
            if sorted(rest) == sorted(c + n for c in zcells):
                solutions.append((m, n))
        if not solutions:
            raise InconsistentCells(f"{ref.name}: cells do not assemble")
        solutions.sort(key=lambda mn: (abs(mn[0]), mn[0], mn[1]))
        m, n = solutions[0]
        return (m, n - m, 1 - n)
    # f is a quotient (Fphi-style): Sigma^(n-1) Z -> X -> Sigma^m Y
    for m in range(-2, 3):
        for n in range(-2, 3):
            rhs = sorted([c + n - 1 for c in zcells] + [c + m for c in ycells])
            xcells = cells_of(ref.x, bound=max(rhs))
            if sorted(xcells) == rhs:
                return (m, n - m, 1 - n)
    raise InconsistentCells(f"{ref.name}: cells do not assemble (infinite X)")


def check_cofseq_cells(ref: CofseqRef) -> tuple[int, int, int]:
    """Raise InconsistentCells unless the three spectra assemble; return shifts."""
    return cofseq_shifts(ref)
