"""Staircase bookkeeping for Adams and extension spectral sequences.

Each bidegree holds an ordered list of entries with linearly independent
bases.  Levels encode the fate of a class:

    1..4999        hit by a d_r differential (r = level); diff names the source
    9000           permanent cycle
    9001..10000    supports a d_r differential (r = 10000 - level); diff is
                   the target value, [NULL] when undetermined

All visible differentials are shorter than 1000, so supports levels live in
[9001, 10000] and 9000 stays a sentinel.  Differential values are cosets: two
values of d_r(x) must agree modulo B_{r-1} of the target bidegree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from . import gf2
from .algebra import UNKNOWN, BasisVec, BiDegree, SpectrumData
from .errors import Contradiction, DegreeMismatch, SentinelConflict, ShiftMismatch
from .errors import FormatError
from .formats import CofseqRow, SsRow, parse_index_vec, serialize_index_vec

PERMANENT_LEVEL = 9000
MAX_R = 999  # all visible nontrivial differentials are shorter than 1000


class LevelInfo(NamedTuple):
    kind: str  # "hit" | "supports" | "permanent"
    r: Optional[int]


def decode_level(level: int) -> LevelInfo:
    if 1 <= level <= 4999:
        return LevelInfo("hit", level)
    if level == PERMANENT_LEVEL:
        return LevelInfo("permanent", None)
    if 9001 <= level <= 10000:
        return LevelInfo("supports", 10000 - level)
    raise SentinelConflict(f"level {level} outside the legal encoding")


def encode_level(kind: str, r: Optional[int] = None) -> int:
    if kind == "permanent":
        return PERMANENT_LEVEL
    if kind == "hit":
        if r is None or not 1 <= r <= 4999:
            raise SentinelConflict(f"hit length {r} not encodable")
        return r
    if kind == "supports":
        if r is None or not 0 <= r <= MAX_R:
            raise SentinelConflict(f"supports length {r} collides with sentinels")
        return 10000 - r
    raise SentinelConflict(f"unknown level kind {kind!r}")


@dataclass
class SsEntry:
    base: BasisVec
    level: int
    diff: Optional[BasisVec]  # None = undetermined ([NULL])
    seq: int = 0  # insertion order; stable tiebreak inside one level
    synthesized: bool = False  # created as the mirror of another line

    def clone(self) -> "SsEntry":
        return SsEntry(self.base, self.level, self.diff, self.seq,
                       self.synthesized)


@dataclass
class Finding:
    name: str
    degree: BiDegree
    level: Optional[int]
    message: str

    def __str__(self) -> str:
        lvl = f" level={self.level}" if self.level is not None else ""
        return f"{self.name} {self.degree}{lvl}: {self.message}"


def _entry_sort_key(e: SsEntry) -> tuple[int, int]:
    return (e.level, e.seq)


def _combined_diff(entries: Sequence[SsEntry]):
    """XOR of diffs; UNKNOWN if any is undetermined."""
    acc: Optional[BasisVec] = None
    for e in entries:
        if e.diff is None:
            return UNKNOWN
        acc = e.diff if acc is None else (acc ^ e.diff)
    return acc


class _Status(NamedTuple):
    residual: int
    used: tuple[SsEntry, ...]

    @property
    def max_level(self) -> Optional[int]:
        return max((e.level for e in self.used), default=None)


def _status(entries: list[SsEntry], bits: int) -> _Status:
    """Express bits over the entry bases; track which entries get used."""
    used: list[SsEntry] = []
    # sequential elimination over the staircase, lowest level first
    work = [(e.base.bits, [e]) for e in entries]
    reduced: list[tuple[int, list[SsEntry]]] = []
    for vec, srcs in work:
        cur, cur_srcs = vec, list(srcs)
        for rvec, rsrcs in reduced:
            if cur & (rvec & -rvec):
                cur ^= rvec
                cur_srcs += rsrcs
        if cur:
            reduced.append((cur, cur_srcs))
    for rvec, rsrcs in reduced:
        if bits & (rvec & -rvec):
            bits ^= rvec
            used += rsrcs
    # entries used an even number of times cancel over F2
    keep = []
    for e in used:
        if e in keep:
            keep.remove(e)
        else:
            keep.append(e)
    return _Status(bits, tuple(keep))


class SsState:
    """Mutable staircase table for one spectrum's Adams spectral sequence."""

    def __init__(self, spectrum: SpectrumData):
        self.spectrum = spectrum
        self.table: dict[BiDegree, list[SsEntry]] = {}
        self._seq = 0
        self._synth = False

    # ---------- bookkeeping ----------

    def entries(self, degree: BiDegree) -> list[SsEntry]:
        return self.table.get(degree, [])

    def snapshot(self) -> "SsState":
        out = SsState(self.spectrum)
        out.table = {deg: [e.clone() for e in ents] for deg, ents in self.table.items()}
        out._seq = self._seq
        return out

    def _resort(self, degree: BiDegree) -> None:
        self.table[degree].sort(key=_entry_sort_key)

    def _append(self, degree: BiDegree, entry: SsEntry) -> None:
        entry.seq = self._seq
        entry.synthesized = self._synth
        self._seq += 1
        self.table.setdefault(degree, []).append(entry)
        self._resort(degree)

    def status(self, x: BasisVec) -> _Status:
        return _status(self.entries(x.degree), x.bits)

    # ---------- subspaces ----------

    def subspace_B(self, degree: BiDegree, r: Union[int, float]) -> list[int]:
        rows = [e.base.bits for e in self.entries(degree)
                if e.level < 5000 and e.level <= r]
        return gf2.echelon(rows)

    def subspace_Z(self, degree: BiDegree, r: Union[int, float]) -> list[int]:
        rows = []
        for e in self.entries(degree):
            if e.level < 10000 - r:
                rows.append(e.base.bits)
            elif (e.level == 10000 - r and e.diff is not None
                  and e.diff.is_zero):
                rows.append(e.base.bits)
        return gf2.echelon(rows)

    def B_inf(self, degree: BiDegree) -> list[int]:
        return self.subspace_B(degree, 4999)

    def Z_inf(self, degree: BiDegree) -> list[int]:
        rows = [e.base.bits for e in self.entries(degree)
                if e.level < 5000 or e.level == PERMANENT_LEVEL]
        return gf2.echelon(rows)

    # ---------- insertion ----------

    def _target_degree(self, degree: BiDegree, r: int) -> BiDegree:
        return BiDegree(degree.stem - 1, degree.s + r)

    def _source_degree(self, degree: BiDegree, r: int) -> BiDegree:
        return BiDegree(degree.stem + 1, degree.s - r)

    def _fmt(self, v: Optional[BasisVec], degree: BiDegree) -> str:
        shown = "[?]" if v is None else str(v)
        return f"{self.spectrum.name} ({degree.stem},{degree.s}) {shown}"

    def insert_differential(self, x: BasisVec, r: int,
                            dx: Optional[BasisVec], mirror: bool = True) -> None:
        """Record d_r(x) = dx (dx None for undetermined); Contradiction on clash."""
        if not 2 <= r <= MAX_R:
            raise SentinelConflict(f"Adams differential length {r} out of range")
        degree = x.degree
        target = self._target_degree(degree, r)
        if dx is not None and not dx.is_zero and dx.degree != target:
            raise DegreeMismatch(
                f"d_{r} of {degree} lands in {target}, got {dx.degree}")
        if x.is_zero:
            if dx is None or dx.is_zero:
                return
            if not gf2.in_span(dx.bits, self.subspace_B(target, r - 1)):
                raise Contradiction(
                    f"{self._fmt(dx, target)} is not in B_{r - 1}")
            return
        self._insert_support(degree, x, r, dx, mirror=mirror)

    def _insert_support(self, degree: BiDegree, x: BasisVec, r: int,
                        dx: Optional[BasisVec], mirror: bool) -> None:
        target = self._target_degree(degree, r)
        st = self.status(x)
        level = encode_level("supports", r)
        if st.residual:
            self._append(degree, SsEntry(x, level, dx))
        else:
            lmax = st.max_level
            assert lmax is not None
            kind, r_star = decode_level(lmax)
            tops = [e for e in st.used if e.level == lmax]
            if kind in ("hit", "permanent"):
                # x is already a boundary or permanent cycle: d_r(x) = 0
                self._require_zero_coset(dx, target, r, x)
                return
            assert kind == "supports" and r_star is not None
            if r_star > r:
                # x survives past page r, so d_r(x) = 0
                self._require_zero_coset(dx, target, r, x)
                return
            if r_star == r:
                combined = _combined_diff(tops)
                if dx is None:
                    return
                if combined is UNKNOWN:
                    if len(tops) == 1:
                        tops[0].diff = dx
                        self._mirror_if_needed(degree, x, r, dx, mirror)
                    return
                assert combined is None or isinstance(combined, BasisVec)
                old = combined.bits if isinstance(combined, BasisVec) else 0
                if not gf2.in_span(old ^ dx.bits, self.subspace_B(target, r - 1)):
                    raise Contradiction(
                        f"{self._fmt(dx, target)} is not in B_{r - 1}")
                return
            # r_star < r: x was only known to survive to an earlier page
            combined = _combined_diff(tops)
            old_target = self._target_degree(degree, r_star)
            if isinstance(combined, BasisVec) and not combined.is_zero and \
                    not gf2.in_span(combined.bits,
                                    self.subspace_B(old_target, r_star - 1)):
                raise Contradiction(
                    f"{self._fmt(x, degree)} dies on page {r_star}, "
                    f"cannot support d_{r}")
            if len(st.used) == 1:
                entry = tops[0]
                entry.level = level
                entry.diff = dx
                self._resort(degree)
            # combinations of several lines absorb the assertion unrefined
        self._mirror_if_needed(degree, x, r, dx, mirror)

    def _require_zero_coset(self, dx: Optional[BasisVec], target: BiDegree,
                            r: int, x: BasisVec) -> None:
        if dx is None or dx.is_zero:
            return
        if not gf2.in_span(dx.bits, self.subspace_B(target, r - 1)):
            raise Contradiction(f"{self._fmt(dx, target)} is not in B_{r - 1}")

    def _mirror_if_needed(self, degree: BiDegree, x: BasisVec, r: int,
                          dx: Optional[BasisVec], mirror: bool) -> None:
        if not mirror or dx is None or dx.is_zero:
            return
        target = self._target_degree(degree, r)
        if gf2.in_span(dx.bits, self.subspace_B(target, r - 1)):
            return  # value is zero as a coset; nothing new is hit
        was = self._synth
        self._synth = True
        try:
            self.insert_hit(dx, r, source=x, mirror=False)
        finally:
            self._synth = was

    def insert_hit(self, v: BasisVec, r: int, source: Optional[BasisVec],
                   mirror: bool = True) -> None:
        """Record that v is hit by a d_r differential from `source`."""
        if v.is_zero:
            return
        degree = v.degree
        src_degree = self._source_degree(degree, r)
        if source is not None and not source.is_zero and source.degree != src_degree:
            raise DegreeMismatch(
                f"d_{r} source for {degree} lives at {src_degree}, got {source.degree}")
        st = self.status(v)
        if st.residual:
            self._append(degree, SsEntry(v, encode_level("hit", r), source))
        else:
            lmax = st.max_level
            assert lmax is not None
            kind, r_star = decode_level(lmax)
            tops = [e for e in st.used if e.level == lmax]
            if kind == "hit":
                if r_star == r and len(tops) == 1 and source is not None:
                    old_src = tops[0].diff
                    if old_src is None:
                        tops[0].diff = source
                    elif not gf2.in_span(
                            old_src.bits ^ source.bits,
                            self.subspace_Z(src_degree, r)):
                        raise Contradiction(
                            f"{self._fmt(source, src_degree)} and "
                            f"{self._fmt(old_src, src_degree)} differ outside Z_{r}")
                elif r < r_star and len(st.used) == 1:
                    tops[0].level = encode_level("hit", r)
                    tops[0].diff = source
                    self._resort(degree)
                return  # already a boundary; earlier pages absorb later claims
            if kind == "permanent":
                if len(st.used) == 1:
                    tops[0].level = encode_level("hit", r)
                    tops[0].diff = source
                    self._resort(degree)
                return
            assert kind == "supports" and r_star is not None
            combined = _combined_diff(tops)
            if isinstance(combined, BasisVec) and not combined.is_zero and \
                    not gf2.in_span(
                        combined.bits,
                        self.subspace_B(self._target_degree(degree, r_star),
                                        r_star - 1)):
                raise Contradiction(
                    f"{self._fmt(v, degree)} supports a nonzero d_{r_star}, "
                    f"cannot be hit by d_{r}")
            if len(st.used) == 1:
                tops[0].level = encode_level("hit", r)
                tops[0].diff = source
                self._resort(degree)
        if mirror and source is not None and not source.is_zero:
            was = self._synth
            self._synth = True
            try:
                self._insert_support(src_degree, source, r, v, mirror=False)
            finally:
                self._synth = was

    def insert_permanent(self, x: BasisVec) -> None:
        if x.is_zero:
            return
        st = self.status(x)
        if st.residual:
            self._append(x.degree, SsEntry(x, PERMANENT_LEVEL, None))
            return
        lmax = st.max_level
        assert lmax is not None
        kind, r_star = decode_level(lmax)
        tops = [e for e in st.used if e.level == lmax]
        if kind in ("hit", "permanent"):
            return
        combined = _combined_diff(tops)
        if isinstance(combined, BasisVec) and not combined.is_zero and \
                not gf2.in_span(combined.bits,
                                self.subspace_B(self._target_degree(x.degree, r_star),
                                                r_star - 1)):
            raise Contradiction(
                f"{self._fmt(x, x.degree)} dies on page {r_star}, "
                f"cannot be a permanent cycle")
        if len(st.used) == 1:
            tops[0].level = PERMANENT_LEVEL
            tops[0].diff = None
            self._resort(x.degree)

    # ---------- differential evaluation ----------

    def d_value(self, x: BasisVec, r: int):
        """d_r(x) as recorded: BasisVec | UNKNOWN (zero vec means known zero)."""
        target = self._target_degree(x.degree, r)
        if x.is_zero:
            return BasisVec.zero(target)
        st = self.status(x)
        if st.residual:
            return UNKNOWN
        lmax = st.max_level
        kind, r_star = decode_level(lmax)  # type: ignore[arg-type]
        if kind in ("hit", "permanent"):
            return BasisVec.zero(target)
        if r_star > r:
            return BasisVec.zero(target)
        if r_star == r:
            combined = _combined_diff([e for e in st.used if e.level == lmax])
            if combined is UNKNOWN:
                return UNKNOWN
            return combined if combined is not None else BasisVec.zero(target)
        return UNKNOWN  # dies earlier or undetermined beyond its page

    def survives_to(self, x: BasisVec, r: int) -> bool:
        """x is an r-stage survivor: in Z_{r-1} and not killed earlier."""
        if x.is_zero:
            return False
        st = self.status(x)
        if st.residual:
            return False
        lmax = st.max_level
        kind, r_star = decode_level(lmax)  # type: ignore[arg-type]
        if kind == "permanent":
            return True
        if kind == "hit":
            return False  # boundaries are not candidates for new differentials
        if r_star >= r:
            return True
        combined = _combined_diff([e for e in st.used if e.level == lmax])
        return isinstance(combined, BasisVec) and combined.is_zero

    # ---------- rows ----------

    def dump_rows(self) -> list[SsRow]:
        rows = []
        for degree in sorted(self.table, key=lambda d: (d.stem, d.s)):
            for e in self.table[degree]:
                rows.append(SsRow(degree.stem, degree.s,
                                  serialize_index_vec(e.base),
                                  serialize_index_vec(e.diff),
                                  e.level))
        return rows


def build(spectrum: SpectrumData, rows: Iterable[SsRow],
          seed_rows: Iterable[SsRow] = (),
          mirrors: bool = True) -> tuple[SsState, list[Finding]]:
    """Replay rows (sorted by stem, s, level) into a state; collect violations.

    With mirrors=False both directions must be present in the rows; nothing
    is synthesized (chart tables ship fully mirrored).
    """
    state = SsState(spectrum)
    findings: list[Finding] = []
    tagged = [(r, False) for r in rows] + [(r, True) for r in seed_rows]
    ordered = sorted(tagged, key=lambda rt: (rt[0].stem, rt[0].s, rt[0].level))
    for row, is_seed in ordered:
        degree = row.degree
        try:
            info = decode_level(row.level)
        except SentinelConflict as err:
            findings.append(Finding(spectrum.name, degree, row.level, str(err)))
            continue
        dim = spectrum.dim(degree)
        try:
            base = parse_index_vec(row.base, degree)
        except FormatError as err:
            findings.append(Finding(spectrum.name, degree, row.level,
                                    f"bad base: {err}"))
            continue
        if base is UNKNOWN or base.is_zero:
            findings.append(Finding(spectrum.name, degree, row.level,
                                    "base must be a nonzero index list"))
            continue
        if any(i >= dim for i in base.indices):
            findings.append(Finding(spectrum.name, degree, row.level,
                                    f"base index out of range (dim {dim})"))
            continue
        file_entries = [e for e in state.entries(degree) if not e.synthesized]
        st = _status(file_entries, base.bits)
        if not st.residual and not is_seed:
            # seed rows may refine recorded lines; file rows must extend
            exact = (len(st.used) == 1 and st.used[0].base.bits == base.bits
                     and st.used[0].level == row.level)
            if not exact:
                findings.append(Finding(
                    spectrum.name, degree, row.level,
                    "base depends on earlier staircase lines"))
                continue
        try:
            if info.kind == "permanent":
                diff = parse_index_vec(row.diff, degree)
                if diff is not UNKNOWN and not diff.is_zero:
                    findings.append(Finding(spectrum.name, degree, row.level,
                                            "permanent cycle with nonzero diff"))
                    continue
                state.insert_permanent(base)
            elif info.kind == "supports":
                r = info.r
                assert r is not None
                if r < 2:
                    findings.append(Finding(spectrum.name, degree, row.level,
                                            f"Adams differentials need r >= 2"))
                    continue
                tdeg = BiDegree(degree.stem - 1, degree.s + r)
                diff = parse_index_vec(row.diff, tdeg)
                if diff is not UNKNOWN and any(i >= spectrum.dim(tdeg)
                                               for i in diff.indices):
                    findings.append(Finding(spectrum.name, degree, row.level,
                                            f"diff index out of range at {tdeg}"))
                    continue
                state.insert_differential(
                    base, r, None if diff is UNKNOWN else diff, mirror=mirrors)
            else:  # hit
                r = info.r
                assert r is not None
                if r < 2:
                    findings.append(Finding(spectrum.name, degree, row.level,
                                            f"Adams differentials need r >= 2"))
                    continue
                sdeg = BiDegree(degree.stem + 1, degree.s - r)
                diff = parse_index_vec(row.diff, sdeg)
                if diff is not UNKNOWN and any(i >= spectrum.dim(sdeg)
                                               for i in diff.indices):
                    findings.append(Finding(spectrum.name, degree, row.level,
                                            f"source index out of range at {sdeg}"))
                    continue
                state.insert_hit(base, r, None if diff is UNKNOWN else diff,
                                 mirror=mirrors)
        except (Contradiction, DegreeMismatch, SentinelConflict) as err:
            findings.append(Finding(spectrum.name, degree, row.level, str(err)))
            continue
        except FormatError as err:
            findings.append(Finding(spectrum.name, degree, row.level,
                                    f"bad row: {err}"))
            continue
        for entry in state.entries(degree):
            if entry.synthesized and entry.base.bits == base.bits \
                    and entry.level == row.level:
                entry.synthesized = False  # the file owns this line now
    findings.extend(crosscheck_d2(state))
    return state, findings


def crosscheck_d2(state: SsState) -> list[Finding]:
    """Basis-table d2 column vs the staircase, where both are known."""
    findings = []
    spectrum = state.spectrum
    for (degree, idx), col in sorted(spectrum.d2.items(),
                                     key=lambda kv: (kv[0][0].stem, kv[0][0].s, kv[0][1])):
        if col is UNKNOWN:
            continue
        unit = BasisVec(degree, (idx,))
        try:
            state.insert_differential(unit, 2, col)
        except Contradiction as err:
            findings.append(Finding(spectrum.name, degree, None,
                                    f"d2 column disagrees with ss rows: {err}"))
    # empty columns mean trivial d2: flag recorded nonzero d2 against them
    for degree in sorted(state.table, key=lambda d: (d.stem, d.s)):
        for i in range(spectrum.dim(degree)):
            key = (degree, i)
            if key in spectrum.d2 or degree not in spectrum.basis:
                continue
            val = state.d_value(BasisVec(degree, (i,)), 2)
            if isinstance(val, BasisVec) and not val.is_zero:
                if not gf2.in_span(val.bits, state.subspace_B(val.degree, 1)):
                    findings.append(Finding(
                        spectrum.name, degree, None,
                        f"basis d2 column empty but ss rows give d_2[{i}]={val}"))
    return findings


def check_consistency(state: SsState) -> list[Finding]:
    """Structural and coset checks on a frozen state."""
    findings: list[Finding] = []
    name = state.spectrum.name
    for degree, entries in sorted(state.table.items(), key=lambda kv: kv[0]):
        dim = state.spectrum.dim(degree)
        rows = []
        levels = []
        for e in entries:
            try:
                info = decode_level(e.level)
            except SentinelConflict as err:
                findings.append(Finding(name, degree, e.level, str(err)))
                continue
            if info.r is not None and info.r > MAX_R:
                findings.append(Finding(name, degree, e.level,
                                        f"differential length {info.r} >= 1000"))
            if any(i >= dim for i in e.base.indices):
                findings.append(Finding(name, degree, e.level,
                                        f"base index out of range (dim {dim})"))
            if e.base.is_zero:
                findings.append(Finding(name, degree, e.level, "zero base"))
            if e.diff is not None and not e.diff.is_zero:
                if info.kind == "supports":
                    want = BiDegree(degree.stem - 1, degree.s + info.r)
                elif info.kind == "hit":
                    want = BiDegree(degree.stem + 1, degree.s - info.r)
                else:
                    findings.append(Finding(name, degree, e.level,
                                            "permanent cycle with nonzero diff"))
                    continue
                if e.diff.degree != want:
                    findings.append(Finding(
                        name, degree, e.level,
                        f"diff degree {e.diff.degree}, law requires {want}"))
                elif any(i >= state.spectrum.dim(want) for i in e.diff.indices):
                    findings.append(Finding(name, degree, e.level,
                                            f"diff index out of range at {want}"))
            rows.append(e.base.bits)
            levels.append(e.level)
        if gf2.rank(rows) != len(rows):
            findings.append(Finding(name, degree, None,
                                    "staircase bases linearly dependent"))
        if levels != sorted(levels):
            findings.append(Finding(name, degree, None,
                                    "entries out of staircase order"))
    # replay the dump into a fresh state: coset violations surface as findings
    rows = [r for r in state.dump_rows()]
    _, replay_findings = build(state.spectrum, rows)
    findings.extend(replay_findings)
    return findings


# ---------- extension spectral sequences ----------

@dataclass
class CofseqState:
    """Extension bookkeeping for a cofiber sequence X -> Y -> Z -> Sigma X.

    `legs` are the Adams states of X, Y, Z; `shifts` the per-leg stem shifts
    (the h shift already includes the +1 from Sigma X).  An iC=i entry with
    supports level r names a target in component i+1 mod 3 at
    (stem - shifts[i], s + r).
    """

    name: str
    legs: tuple[SsState, SsState, SsState]
    shifts: tuple[int, int, int]
    table: dict[tuple[int, BiDegree], list[SsEntry]] = field(default_factory=dict)
    _seq: int = 0

    def _stamp(self, entry: SsEntry) -> SsEntry:
        entry.seq = self._seq
        self._seq += 1
        return entry

    def entries(self, iC: int, degree: BiDegree) -> list[SsEntry]:
        return self.table.get((iC, degree), [])

    def snapshot(self) -> "CofseqState":
        out = CofseqState(self.name, self.legs, self.shifts)
        out.table = {k: [e.clone() for e in v] for k, v in self.table.items()}
        out._seq = self._seq
        return out

    def leg_name(self, iC: int) -> str:
        return self.legs[iC].spectrum.name

    def target_degree(self, iC: int, degree: BiDegree, r: int) -> BiDegree:
        return BiDegree(degree.stem - self.shifts[iC], degree.s + r)

    def source_degree(self, iC: int, degree: BiDegree, r: int) -> BiDegree:
        prev = (iC - 1) % 3
        return BiDegree(degree.stem + self.shifts[prev], degree.s - r)

    # B^f_r at a component bidegree: Adams B_inf plus recorded extension hits
    def subspace_Bf(self, iC: int, degree: BiDegree, r: int) -> list[int]:
        rows = list(self.legs[iC].B_inf(degree))
        if r >= 0:
            rows += [e.base.bits for e in self.entries(iC, degree)
                     if e.level < 5000 and e.level <= max(r, 0)]
        return gf2.echelon(rows)

    def _comparison_space(self, iC: int, degree: BiDegree, r: int) -> list[int]:
        """Coset modulus for d_r values: B^f_{r-1} when r>0, Adams B_inf at r=0."""
        if r > 0:
            return self.subspace_Bf(iC, degree, r - 1)
        return self.legs[iC].B_inf(degree)

    def _fmt(self, iC: int, v: BasisVec) -> str:
        return f"{self.leg_name(iC)} ({v.degree.stem},{v.degree.s}) {v}"

    def insert_extension(self, iC: int, x: BasisVec, r: int,
                         dx: Optional[BasisVec]) -> None:
        if iC not in (0, 1, 2):
            raise ShiftMismatch(f"iC must be 0, 1 or 2, got {iC}")
        if not 0 <= r <= MAX_R:
            raise SentinelConflict(f"extension jump {r} out of range")
        degree = x.degree
        j = (iC + 1) % 3
        target = self.target_degree(iC, degree, r)
        if dx is not None and not dx.is_zero and dx.degree != target:
            raise ShiftMismatch(
                f"{self.name} leg {iC}: d_{r} of {degree} lands in {target}, "
                f"got {dx.degree}")
        if x.is_zero:
            if dx is None or dx.is_zero:
                return
            if not gf2.in_span(dx.bits, self._comparison_space(j, target, r)):
                raise Contradiction(
                    f"{self._fmt(j, dx)} is not in B_{r - 1}^f" if r > 0 else
                    f"{self._fmt(j, dx)} is not in B_inf")
            return
        # positive-evidence check: x must not be known to die in its Adams SS
        leg = self.legs[iC]
        st = leg.status(x)
        if not st.residual and st.used:
            lmax = st.max_level
            kind, r_star = decode_level(lmax)  # type: ignore[arg-type]
            if kind == "supports":
                combined = _combined_diff(
                    [e for e in st.used if e.level == lmax])
                if isinstance(combined, BasisVec) and not combined.is_zero and \
                        not gf2.in_span(
                            combined.bits,
                            leg.subspace_B(
                                leg._target_degree(degree, r_star), r_star - 1)):
                    raise Contradiction(
                        f"{self._fmt(iC, x)} dies on page {r_star}, "
                        f"cannot carry an extension")
        self._insert_ext_support(iC, x, r, dx, mirror=True)

    def _insert_ext_support(self, iC: int, x: BasisVec, r: int,
                            dx: Optional[BasisVec], mirror: bool) -> None:
        degree = x.degree
        j = (iC + 1) % 3
        target = self.target_degree(iC, degree, r)
        key = (iC, degree)
        entries = self.table.setdefault(key, [])
        st = _status(entries, x.bits)
        level = encode_level("supports", r)
        if st.residual:
            entries.append(self._stamp(SsEntry(x, level, dx)))
            entries.sort(key=_entry_sort_key)
        else:
            lmax = st.max_level
            assert lmax is not None
            kind, r_star = decode_level(lmax)
            tops = [e for e in st.used if e.level == lmax]
            if kind in ("hit", "permanent"):
                self._require_zero(j, dx, target, r)
                return
            assert r_star is not None
            if r_star > r:
                self._require_zero(j, dx, target, r)
                return
            if r_star == r:
                if dx is None:
                    return
                combined = _combined_diff(tops)
                if combined is UNKNOWN:
                    if len(tops) == 1:
                        tops[0].diff = dx
                        self._ext_mirror(iC, x, r, dx, mirror)
                    return
                old = combined.bits if isinstance(combined, BasisVec) else 0
                if not gf2.in_span(old ^ dx.bits,
                                   self._comparison_space(j, target, r)):
                    raise Contradiction(
                        f"{self._fmt(j, dx)} is not in "
                        f"{'B_%d^f' % (r - 1) if r > 0 else 'B_inf'}")
                return
            if len(st.used) == 1:
                tops[0].level = level
                tops[0].diff = dx
                entries.sort(key=_entry_sort_key)
        self._ext_mirror(iC, x, r, dx, mirror)

    def _require_zero(self, j: int, dx: Optional[BasisVec], target: BiDegree,
                      r: int) -> None:
        if dx is None or dx.is_zero:
            return
        if not gf2.in_span(dx.bits, self._comparison_space(j, target, r)):
            raise Contradiction(
                f"{self._fmt(j, dx)} is not in "
                f"{'B_%d^f' % (r - 1) if r > 0 else 'B_inf'}")

    def _ext_mirror(self, iC: int, x: BasisVec, r: int,
                    dx: Optional[BasisVec], mirror: bool) -> None:
        # r = 0 hits are not encodable as levels; the support entry stands alone
        if not mirror or dx is None or dx.is_zero or r < 1:
            return
        j = (iC + 1) % 3
        target = dx.degree
        if gf2.in_span(dx.bits, self._comparison_space(j, target, r)):
            return
        key = (j, target)
        entries = self.table.setdefault(key, [])
        st = _status(entries, dx.bits)
        if st.residual:
            entries.append(self._stamp(SsEntry(dx, encode_level("hit", r), x)))
            entries.sort(key=_entry_sort_key)
        # recorded targets absorb repeats; source coset checks live on supports

    def dump_rows(self) -> list[CofseqRow]:
        rows = []
        for (iC, degree) in sorted(self.table, key=lambda k: (k[0], k[1])):
            for e in self.table[(iC, degree)]:
                rows.append(CofseqRow(
                    iC, degree.stem, degree.s,
                    ",".join(str(i) for i in e.base.indices),
                    serialize_index_vec(e.diff) if e.diff is not None else "[NULL]",
                    e.level))
        return rows


def build_cofseq(name: str, legs: tuple[SsState, SsState, SsState],
                 shifts: tuple[int, int, int],
                 rows: Iterable[CofseqRow]) -> tuple[CofseqState, list[Finding]]:
    state = CofseqState(name, legs, shifts)
    findings: list[Finding] = []
    ordered = sorted(rows, key=lambda r: (r.iC, r.stem, r.s, r.level))
    for row in ordered:
        degree = row.degree
        spectrum = legs[row.iC].spectrum
        try:
            info = decode_level(row.level)
        except SentinelConflict as err:
            findings.append(Finding(f"{name}:{row.iC}", degree, row.level, str(err)))
            continue
        base = parse_index_vec(row.base, degree)
        if base is UNKNOWN or base.is_zero or any(
                i >= spectrum.dim(degree) for i in base.indices):
            findings.append(Finding(f"{name}:{row.iC}", degree, row.level,
                                    "bad base index list"))
            continue
        try:
            if info.kind == "permanent":
                findings.append(Finding(f"{name}:{row.iC}", degree, row.level,
                                        "level 9000 is not used in cofseq tables"))
            elif info.kind == "supports":
                r = info.r
                assert r is not None
                tdeg = state.target_degree(row.iC, degree, r)
                tspec = legs[(row.iC + 1) % 3].spectrum
                diff = parse_index_vec(row.diff, tdeg)
                if diff is not UNKNOWN and any(i >= tspec.dim(tdeg)
                                               for i in diff.indices):
                    findings.append(Finding(f"{name}:{row.iC}", degree, row.level,
                                            f"diff index out of range at {tdeg}"))
                    continue
                state.insert_extension(row.iC, base, r,
                                       None if diff is UNKNOWN else diff)
            else:  # hit by an extension from component iC-1
                r = info.r
                assert r is not None
                sdeg = state.source_degree(row.iC, degree, r)
                prev = (row.iC - 1) % 3
                sspec = legs[prev].spectrum
                diff = parse_index_vec(row.diff, sdeg)
                if diff is not UNKNOWN and any(i >= sspec.dim(sdeg)
                                               for i in diff.indices):
                    findings.append(Finding(f"{name}:{row.iC}", degree, row.level,
                                            f"source index out of range at {sdeg}"))
                    continue
                if diff is UNKNOWN:
                    key = (row.iC, degree)
                    entries = state.table.setdefault(key, [])
                    st = _status(entries, base.bits)
                    if st.residual:
                        entries.append(state._stamp(SsEntry(base, row.level, None)))
                        entries.sort(key=_entry_sort_key)
                else:
                    state.insert_extension(prev, diff, r, base)
        except (Contradiction, ShiftMismatch, SentinelConflict) as err:
            findings.append(Finding(f"{name}:{row.iC}", degree, row.level, str(err)))
    return state, findings
