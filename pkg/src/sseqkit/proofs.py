"""Proof-forest reconstruction and verification for the Table of Proofs.

Rows nest like a latex itemize: T/TI rows open branches at their depth,
D/DI rows close the trailing sibling group into a conclusion, every other
reason is a leaf.  Blocks end when depth returns to 0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from . import gf2
from .algebra import BasisVec, BiDegree, UNKNOWN
from .deduce import (
    DeductionContext,
    Hypothesis,
    candidates,
    degree_reason_trivial,
    mul_vec,
    propagate,
)
from .errors import (
    BudgetExhausted,
    Contradiction,
    MalformedNesting,
    NotASurvivor,
)
from .formats import ProofRow, parse_index_vec
from .naming import parse_cofseq_ref, parse_spectrum_name
from .ss import CofseqState, SsState

LEAF_REASONS = frozenset({"d2", "N", "G", "XX", "XY", "ToCs", "OutCsI", "CsCm",
                          "Syn", "SynCs", "SynIn", "GI"})

# outcomes, from best to worst
OK = "ok"
UNCONFIRMED = "unconfirmed"  # checked mechanically but not reproducible here
SKIPPED = "skipped"          # inputs not loaded: structural checks only
FAILED = "failed"


@dataclass
class ProofNode:
    row: ProofRow
    children: list["ProofNode"] = field(default_factory=list)

    def walk(self) -> Iterator["ProofNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def shape(self):
        """(reason, [child shapes]) for structure assertions."""
        return (self.row.reason, [c.shape() for c in self.children])


def build_forest(rows: Iterable[ProofRow]) -> list[ProofNode]:
    """Stack-based reconstruction of the proof forest from rows in file order."""
    finished: dict[int, list[ProofNode]] = {}
    open_stack: list[ProofNode] = []
    roots: list[ProofNode] = []

    def close_to(depth: int) -> None:
        while open_stack and open_stack[-1].row.depth >= depth:
            node = open_stack.pop()
            node.children = finished.pop(node.row.depth + 1, [])
            finished.setdefault(node.row.depth, []).append(node)

    def context_depth() -> int:
        return open_stack[-1].row.depth if open_stack else -1

    for row in rows:
        d = row.depth
        if row.reason in ("T", "TI"):
            close_to(d)
            if d > context_depth() + 1 and d > 0 and not (
                    not open_stack and d == 1):
                raise MalformedNesting(f"row {row.id}: depth jumps to {d}")
            open_stack.append(ProofNode(row))
        elif row.reason in ("D", "DI"):
            close_to(d + 1)
            group = finished.pop(d + 1, [])
            # the conclusion closes the trailing run of trials
            take = []
            while group and group[-1].row.reason in ("T", "TI"):
                take.append(group.pop())
            take.reverse()
            if group:
                finished[d + 1] = group
            node = ProofNode(row, take)
            if open_stack and open_stack[-1].row.depth == d:
                finished.setdefault(d + 1, []).append(node)
            else:
                finished.setdefault(d, []).append(node)
        else:
            if row.reason not in LEAF_REASONS:
                raise MalformedNesting(f"row {row.id}: unknown reason {row.reason}")
            close_to(d)
            finished.setdefault(d, []).append(node := ProofNode(row))
        if row.depth == 0:
            close_to(0)
            roots.extend(finished.pop(0, []))
    close_to(0)
    roots.extend(finished.pop(0, []))
    if finished:
        raise MalformedNesting(f"dangling rows at depths {sorted(finished)}")
    return roots


def split_blocks(rows: Iterable[ProofRow]) -> Iterator[list[ProofRow]]:
    """Blocks are delimited by depth returning to 0 (D/DI or a depth-0 leaf)."""
    block: list[ProofRow] = []
    for row in rows:
        block.append(row)
        if row.depth == 0:
            yield block
            block = []
    if block:
        yield block


# ---------- verification ----------

@dataclass
class VerifyFinding:
    row_id: int
    reason: str
    outcome: str
    message: str

    def __str__(self) -> str:
        return f"row {self.row_id} [{self.reason}] {self.outcome}: {self.message}"


_INFO_REF = re.compile(
    r"(?P<name>[A-Za-z0-9_]+) \((?P<stem>-?\d+),\s*(?P<s>-?\d+)\) "
    r"\[(?P<idx>[0-9, ]*)\]")


def extract_info_refs(info: str) -> list[tuple[str, int, int, tuple[int, ...]]]:
    """Recognize the "X (stem, s) [i]" element syntax inside info prose."""
    out = []
    for m in _INFO_REF.finditer(info):
        idx = tuple(int(t) for t in m.group("idx").replace(" ", "").split(",")
                    if t != "")
        out.append((m.group("name"), int(m.group("stem")), int(m.group("s")), idx))
    return out


@dataclass
class VerifierContext:
    states: dict[str, SsState] = field(default_factory=dict)
    cofseqs: dict[str, CofseqState] = field(default_factory=dict)
    deduction: Optional[DeductionContext] = None
    null_compositions: frozenset[tuple[str, str]] = frozenset()

    def state_for(self, name: str) -> Optional[SsState]:
        return self.states.get(name)


def _row_vectors(row: ProofRow, state: SsState):
    """(x, dx) as located vectors; None entries when unparseable/[NULL]."""
    if row.dx_keyed:
        dx_deg = BiDegree(row.stem, row.s)
        x_deg = BiDegree(row.stem + 1, row.s - row.r)
    else:
        x_deg = BiDegree(row.stem, row.s)
        dx_deg = BiDegree(row.stem - 1, row.s + row.r)
    x = parse_index_vec(row.x, x_deg)
    dx = parse_index_vec(row.dx, dx_deg)
    return (None if x is UNKNOWN else x), (None if dx is UNKNOWN else dx)


def _safe_row_vectors(row: ProofRow, state: SsState):
    try:
        return _row_vectors(row, state)
    except Exception as err:
        raise _BadRow(f"unparseable x/dx: {err}")


class _BadRow(Exception):
    pass


def verify_node(node: ProofNode, ctx: VerifierContext) -> list[VerifyFinding]:
    """Per-reason checks; aggregates and never aborts on first failure."""
    findings = [f for child in node.children for f in verify_node(child, ctx)]
    row = node.row
    out = lambda outcome, msg: findings.append(
        VerifyFinding(row.id, row.reason, outcome, msg))

    if row.t != row.stem + row.s:
        out(FAILED, f"t={row.t} but stem+s={row.stem + row.s}")
        return findings

    is_cofseq = ":" in row.name
    try:
        if is_cofseq:
            parse_cofseq_ref(row.name)
        else:
            parse_spectrum_name(row.name)
    except Exception as err:
        out(FAILED, f"bad name {row.name!r}: {err}")
        return findings

    if is_cofseq:
        findings.extend(_verify_cofseq_row(node, ctx))
        return findings

    state = ctx.state_for(row.name)
    if state is None:
        out(SKIPPED, "spectrum not loaded; structural checks only")
        return findings
    try:
        x, dx = _safe_row_vectors(row, state)
    except _BadRow as err:
        out(FAILED, str(err))
        return findings
    spectrum = state.spectrum
    for vec, label in ((x, "x"), (dx, "dx")):
        if vec is not None and any(i >= spectrum.dim(vec.degree)
                                   for i in vec.indices):
            out(FAILED, f"{label} index out of range at {vec.degree}")
            return findings

    reason = row.reason
    if reason == "d2":
        findings.extend(_verify_d2(row, state, x, dx))
    elif reason in ("G", "GI"):
        findings.extend(_verify_degree_reason(row, state, x, dx))
    elif reason == "N":
        findings.extend(_verify_naturality(row, state, ctx, x, dx))
    elif reason == "XX":
        findings.extend(_verify_square(row, state, x, dx))
    elif reason == "XY":
        findings.extend(_verify_xy(row, state, ctx, x, dx))
    elif reason in ("T", "TI"):
        findings.extend(_verify_trial(node, state, ctx, x, dx))
    elif reason in ("D", "DI"):
        findings.extend(_verify_conclusion(node, state, ctx, x, dx))
    elif reason in ("Syn",):
        out(OK, "structural only (generalized Leibniz hypotheses not re-derived)")
    else:
        out(OK, "structural only")

    if row.info:
        for name, stem, s, idx in extract_info_refs(row.info):
            st = ctx.state_for(name)
            if st is None:
                continue
            dim = st.spectrum.dim(BiDegree(stem, s))
            if any(i >= dim for i in idx):
                out(FAILED, f"info references {name} ({stem},{s}) "
                            f"[{','.join(map(str, idx))}] beyond dim {dim}")
    return findings


def _verify_d2(row, state, x, dx):
    if x is None or dx is None:
        return [VerifyFinding(row.id, row.reason, FAILED, "d2 rows need x and dx")]
    if row.r != 2:
        return [VerifyFinding(row.id, row.reason, FAILED, f"d2 row with r={row.r}")]
    spectrum = state.spectrum
    acc = BasisVec.zero(dx.degree)
    for i in x.indices:
        val = spectrum.d2_of(x.degree, i)
        if val is UNKNOWN:
            return [VerifyFinding(row.id, row.reason, SKIPPED,
                                  f"d2 of basis index {i} not computed")]
        if not val.is_zero:
            acc = acc ^ val
    if acc.bits == dx.bits:
        return [VerifyFinding(row.id, row.reason, OK, "matches the basis d2 column")]
    return [VerifyFinding(row.id, row.reason, FAILED,
                          f"basis d2 column gives {acc}, row says {dx}")]


def _verify_degree_reason(row, state, x, dx):
    if row.reason == "G":
        if x is None:
            return [VerifyFinding(row.id, row.reason, FAILED, "G rows need x")]
        if degree_reason_trivial(state, x, row.r):
            return [VerifyFinding(row.id, row.reason, OK, "target space is zero")]
        return [VerifyFinding(row.id, row.reason, FAILED,
                              "target bidegree admits nonzero values")]
    # GI: the space of possible sources of dx must be trivial
    src_deg = BiDegree(row.stem + 1, row.s - row.r)
    z_prev = state.subspace_Z(src_deg, row.r - 1)
    z_cur = state.subspace_Z(src_deg, row.r)
    if len(z_prev) == len(z_cur):
        return [VerifyFinding(row.id, row.reason, OK, "source space is trivial")]
    return [VerifyFinding(row.id, row.reason, FAILED,
                          "sources of length-r differentials exist")]


def _verify_naturality(row, state, ctx, x, dx):
    if ctx.deduction is None:
        return [VerifyFinding(row.id, row.reason, SKIPPED, "no maps loaded")]
    if x is None:
        return [VerifyFinding(row.id, row.reason, FAILED, "N rows need x")]
    from .algebra import apply_map, vec_to_element
    for (src, dst), mapdata in sorted(ctx.deduction.maps.items()):
        if dst != row.name or src not in ctx.deduction.states:
            continue
        sstate = ctx.deduction.states[src]
        sspec = sstate.spectrum
        k, af = mapdata.shift(sspec, state.spectrum)
        pre_deg = BiDegree(x.degree.stem + k, x.degree.s - af)
        for entry in sstate.entries(pre_deg):
            v = sstate.d_value(entry.base, row.r)
            if v is UNKNOWN or (isinstance(v, BasisVec) and v.is_zero
                                and dx is not None and not dx.is_zero):
                continue
            try:
                fx = apply_map(mapdata, vec_to_element(entry.base, sspec),
                               sspec, state.spectrum)
                fv = apply_map(mapdata, vec_to_element(v, sspec),
                               sspec, state.spectrum) if not v.is_zero else None
            except Exception:
                continue
            if fx.bits != x.bits:
                continue
            want = dx.bits if dx is not None else 0
            got = fv.bits if fv is not None else 0
            b = state.subspace_B(BiDegree(x.degree.stem - 1,
                                          x.degree.s + row.r), row.r - 1)
            if gf2.in_span(want ^ got, b):
                return [VerifyFinding(row.id, row.reason, OK,
                                      f"natural image along {src}__{dst}")]
    return [VerifyFinding(row.id, row.reason, UNCONFIRMED,
                          "no loaded map reproduces the differential")]


def _verify_square(row, state, x, dx):
    if x is None:
        return [VerifyFinding(row.id, row.reason, FAILED, "XX rows need x")]
    if dx is not None and not dx.is_zero:
        return [VerifyFinding(row.id, row.reason, FAILED,
                              "the square rule only yields zero values")]
    if row.stem % 2 or row.s % 2:
        return [VerifyFinding(row.id, row.reason, FAILED,
                              "x is not a square for degree reasons")]
    half = BiDegree(row.stem // 2, row.s // 2)
    dim = state.spectrum.dim(half)
    if dim == 0 or dim > 12:
        return [VerifyFinding(row.id, row.reason, SKIPPED,
                              f"no tractable square root space at {half}")]
    for bits in range(1, 1 << dim):
        w = BasisVec.from_bits(half, bits)
        try:
            if mul_vec(w, w, state.spectrum).bits != x.bits:
                continue
        except Exception:
            continue
        prev = state.d_value(w, row.r - 1)
        if isinstance(prev, BasisVec) and prev.is_zero:
            return [VerifyFinding(row.id, row.reason, OK,
                                  f"x = w^2 with d_{row.r - 1}(w) = 0")]
    return [VerifyFinding(row.id, row.reason, UNCONFIRMED,
                          "no recorded square root with a vanishing prior page")]


def _verify_xy(row, state, ctx, x, dx):
    if ctx.deduction is None or x is None:
        return [VerifyFinding(row.id, row.reason, SKIPPED, "needs loaded algebra")]
    from .algebra import mul, vec_to_element
    from .deduce import xy_invariant_value

    work = ctx.deduction
    name = row.name
    spec = state.spectrum
    for partner in work.partners_of(name):
        pstate = work.states[partner]
        pspec = pstate.spectrum
        for pdeg in sorted(pstate.table):
            for entry in pstate.entries(pdeg):
                wdeg = BiDegree(row.stem - pdeg.stem, row.s - pdeg.s)
                wdim = spec.dim(wdeg)
                if wdim == 0 or wdim > 10:
                    continue
                for bits in range(1, 1 << wdim):
                    w = BasisVec.from_bits(wdeg, bits)
                    try:
                        prod = mul(vec_to_element(w, spec),
                                   vec_to_element(entry.base, pspec), spec)
                        if prod.bits != x.bits:
                            continue
                    except Exception:
                        continue
                    res = xy_invariant_value(work, name, w, row.r,
                                             partner, entry.base)
                    if res is None:
                        continue
                    xy, dxy = res
                    b = state.subspace_B(dxy.degree, row.r - 1)
                    want = dx.bits if dx is not None else 0
                    if gf2.in_span(dxy.bits ^ want, b):
                        return [VerifyFinding(row.id, row.reason, OK,
                                              "candidate-independent value")]
    return [VerifyFinding(row.id, row.reason, UNCONFIRMED,
                          "no decomposition witnesses the XY rule")]


def _verify_trial(node, state, ctx, x, dx):
    row = node.row
    if ctx.deduction is None:
        return [VerifyFinding(row.id, row.reason, SKIPPED,
                              "no deduction context; structural only")]
    if x is None:
        return [VerifyFinding(row.id, row.reason, FAILED, "T rows need x")]
    value = dx if dx is not None else BasisVec.zero(
        BiDegree(row.stem - 1, row.s + row.r) if not row.dx_keyed
        else BiDegree(row.stem, row.s))
    try:
        res = propagate(ctx.deduction, Hypothesis(row.name, x, row.r, value))
    except BudgetExhausted:
        return [VerifyFinding(row.id, row.reason, UNCONFIRMED, "budget exhausted")]
    except Contradiction as err:
        return [VerifyFinding(row.id, row.reason, OK, f"rejected on insert: {err}")]
    except NotASurvivor as err:
        return [VerifyFinding(row.id, row.reason, SKIPPED, str(err))]
    if node.children:
        # nested trials refute this branch; nothing direct to replay
        return [VerifyFinding(row.id, row.reason, OK,
                              "refuted through its nested trials")]
    if not res.consistent:
        return [VerifyFinding(row.id, row.reason, OK, "contradiction replayed")]
    return [VerifyFinding(row.id, row.reason, UNCONFIRMED,
                          "propagation here stays consistent")]


def _verify_conclusion(node, state, ctx, x, dx):
    row = node.row
    if x is None:
        return [VerifyFinding(row.id, row.reason, FAILED, "D rows need x")]
    target = BiDegree(row.stem - 1, row.s + row.r) if not row.dx_keyed \
        else BiDegree(row.stem, row.s)
    conclusion = dx if dx is not None else BasisVec.zero(target)
    try:
        cands = candidates(state, x, row.r)
    except NotASurvivor as err:
        return [VerifyFinding(row.id, row.reason, SKIPPED, str(err))]
    b = state.subspace_B(target, row.r - 1)
    canon = lambda v: gf2.reduce_vec(v.bits, b)
    tried = set()
    for child in node.children:
        if child.row.reason not in ("T", "TI"):
            continue
        _, cdx = _row_vectors(child.row, state)
        tried.add(canon(cdx if cdx is not None else BasisVec.zero(target)))
    tried.add(canon(conclusion))
    want = {canon(c) for c in cands}
    if tried == want:
        outcome = [VerifyFinding(row.id, row.reason, OK,
                                 "trials plus conclusion exhaust the candidates")]
    elif tried < want:
        missing = len(want) - len(tried)
        outcome = [VerifyFinding(row.id, row.reason, FAILED,
                                 f"IncompleteEnumeration: {missing} candidate"
                                 f"{'s' if missing != 1 else ''} never tried")]
    else:
        outcome = [VerifyFinding(row.id, row.reason, FAILED,
                                 "trials outside the candidate coset set")]
    recorded = state.d_value(x, row.r)
    if isinstance(recorded, BasisVec):
        if not gf2.in_span(recorded.bits ^ conclusion.bits, b):
            outcome.append(VerifyFinding(row.id, row.reason, FAILED,
                                         f"state records d_{row.r}{x}={recorded}"))
    return outcome


def _verify_cofseq_row(node, ctx):
    row = node.row
    ref = parse_cofseq_ref(row.name)
    base = row.name.rsplit(":", 1)[0]
    cstate = ctx.cofseqs.get(base)
    if cstate is None:
        return [VerifyFinding(row.id, row.reason, SKIPPED,
                              "cofiber sequence not loaded; structural only")]
    leg = ref.leg if ref.leg is not None else 0
    # extensions are recorded on the leg's source component; dx-keyed rows
    # state the target's degree instead of the source's
    spectrum = cstate.legs[leg].spectrum
    if row.dx_keyed:
        target = BiDegree(row.stem, row.s)
        x_deg = BiDegree(row.stem + cstate.shifts[leg], row.s - row.r)
    else:
        x_deg = BiDegree(row.stem, row.s)
        target = cstate.target_degree(leg, x_deg, row.r)
    try:
        x = parse_index_vec(row.x, x_deg)
    except Exception as err:
        return [VerifyFinding(row.id, row.reason, FAILED, f"bad x: {err}")]
    if x is UNKNOWN:
        return [VerifyFinding(row.id, row.reason, FAILED, "x must be an index list")]
    if any(i >= spectrum.dim(x_deg) for i in x.indices):
        return [VerifyFinding(row.id, row.reason, FAILED,
                              f"x index out of range at {x_deg}")]
    tspec = cstate.legs[(leg + 1) % 3].spectrum
    try:
        dx = parse_index_vec(row.dx, target)
    except Exception as err:
        return [VerifyFinding(row.id, row.reason, FAILED, f"bad dx: {err}")]
    if dx is not UNKNOWN and any(i >= tspec.dim(target) for i in dx.indices):
        return [VerifyFinding(row.id, row.reason, FAILED,
                              f"dx index out of range at {target}")]
    if row.reason == "CsCm" and ctx.null_compositions and row.info:
        mentioned = [pair for pair in ctx.null_compositions
                     if pair[0] in row.info and pair[1] in row.info]
        if not mentioned:
            return [VerifyFinding(row.id, row.reason, UNCONFIRMED,
                                  "no listed null composition in the info text")]
        return [VerifyFinding(row.id, row.reason, OK,
                              f"null composition {mentioned[0][0]}*"
                              f"{mentioned[0][1]} is on file")]
    if row.reason in ("D", "DI", "ToCs", "SynCs", "SynIn", "CsCm", "OutCsI"):
        return [VerifyFinding(row.id, row.reason, OK,
                              "degree arithmetic checks out")]
    return [VerifyFinding(row.id, row.reason, OK, "structural only")]


# ---------- streaming replay ----------

@dataclass
class ReplaySummary:
    blocks: int = 0
    rows: int = 0
    by_reason: dict[str, int] = field(default_factory=dict)
    by_outcome: dict[str, int] = field(default_factory=dict)
    failures: list[VerifyFinding] = field(default_factory=list)
    parse_errors: list[str] = field(default_factory=list)

    def record(self, finding: VerifyFinding) -> None:
        self.by_outcome[finding.outcome] = self.by_outcome.get(finding.outcome, 0) + 1
        if finding.outcome == FAILED:
            self.failures.append(finding)

    def lines(self) -> list[str]:
        out = [f"blocks: {self.blocks}", f"rows: {self.rows}"]
        for reason in sorted(self.by_reason):
            out.append(f"  reason {reason}: {self.by_reason[reason]}")
        for outcome in sorted(self.by_outcome):
            out.append(f"  {outcome}: {self.by_outcome[outcome]}")
        for f in self.failures:
            out.append(f"  FAIL {f}")
        for p in self.parse_errors:
            out.append(f"  PARSE {p}")
        return out


def replay(rows: Iterable[ProofRow], ctx: VerifierContext) -> ReplaySummary:
    """Stream rows, build forests per block, verify; memory stays bounded."""
    summary = ReplaySummary()
    for block in split_blocks(rows):
        summary.blocks += 1
        summary.rows += len(block)
        for row in block:
            summary.by_reason[row.reason] = summary.by_reason.get(row.reason, 0) + 1
        try:
            forest = build_forest(block)
        except MalformedNesting as err:
            summary.parse_errors.append(str(err))
            continue
        for root in forest:
            for finding in verify_node(root, ctx):
                summary.record(finding)
    return summary
