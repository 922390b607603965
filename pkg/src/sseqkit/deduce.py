"""Candidate enumeration, propagation and contradiction search.

Propagation closes a hypothesis under the Leibniz rule, naturality along
loaded maps, single-page degree reasons and the square rule, until fixpoint
or budget exhaustion.  Branches run on snapshots; deduce concludes only when
every other candidate is refuted, and emits proof rows in the Table-of-Proofs
schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import gf2
from .algebra import (
    BasisVec,
    BiDegree,
    MapData,
    SpectrumData,
    UNKNOWN,
    apply_map,
    leibniz_product,
    mul_vec,
    vec_to_element,
)
from .errors import (
    BudgetExhausted,
    Contradiction,
    MissingImage,
    NonConfluent,
    NotASurvivor,
    OutOfRange,
)
from .formats import ProofRow
from .ss import MAX_R, SsState

DEFAULT_BUDGET = 10_000


@dataclass
class Hypothesis:
    subject: str
    x: BasisVec
    r: int
    value: BasisVec  # the chosen coset representative (may be the zero vector)


@dataclass
class DeductionContext:
    """Frozen algebra plus mutable staircase states for one deduction run."""

    states: dict[str, SsState]
    maps: dict[tuple[str, str], MapData] = field(default_factory=dict)
    budget: int = DEFAULT_BUDGET

    def snapshot(self) -> "DeductionContext":
        return DeductionContext(
            {name: st.snapshot() for name, st in self.states.items()},
            self.maps, self.budget)

    def spectrum(self, name: str) -> SpectrumData:
        return self.states[name].spectrum

    def partners_of(self, name: str) -> list[str]:
        """Spectra whose elements pair with `name`'s under the Leibniz rule."""
        spec = self.spectrum(name)
        if spec.is_ring:
            return sorted(n for n, st in self.states.items()
                          if st.spectrum.ring is spec or st.spectrum is spec)
        return [spec.ring.name] if spec.ring is not None and \
            spec.ring.name in self.states else []


def fmt_elem(name: str, v: BasisVec) -> str:
    return f"{name} ({v.degree.stem},{v.degree.s}) {v}"


def fmt_fact(name: str, x: BasisVec, r: int, dx: Optional[BasisVec]) -> str:
    shown = "[?]" if dx is None else str(dx)
    return f"{name} ({x.degree.stem},{x.degree.s}) d_{r}{x}={shown}"


class PropagationResult:
    def __init__(self, consistent: bool, lines: list[str],
                 ctx: Optional[DeductionContext]):
        self.consistent = consistent
        self.lines = lines
        self.ctx = ctx

    @property
    def info(self) -> str:
        return "\n".join(self.lines)


def degree_reason_trivial(state: SsState, x: BasisVec, r: int) -> bool:
    """True iff the d_r target of x has no admissible nonzero value."""
    target = BiDegree(x.degree.stem - 1, x.degree.s + r)
    if target.t > state.spectrum.max_t:
        return False  # beyond the computed range nothing is known
    dim = state.spectrum.dim(target)
    if dim == 0:
        return True
    z = state.subspace_Z(target, r - 1)
    b = state.subspace_B(target, r - 1)
    return len(z) == len(b)


def candidates(state: SsState, x: BasisVec, r: int) -> list[BasisVec]:
    """Coset representatives of the possible values of d_r(x), zero first."""
    if not state.survives_to(x, r):
        raise NotASurvivor(
            f"{fmt_elem(state.spectrum.name, x)} is not an E_{r}-survivor")
    target = BiDegree(x.degree.stem - 1, x.degree.s + r)
    if state.spectrum.dim(target) == 0:
        return [BasisVec.zero(target)]
    z = state.subspace_Z(target, r - 1)
    b = state.subspace_B(target, r - 1)
    reps = sorted({gf2.reduce_vec(v, b) for v in gf2.span_members(z)})
    return [BasisVec.from_bits(target, bits) for bits in reps]


def _insert_and_log(ctx: DeductionContext, name: str, x: BasisVec, r: int,
                    dx: Optional[BasisVec], lines: list[str],
                    budget: list[int]) -> bool:
    """Insert one differential; True when the state changed."""
    budget[0] -= 1
    if budget[0] < 0:
        raise BudgetExhausted("propagation budget exhausted")
    state = ctx.states[name]
    before = state.d_value(x, r) if not x.is_zero else None
    state.insert_differential(x, r, dx)
    if x.is_zero:
        return False
    after = state.d_value(x, r)
    return not (before is after or
                (isinstance(before, BasisVec) and isinstance(after, BasisVec)
                 and before.bits == after.bits))


def propagate(ctx: DeductionContext, h: Hypothesis,
              budget: Optional[int] = None) -> PropagationResult:
    """Insert h and close under Leibniz/naturality/degree/square rules.

    Works on a snapshot; the original context is never touched.
    """
    work = ctx.snapshot()
    limit = [budget if budget is not None else ctx.budget]
    lines = [f"Get {fmt_fact(h.subject, h.x, h.r, h.value)}."]
    queue: list[tuple[str, BasisVec, int, Optional[BasisVec]]] = []
    try:
        changed = _insert_and_log(work, h.subject, h.x, h.r, h.value, lines, limit)
        if not changed and not h.x.is_zero:
            # the hypothesis is already recorded: nothing new to close over
            return PropagationResult(True, lines, work)
        queue.append((h.subject, h.x, h.r, h.value))
        while queue:
            name, x, r, dx = queue.pop(0)
            if dx is None:
                continue
            _close_one(work, name, x, r, dx, lines, limit, queue)
    except Contradiction as err:
        lines.append(f"However, {err}.")
        return PropagationResult(False, lines, None)
    except BudgetExhausted:
        raise
    return PropagationResult(True, lines, work)


def _close_one(work: DeductionContext, name: str, x: BasisVec, r: int,
               dx: BasisVec, lines: list[str], limit: list[int],
               queue: list) -> None:
    spec = work.spectrum(name)
    state = work.states[name]

    # (a) Leibniz with every partner whose d_r is determined
    for partner in work.partners_of(name):
        pstate = work.states[partner]
        pspec = pstate.spectrum
        # products land in the module side
        target_name = name if not spec.is_ring else partner
        target_spec = work.spectrum(target_name)
        for pdeg in sorted(pstate.table):
            for entry in list(pstate.entries(pdeg)):
                y = entry.base
                dy = pstate.d_value(y, r)
                if dy is UNKNOWN:
                    continue
                prod_deg = BiDegree(x.degree.stem + y.degree.stem,
                                    x.degree.s + y.degree.s)
                if prod_deg.t > target_spec.max_t or \
                        prod_deg.t - 1 + r > target_spec.max_t:
                    continue
                try:
                    xy, dxy = leibniz_product(x, dx, y, dy, r, target_spec,
                                              x_ctx=spec, y_ctx=pspec)
                except (OutOfRange, NonConfluent):
                    continue
                if xy.is_zero and dxy.is_zero:
                    continue
                step = (f"Apply the Leibniz rule with "
                        f"{fmt_fact(pstate.spectrum.name, y, r, dy)} and get "
                        f"{fmt_fact(target_name, xy, r, dxy)}.")
                tstate = work.states[target_name]
                before = len(lines)
                lines.append(step)
                changed = _insert_and_log(work, target_name, xy, r, dxy,
                                          lines, limit)
                if changed:
                    queue.append((target_name, xy, r, dxy))
                else:
                    del lines[before:]

    # (b) naturality along loaded maps out of this spectrum
    for (src, dst), mapdata in sorted(work.maps.items()):
        if src != name or dst not in work.states:
            continue
        dst_spec = work.spectrum(dst)
        try:
            fx = apply_map(mapdata, vec_to_element(x, spec), spec, dst_spec)
            fdx = apply_map(mapdata, vec_to_element(dx, spec), spec, dst_spec) \
                if not dx.is_zero else BasisVec.zero(
                    BiDegree(fx.degree.stem - 1, fx.degree.s + r))
        except (MissingImage, OutOfRange, NonConfluent):
            continue
        if fx.is_zero and fdx.is_zero:
            continue
        step = (f"Apply naturality with {src}__{dst} and get "
                f"{fmt_fact(dst, fx, r, fdx)}.")
        before = len(lines)
        lines.append(step)
        changed = _insert_and_log(work, dst, fx, r, fdx, lines, limit)
        if changed:
            queue.append((dst, fx, r, fdx))
        else:
            del lines[before:]

    if not dx.is_zero or x.is_zero:
        return

    # (c) degree reasons extend a known-zero differential page by page,
    # but only while the target stem still has populated filtrations
    max_s = max((d.s for d in spec.basis if d.stem == x.degree.stem - 1),
                default=None)
    rr = r + 1
    while max_s is not None and rr <= MAX_R and x.degree.s + rr <= max_s \
            and degree_reason_trivial(state, x, rr):
        target = BiDegree(x.degree.stem - 1, x.degree.s + rr)
        changed = _insert_and_log(work, name, x, rr, BasisVec.zero(target),
                                  lines, limit)
        if changed:
            queue.append((name, x, rr, BasisVec.zero(target)))
        rr += 1

    # (d) square rule: d_{r-1}(x) = 0 gives d_r(x^2) = 0 on ring elements
    if spec.is_ring:
        sq_deg = BiDegree(2 * x.degree.stem, 2 * x.degree.s)
        if sq_deg.t <= spec.max_t and sq_deg.t + r + 1 - 1 <= spec.max_t:
            try:
                x2 = mul_vec(x, x, spec)
            except (OutOfRange, NonConfluent):
                x2 = None
            if x2 is not None and not x2.is_zero:
                target = BiDegree(sq_deg.stem - 1, sq_deg.s + r + 1)
                changed = _insert_and_log(work, name, x2, r + 1,
                                          BasisVec.zero(target), lines, limit)
                if changed:
                    queue.append((name, x2, r + 1, BasisVec.zero(target)))


def xy_invariant_value(ctx: DeductionContext, name: str, x: BasisVec, r: int,
                       partner: str, y: BasisVec):
    """The XY rule: the value of d_r(xy) when it is candidate-independent.

    Requires d_{r-1}(x) = 0 recorded and at least two candidates for d_r(x);
    returns (xy, dxy) or None when the value depends on the open choice.
    """
    state = ctx.states[name]
    pstate = ctx.states[partner]
    prev = state.d_value(x, r - 1)
    if not (isinstance(prev, BasisVec) and prev.is_zero):
        return None
    try:
        cands = candidates(state, x, r)
    except NotASurvivor:
        return None
    if len(cands) < 2:
        return None
    dy = pstate.d_value(y, r)
    if dy is UNKNOWN:
        return None
    spec = ctx.spectrum(name)
    pspec = ctx.spectrum(partner)
    target_spec = spec if not spec.is_ring else pspec
    tname = name if not spec.is_ring else partner
    results = set()
    out = None
    for c in cands:
        try:
            xy, dxy = leibniz_product(x, c, y, dy, r, target_spec,
                                      x_ctx=spec, y_ctx=pspec)
        except (OutOfRange, NonConfluent):
            return None
        bspace = ctx.states[tname].subspace_B(dxy.degree, r - 1)
        results.add(gf2.reduce_vec(dxy.bits, bspace))
        out = (xy, dxy)
    if len(results) == 1:
        return out
    return None


# ---------- deduction with trace emission ----------

@dataclass
class DeductionTrace:
    rows: list[ProofRow]


@dataclass
class Deduced:
    value: BasisVec
    trace: DeductionTrace
    ctx: DeductionContext


class Inconclusive:
    def __init__(self, surviving: list[BasisVec]):
        self.surviving = surviving


class AllContradict:
    """Every candidate died: the surrounding assumption is itself absurd."""

    def __init__(self, rows: list[ProofRow]):
        self.rows = rows


class _IdGen:
    def __init__(self, start: int):
        self.next_id = start

    def take(self) -> int:
        out = self.next_id
        self.next_id += 1
        return out


def deduce(ctx: DeductionContext, subject: str, x: BasisVec, r: int,
           max_depth: int = 2, _depth: int = 1,
           _ids: Optional[_IdGen] = None, start_id: int = 1):
    """Depth-first candidate elimination; never guesses.

    Returns Deduced (unique survivor), Inconclusive (two or more survive) or
    AllContradict (used by the recursion when a zero branch dies deeper).
    """
    ids = _ids if _ids is not None else _IdGen(start_id)
    state = ctx.states[subject]
    cands = candidates(state, x, r)
    t = x.degree.t
    rows: list[ProofRow] = []
    survivors: list[tuple[BasisVec, DeductionContext]] = []
    for cand in cands:
        try:
            res = propagate(ctx, Hypothesis(subject, x, r, cand))
        except BudgetExhausted:
            return Inconclusive([cand])
        if not res.consistent:
            rows.append(ProofRow(ids.take(), _depth, "T", subject,
                                 x.degree.stem, x.degree.s, t, r,
                                 _ser(x), _ser(cand), res.info))
            continue
        if cand.is_zero and max_depth > 1 and r + 1 <= MAX_R:
            branch_id = ids.take()  # parent row precedes its nested trials
            sub = deduce(res.ctx, subject, x, r + 1, max_depth - 1,
                         _depth=_depth + 1, _ids=ids)
            if isinstance(sub, AllContradict):
                rows.append(ProofRow(branch_id, _depth, "T", subject,
                                     x.degree.stem, x.degree.s, t, r,
                                     _ser(x), _ser(cand),
                                     f"Assume d_{r}{x}={cand}. Every value of "
                                     f"d_{r + 1}{x} leads to a contradiction."))
                rows.extend(sub.rows)
                continue
        survivors.append((cand, res.ctx))
    if not survivors:
        return AllContradict(rows)
    if len(survivors) > 1:
        return Inconclusive([c for c, _ in survivors])
    value, final_ctx = survivors[0]
    rows.append(ProofRow(ids.take(), _depth - 1, "D", subject,
                         x.degree.stem, x.degree.s, t, r,
                         _ser(x), _ser(value), None))
    if _depth == 1:
        final_ctx.states[subject].insert_differential(x, r, value)
    return Deduced(value, DeductionTrace(rows), final_ctx)


def _ser(v: BasisVec) -> str:
    return ",".join(str(i) for i in v.indices)
