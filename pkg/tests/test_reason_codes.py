"""Every reason code in the taxonomy has a working dispatch path."""

from __future__ import annotations

import pytest

from conftest import CORE
from toys import make_toy
from sseqkit.algebra import BasisVec, BiDegree
from sseqkit.deduce import DeductionContext, xy_invariant_value
from sseqkit.formats import (
    ProofRow,
    load_cofseq,
    load_null_compositions,
    load_spectrum,
    load_ss,
)
from sseqkit.naming import cofseq_shifts, parse_cofseq_ref
from sseqkit.proofs import (
    FAILED,
    OK,
    SKIPPED,
    UNCONFIRMED,
    VerifierContext,
    build_forest,
    verify_node,
)
from sseqkit.ss import SsState, build, build_cofseq


def row(rid, reason, name, stem, s, r, x, dx="", depth=0, info=None):
    return ProofRow(rid, depth, reason, name, stem, s, stem + s, r, x, dx, info)


def one(rows, ctx):
    findings = verify_node(build_forest(rows)[0], ctx)
    return findings


@pytest.fixture(scope="module")
def s0_ctx(core_s0):
    state, _ = build(core_s0, load_ss(CORE / "S0_AdamsE2_ss.csv"))
    ctx = VerifierContext(states={"S0": state})
    ctx.deduction = DeductionContext({"S0": state})
    return ctx


@pytest.fixture(scope="module")
def cofseq_ctx(core_s0, core_c2):
    cnu = load_spectrum(CORE, "Cnu", ring=core_s0, max_t=200)
    cw = load_spectrum(CORE, "CW_nu_eta_2", ring=core_s0, max_t=200)
    shifts = cofseq_shifts(parse_cofseq_ref("Cnu__CW_nu_eta_2__C2"))
    cstate, findings = build_cofseq(
        "Cnu__CW_nu_eta_2__C2", (SsState(cnu), SsState(cw), SsState(core_c2)),
        shifts, load_cofseq(CORE / "cofseq_Cnu__CW_nu_eta_2__C2.csv"))
    assert not findings
    ctx = VerifierContext(cofseqs={"Cnu__CW_nu_eta_2__C2": cstate})
    ctx.null_compositions = load_null_compositions(
        CORE / "null_compositions.csv")
    return ctx


def test_d2_dispatch(s0_ctx):
    assert [f.outcome for f in one(
        [row(1, "d2", "S0", 15, 1, 2, "0", "0")], s0_ctx)] == [OK]


def test_n_dispatch_unconfirmed_without_maps(s0_ctx):
    got = one([row(1, "N", "S0", 14, 3, 2, "0", "")], s0_ctx)
    assert got[0].outcome in (UNCONFIRMED, SKIPPED)


def test_n_dispatch_confirms_along_a_map(core_c2, core_c2h4, core_s0):
    from sseqkit.formats import load_map

    c2_state = SsState(core_c2)
    h4_state = SsState(core_c2h4)
    # d_2(v_0) = 0 in C2 pushes to d_2(v_0) = 0 in C2h4
    c2_state.insert_differential(BasisVec(BiDegree(0, 0), (0,)), 2,
                                 BasisVec.zero(BiDegree(-1, 2)))
    h4_state.insert_differential(BasisVec(BiDegree(0, 0), (0,)), 2,
                                 BasisVec.zero(BiDegree(-1, 2)))
    ctx = VerifierContext(states={"C2": c2_state, "C2h4": h4_state})
    ctx.deduction = DeductionContext(
        {"C2": c2_state, "C2h4": h4_state},
        {("C2", "C2h4"): load_map(CORE / "map_C2_to_C2h4.csv", True)})
    got = one([row(1, "N", "C2h4", 0, 0, 2, "0", "")], ctx)
    assert got[0].outcome == OK


def test_g_dispatch(s0_ctx, core_states):
    ctx = VerifierContext(states=dict(core_states))
    assert [f.outcome for f in one(
        [row(1, "G", "Csigma", 115, 13, 4, "1")], ctx)] == [OK]


def test_gi_dispatch(core_states):
    ctx = VerifierContext(states=dict(core_states))
    # dx-keyed: (115,14) [0] has no possible length-2 sources at (116,12)
    got = one([row(1, "GI", "Csigma", 115, 14, 2, "", "0")], ctx)
    assert got[0].outcome == OK


def test_xx_dispatch(core_s0):
    state = SsState(core_s0)
    h1 = BasisVec(BiDegree(1, 1), (0,))
    state.insert_differential(h1, 2, BasisVec.zero(BiDegree(0, 3)))
    ctx = VerifierContext(states={"S0": state})
    got = one([row(1, "XX", "S0", 2, 2, 3, "0", "")], ctx)
    assert got[0].outcome == OK
    bad = one([row(2, "XX", "S0", 3, 1, 3, "0", "")], ctx)
    assert bad[0].outcome == FAILED  # odd degree is never a square


def test_xy_dispatch_positive():
    # find a toy where multiplying by h annihilates the whole candidate space
    for seed in range(200):
        toy = make_toy(seed)
        if toy.mult[("h", 0)] is None:
            continue
        if toy.mult[("h", 1)] is not None or toy.mult[("h", 2)] is not None:
            continue
        state = toy.ctx.states[toy.subject]
        h = BasisVec(BiDegree(0, 1), (0,))
        res = xy_invariant_value(toy.ctx, toy.subject, toy.x, toy.r, "S0", h)
        assert res is not None
        xy, dxy = res
        assert dxy.is_zero
        ctx = VerifierContext(states=dict(toy.ctx.states))
        ctx.deduction = toy.ctx
        got = one([row(1, "XY", toy.subject, xy.degree.stem, xy.degree.s,
                       toy.r, ",".join(map(str, xy.indices)), "")], ctx)
        assert got[0].outcome == OK
        return
    pytest.fail("no toy instance exercised the XY rule")


def test_t_and_d_dispatch(core_states):
    ctx = VerifierContext(states={k: v.snapshot() for k, v in
                                  core_states.items()})
    ctx.deduction = DeductionContext(ctx.states)
    state = ctx.states["Csigma"]
    state.insert_differential(BasisVec(BiDegree(116, 10), (1,)), 2,
                              BasisVec.zero(BiDegree(115, 12)))
    rows = [row(1, "T", "Csigma", 116, 10, 3, "1", "1,2", depth=1),
            row(2, "T", "Csigma", 116, 10, 3, "1", "1", depth=1),
            row(3, "T", "Csigma", 116, 10, 3, "1", "2", depth=1),
            row(4, "D", "Csigma", 116, 10, 3, "1", "")]
    findings = one(rows, ctx)
    trial = [f for f in findings if f.reason == "T" and f.row_id == 1]
    assert trial[0].outcome == OK  # the Leibniz contradiction replays
    concl = [f for f in findings if f.reason == "D"]
    assert any(f.outcome == OK and "exhaust" in f.message for f in concl)


def test_ti_di_dispatch(core_states):
    ctx = VerifierContext(states=dict(core_states))
    ctx.deduction = DeductionContext(dict(core_states))
    # dx-keyed rows: (stem, s) name the degree of dx
    got = one([row(1, "TI", "Csigma", 115, 14, 4, "1", "0", depth=1),
               row(2, "DI", "Csigma", 115, 14, 4, "0", "0")], ctx)
    assert all(f.outcome in (OK, SKIPPED, UNCONFIRMED) for f in got)


@pytest.mark.parametrize("reason", ["ToCs", "OutCsI", "CsCm", "SynCs", "SynIn"])
def test_cofseq_reason_dispatch(cofseq_ctx, reason):
    name = "Cnu__CW_nu_eta_2__C2:1"
    info = "eta composed with nu is null" if reason == "CsCm" else None
    stem, s = (9, 4) if reason == "OutCsI" else (15, 2)
    got = one([row(1, reason, name, stem, s, 2, "0", "0", info=info)],
              cofseq_ctx)
    assert got[0].outcome == OK, got


def test_cscm_without_listed_pair(cofseq_ctx):
    got = one([row(1, "CsCm", "Cnu__CW_nu_eta_2__C2:1", 15, 2, 2, "0", "0",
                   info="by an unstated relation")], cofseq_ctx)
    assert got[0].outcome == UNCONFIRMED


def test_syn_dispatch(s0_ctx):
    got = one([row(1, "Syn", "S0", 15, 1, 2, "0", "0")], s0_ctx)
    assert got[0].outcome == OK and "structural" in got[0].message


def test_cofseq_row_bad_degree(cofseq_ctx):
    got = one([row(1, "ToCs", "Cnu__CW_nu_eta_2__C2:1", 15, 2, 2, "9", "0")],
              cofseq_ctx)
    assert got[0].outcome == FAILED


def test_unparseable_vector_is_a_finding(s0_ctx):
    got = one([row(1, "d2", "S0", 15, 1, 2, "0,0", "0")], s0_ctx)
    assert got[0].outcome == FAILED
