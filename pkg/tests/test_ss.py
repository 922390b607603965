from __future__ import annotations

import pytest

from conftest import CORE, SEEDS
from sseqkit import gf2
from sseqkit.algebra import BasisVec, BiDegree
from sseqkit.errors import Contradiction, SentinelConflict
from sseqkit.formats import SsRow, load_cofseq, load_spectrum, load_ss
from sseqkit.naming import cofseq_shifts, parse_cofseq_ref
from sseqkit.ss import (
    PERMANENT_LEVEL,
    SsState,
    build,
    build_cofseq,
    check_consistency,
    decode_level,
    encode_level,
)


def test_level_codec_sample_rows():
    assert decode_level(9998) == ("supports", 2)
    assert decode_level(9000) == ("permanent", None)
    assert decode_level(2) == ("hit", 2)
    assert decode_level(10000) == ("supports", 0)
    assert decode_level(9997) == ("supports", 3)


def test_level_codec_bijection():
    domain = list(range(1, 5000)) + [9000] + list(range(9001, 10001))
    for level in domain:
        kind, r = decode_level(level)
        assert encode_level(kind, r) == level
    for level in list(range(5000, 9000)) + list(range(9001, 9001)) + [0, 10001]:
        with pytest.raises(SentinelConflict):
            decode_level(level)
    with pytest.raises(SentinelConflict):
        encode_level("supports", 1000)  # collides with the 9000 sentinel
    with pytest.raises(SentinelConflict):
        encode_level("hit", 0)


def test_build_sample_ss_rows(core_s0):
    state, findings = build(core_s0, load_ss(CORE / "S0_AdamsE2_ss.csv"))
    assert not findings
    # the (15,1) supports-d2 row and its (14,3) mirror merge into one staircase
    entries = state.entries(BiDegree(15, 1))
    assert len(entries) == 1 and decode_level(entries[0].level) == ("supports", 2)
    assert entries[0].diff == BasisVec(BiDegree(14, 3), (0,))
    hit = state.entries(BiDegree(14, 3))
    assert len(hit) == 1 and decode_level(hit[0].level) == ("hit", 2)
    perm = state.entries(BiDegree(0, 17))
    assert perm[0].level == PERMANENT_LEVEL


def test_insert_differential_mirror_and_idempotence(core_s0):
    state = SsState(core_s0)
    x = BasisVec(BiDegree(15, 1), (0,))
    dx = BasisVec(BiDegree(14, 3), (0,))
    state.insert_differential(x, 2, dx)
    assert len(state.entries(BiDegree(15, 1))) == 1
    assert len(state.entries(BiDegree(14, 3))) == 1
    before = state.dump_rows()
    state.insert_differential(x, 2, dx)
    state.insert_hit(dx, 2, x)
    assert state.dump_rows() == before


def test_insert_zero_source_requires_boundary(core_csigma, core_states):
    state = core_states["Csigma"].snapshot()
    zero = BasisVec.zero(BiDegree(116, 11))
    bad = BasisVec(BiDegree(115, 14), (1, 2))
    with pytest.raises(Contradiction, match=r"is not in B_2"):
        state.insert_differential(zero, 3, bad)


def test_coset_mismatch_contradiction(core_csigma):
    # two-dimensional target with empty boundary space: values must agree
    state = SsState(core_csigma)
    x = BasisVec(BiDegree(116, 10), (0,))
    state.insert_differential(x, 3, BasisVec(BiDegree(115, 13), (0,)))
    with pytest.raises(Contradiction):
        state.insert_differential(x, 3, BasisVec(BiDegree(115, 13), (1,)))


def test_coset_agreement_modulo_boundaries(core_csigma):
    # once [1]@(115,13) is a boundary at page 2, values may differ by it
    state = SsState(core_csigma)
    b = BasisVec(BiDegree(115, 13), (1,))
    state.insert_hit(b, 2, None)
    x = BasisVec(BiDegree(116, 10), (0,))
    state.insert_differential(x, 3, BasisVec(BiDegree(115, 13), (0,)))
    state.insert_differential(x, 3, BasisVec(BiDegree(115, 13), (0, 1)))
    entries = state.entries(BiDegree(116, 10))
    assert len(entries) == 1


def test_refine_unknown_value(core_csigma):
    state = SsState(core_csigma)
    x = BasisVec(BiDegree(116, 10), (0,))
    state.insert_differential(x, 3, None)
    entry = state.entries(BiDegree(116, 10))[0]
    assert entry.diff is None
    value = BasisVec(BiDegree(115, 13), (0,))
    state.insert_differential(x, 3, value)
    assert state.entries(BiDegree(116, 10))[0].diff == value


def test_promote_level(core_csigma):
    state = SsState(core_csigma)
    x = BasisVec(BiDegree(116, 10), (0,))
    state.insert_differential(x, 2, None)        # no information yet
    state.insert_differential(x, 5, None)        # survives to page 5
    entry = state.entries(BiDegree(116, 10))[0]
    assert decode_level(entry.level) == ("supports", 5)


def test_killed_element_cannot_support(core_csigma):
    state = SsState(core_csigma)
    x = BasisVec(BiDegree(116, 10), (0,))
    state.insert_hit(x, 2, None)  # killed at page 2, source unknown
    with pytest.raises(Contradiction):
        state.insert_differential(x, 3, BasisVec(BiDegree(115, 13), (0,)))
    # a vanishing later differential stays consistent for a boundary
    state.insert_differential(x, 3, BasisVec.zero(BiDegree(115, 13)))


def test_staircase_subspaces_stem123(stem123_state):
    d = BiDegree(123, 11)
    B = {r: stem123_state.subspace_B(d, r) for r in (2, 3, 4, 5, 6)}
    Z = {r: stem123_state.subspace_Z(d, r) for r in (2, 3, 4, 5, 6, 7)}
    assert B[2] == B[3] == B[4]
    assert gf2.in_span(0b00001, B[2])          # h_0^2 x_{123,9}
    assert len(B[2]) == 1
    assert len(B[5]) == 2 and B[5] == B[6]
    assert gf2.in_span(0b00010, B[5])          # h_5 x_{92,10}
    assert not gf2.in_span(0b00010, B[4])
    assert Z[3] == Z[4] == Z[5] == Z[6]
    assert len(Z[3]) == 3
    assert gf2.in_span(0b11100, Z[6])          # the three-term generator
    assert not gf2.in_span(0b01100, Z[3])      # x_{123,11}+h_0h_6[B_4] dies at 3
    assert len(Z[7]) == 2
    # degree law: every known diff lands per the (stem-1, s+r) rule
    assert not check_consistency(stem123_state)


def test_staircase_monotone(stem123_state):
    for d in stem123_state.table:
        prev_b, prev_z = [], None
        for r in range(2, 15):
            b = stem123_state.subspace_B(d, r)
            z = stem123_state.subspace_Z(d, r)
            assert all(gf2.in_span(v, b) for v in prev_b)
            if prev_z is not None:
                assert all(gf2.in_span(v, prev_z) for v in z)
            assert all(gf2.in_span(v, z) for v in b) or not b or not z or \
                all(gf2.in_span(v, z) for v in b)
            prev_b, prev_z = b, z


def test_rank_exchange_on_resolved_bidegrees(stem123_state):
    # dim B_r gained at the target equals dim Z_{r-1}/Z_r lost at the source
    src = BiDegree(123, 11)
    for r in (3, 7):
        tgt = BiDegree(122, 11 + r)
        gained = len(stem123_state.subspace_B(tgt, r)) - \
            len(stem123_state.subspace_B(tgt, r - 1))
        lost = len(stem123_state.subspace_Z(src, r - 1)) - \
            len(stem123_state.subspace_Z(src, r))
        assert gained == lost


def test_build_dump_build_fixed_point(stem123_state):
    rows = stem123_state.dump_rows()
    state2, findings = build(stem123_state.spectrum, rows)
    assert not findings
    assert state2.dump_rows() == rows


def test_seed_differentials_merge():
    s0 = load_spectrum(SEEDS, "S0", is_ring=True, max_t=261)
    seeds = load_ss(SEEDS / "S0_seed_differentials.csv")
    state, findings = build(s0, load_ss(SEEDS / "S0_AdamsE2_ss.csv"),
                            seed_rows=seeds)
    assert not findings
    entry = state.entries(BiDegree(63, 25))[0]
    assert decode_level(entry.level) == ("supports", 5)
    assert entry.diff == BasisVec(BiDegree(62, 30), (0,))
    entry = state.entries(BiDegree(127, 56))[0]
    assert decode_level(entry.level) == ("supports", 6)


def test_tmf_seed_differential():
    tmf = load_spectrum(SEEDS, "tmf", is_ring=True, max_t=261)
    state, findings = build(tmf, load_ss(SEEDS / "tmf_AdamsE2_ss.csv"),
                            seed_rows=load_ss(SEEDS / "tmf_seed_differentials.csv"))
    assert not findings
    entry = state.entries(BiDegree(96, 16))[0]
    assert decode_level(entry.level) == ("supports", 3)
    assert entry.diff == BasisVec(BiDegree(95, 19), (0,))


def test_d2_crosscheck_detects_conflict(core_s0):
    rows = load_ss(CORE / "S0_AdamsE2_ss.csv")
    # contradict the basis d2 column: claim d_2(h_4) = 0 instead
    bad = [SsRow(15, 1, "0", "", 9998) if (r.stem, r.s) == (15, 1) else r
           for r in rows if (r.stem, r.s) != (14, 3)]
    state, findings = build(core_s0, bad)
    assert any("d2" in str(f) for f in findings)


# ---------- extension spectral sequence ----------

@pytest.fixture(scope="module")
def cofseq_s0_c2_s0(core_s0, core_c2):
    s0_state, f0 = build(core_s0, load_ss(CORE / "S0_AdamsE2_ss.csv"))
    c2_state = SsState(core_c2)
    shifts = cofseq_shifts(parse_cofseq_ref("S0__C2__S0"))
    assert shifts == (0, 1, 0)
    cstate, findings = build_cofseq(
        "S0__C2__S0", (s0_state, c2_state, s0_state), shifts,
        load_cofseq(CORE / "cofseq_S0__C2__S0.csv"))
    assert not findings
    return cstate


def test_cofseq_sample_rows(cofseq_s0_c2_s0):
    cstate = cofseq_s0_c2_s0
    # (1,87,42,...,1): hit by an f-extension jumping filtration 1
    entries = cstate.entries(1, BiDegree(87, 42))
    assert len(entries) == 1 and decode_level(entries[0].level) == ("hit", 1)
    # r=0 g-extension, level 10000
    entries = cstate.entries(1, BiDegree(118, 19))
    assert any(decode_level(e.level) == ("supports", 0) and
               e.diff == BasisVec(BiDegree(117, 19), (1, 3)) for e in entries)


def test_cofseq_degree_law(cofseq_s0_c2_s0):
    # g-extension with r=2 from C2 (15,2) would land at S0 (14,4)
    assert cofseq_s0_c2_s0.target_degree(1, BiDegree(15, 2), 2) == BiDegree(14, 4)


def test_insert_extension_idempotent(core_s0, core_c2):
    s0_state = SsState(core_s0)
    c2_state = SsState(core_c2)
    cstate, _ = build_cofseq("S0__C2__S0", (s0_state, c2_state, s0_state),
                             (0, 1, 0), [])
    x = BasisVec(BiDegree(118, 21), (0,))
    dx = BasisVec(BiDegree(117, 21), (0,))
    cstate.insert_extension(1, x, 0, dx)
    rows = cstate.dump_rows()
    cstate.insert_extension(1, x, 0, dx)
    assert cstate.dump_rows() == rows


def test_extension_coset_contradiction(core_s0, core_c2):
    s0_state = SsState(core_s0)
    c2_state = SsState(core_c2)
    cstate, _ = build_cofseq("S0__C2__S0", (s0_state, c2_state, s0_state),
                             (0, 1, 0), [])
    x = BasisVec(BiDegree(118, 19), (0,))
    cstate.insert_extension(1, x, 0, BasisVec(BiDegree(117, 19), (1, 3)))
    with pytest.raises(Contradiction):
        cstate.insert_extension(1, x, 0, BasisVec(BiDegree(117, 19), (1,)))


def test_cofseq_g_extension_mirrors(core_s0, core_c2):
    # the proof-row example: g-extension (15,2) -> C2 (9,4) with jump 2
    cnu = load_spectrum(CORE, "Cnu", ring=core_s0, max_t=200)
    cw = load_spectrum(CORE, "CW_nu_eta_2", ring=core_s0, max_t=200)
    shifts = cofseq_shifts(parse_cofseq_ref("Cnu__CW_nu_eta_2__C2"))
    cstate, findings = build_cofseq(
        "Cnu__CW_nu_eta_2__C2",
        (SsState(cnu), SsState(cw), SsState(core_c2)), shifts,
        load_cofseq(CORE / "cofseq_Cnu__CW_nu_eta_2__C2.csv"))
    assert not findings
    entries = cstate.entries(2, BiDegree(9, 4))
    assert len(entries) == 1 and decode_level(entries[0].level) == ("hit", 2)
