from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS))

from sseqkit.formats import load_spectrum, load_ss  # noqa: E402
from sseqkit.ss import build  # noqa: E402

DATA = TESTS / "data"
CORE = DATA / "core"
STEM123 = DATA / "stem123"
CHARTS = DATA / "charts"
SEEDS = DATA / "seeds"
NAMES = DATA / "names"


@pytest.fixture(scope="session")
def core_s0():
    return load_spectrum(CORE, "S0", is_ring=True, max_t=261)


@pytest.fixture(scope="session")
def core_c2(core_s0):
    return load_spectrum(CORE, "C2", ring=core_s0, max_t=200)


@pytest.fixture(scope="session")
def core_c2h4(core_s0):
    return load_spectrum(CORE, "C2h4", ring=core_s0, max_t=200)


@pytest.fixture(scope="session")
def core_csigma(core_s0):
    return load_spectrum(CORE, "Csigma", ring=core_s0, max_t=200)


@pytest.fixture(scope="session")
def core_states(core_s0, core_csigma):
    s0_state, f0 = build(core_s0, load_ss(CORE / "S0_AdamsE2_ss.csv"))
    cs_state, f1 = build(core_csigma, load_ss(CORE / "Csigma_AdamsE2_ss.csv"))
    assert not f0 and not f1
    return {"S0": s0_state, "Csigma": cs_state}


@pytest.fixture(scope="session")
def stem123_state():
    s0 = load_spectrum(STEM123, "S0", is_ring=True, max_t=261)
    state, findings = build(s0, load_ss(STEM123 / "S0_AdamsE2_ss.csv"))
    assert not findings
    return state
