"""Randomized toy spectral sequences with planted differentials.

Each instance is a tiny ring R = F2[h, u]/(...) acting on a one-unknown
module: x at (nx, sx) supports an undetermined d_r into a two-dimensional
target.  Recorded facts about the products h*x and u*x cut the candidate
set down; `plant` is the value all recordings were derived from.  The
multiplication table is explicit so oracles can bypass the algebra layer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from sseqkit.algebra import (
    UNKNOWN,
    BasisVec,
    BiDegree,
    Element,
    Generator,
    Monomial,
    SpectrumData,
)
from sseqkit.deduce import DeductionContext
from sseqkit.ss import SsState


@dataclass
class Toy:
    ctx: DeductionContext
    subject: str
    x: BasisVec
    r: int
    plant: BasisVec
    # explicit products: ('h'|'u', target_gen_id) -> module gen id or None
    mult: dict[tuple[str, int], int | None]
    partner_stems: dict[str, int]
    target: BiDegree


def _module(name, gens, rels, basis, ring) -> SpectrumData:
    # in-memory spectra have no d2 columns: mark every line undetermined
    d2 = {(deg, i): UNKNOWN for deg, mons in basis.items()
          for i in range(len(mons))}
    return SpectrumData(name=name, is_ring=False, generators=gens,
                        relations=rels, basis=basis, d2=d2, max_t=10**6,
                        ring=ring)


def make_toy(seed: int) -> Toy:
    rng = random.Random(seed)
    r = rng.choice((2, 3))
    nx = rng.randint(6, 20)
    sx = rng.randint(1, 4)
    u_stem = rng.randint(1, 4)

    ring_gens = [Generator(0, "h", BiDegree(0, 1)),
                 Generator(1, "u", BiDegree(u_stem, 1))]
    ring = SpectrumData(name="S0", is_ring=True, generators=ring_gens,
                        relations=[], basis={}, d2={}, max_t=10**6)
    # ring basis: unit, h, u (the ring itself is barely used beyond partners)
    ring.basis = {BiDegree(0, 0): [Monomial(())],
                  BiDegree(0, 1): [Monomial(((0, 1),))],
                  BiDegree(u_stem, 1): [Monomial(((1, 1),))]}
    ring.__post_init__()

    target = BiDegree(nx - 1, sx + r)
    # module generators: 0 = x, 1..2 = target lines, then recorded products
    gens = [Generator(0, "x", BiDegree(nx, sx)),
            Generator(1, "t0", target), Generator(2, "t1", target)]
    basis = {BiDegree(nx, sx): [Monomial((), 0)],
             target: [Monomial((), 1), Monomial((), 2)]}
    rels: list[Element] = []
    mult: dict[tuple[str, int], int | None] = {}
    next_id = 3

    def product(partner: str, gid: int, degree: BiDegree):
        nonlocal next_id
        pid = 0 if partner == "h" else 1
        if rng.random() < 0.4:
            rels.append(Element.of(Monomial(((pid, 1),), gid)))
            mult[(partner, gid)] = None
            return None
        mon = Monomial(((pid, 1),), gid)
        basis.setdefault(degree, []).append(mon)
        mult[(partner, gid)] = next_id  # synthetic id: position marker only
        next_id += 1
        return mon

    for partner, stem in (("h", 0), ("u", u_stem)):
        product(partner, 0, BiDegree(nx + stem, sx + 1))
        for gid in (1, 2):
            product(partner, gid, BiDegree(target.stem + stem, target.s + 1))

    module = _module("Cnu", gens, rels, basis, ring)

    # a vanishing product partner*x forces partner*value = 0, so the plant
    # must respect every zero product
    def partner_times(partner: str, bits: int) -> int:
        out = 0
        for i in (0, 1):
            if bits >> i & 1 and mult[(partner, i + 1)] is not None:
                pid = 0 if partner == "h" else 1
                mon = Monomial(((pid, 1),), i + 1)
                out ^= 1 << module.index_of(mon)[1]
        return out

    admissible = [bits for bits in range(4)
                  if all(mult[(p, 0)] is not None or partner_times(p, bits) == 0
                         for p in ("h", "u"))]
    plant_bits = rng.choice(admissible)
    plant = BasisVec.from_bits(target, plant_bits)

    ring_state = SsState(ring)
    h = BasisVec(BiDegree(0, 1), (0,))
    u = BasisVec(BiDegree(u_stem, 1), (0,))
    ring_state.insert_differential(h, r, BasisVec.zero(
        BiDegree(-1, 1 + r)))
    ring_state.insert_differential(u, r, BasisVec.zero(
        BiDegree(u_stem - 1, 1 + r)))

    state = SsState(module)
    x = BasisVec(BiDegree(nx, sx), (0,))
    state.insert_differential(x, r, None)
    for i in (0, 1):
        state.insert_differential(
            BasisVec(target, (i,)), r, None)

    from sseqkit.algebra import mul, vec_to_element

    for partner, pvec, stem in (("h", h, 0), ("u", u, u_stem)):
        if mult[(partner, 0)] is None:
            continue  # the product x*partner vanishes; no fact to record
        px_deg = BiDegree(nx + stem, sx + 1)
        px = mul(vec_to_element(pvec, ring), vec_to_element(x, module), module)
        value_deg = BiDegree(px_deg.stem - 1, px_deg.s + r)
        # d_r(partner * x) = partner * plant, computed through the table
        bits = 0
        for i in plant.indices:
            tgt = mult[(partner, i + 1)]
            if tgt is not None:
                mon = Monomial((((0 if partner == "h" else 1), 1),), i + 1)
                idx = module.index_of(mon)[1]
                bits ^= 1 << idx
        state.insert_differential(px, r, BasisVec.from_bits(value_deg, bits))

    ctx = DeductionContext({"S0": ring_state, "Cnu": state})
    return Toy(ctx, "Cnu", x, r, plant, mult, {"h": 0, "u": u_stem}, target)
