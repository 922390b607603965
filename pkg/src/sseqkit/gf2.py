"""Small GF(2) linear algebra on int bitsets.

Vectors are ints; bit i set means basis index i contributes.
"""

from __future__ import annotations

from typing import Iterable


def echelon(rows: Iterable[int]) -> list[int]:
    """Row-reduce to a deterministic reduced echelon basis (pivots = lowest set bit)."""
    basis: list[int] = []
    for row in rows:
        for b in basis:
            low = b & -b
            if row & low:
                row ^= b
        if row:
            basis.append(row)
            # keep earlier rows reduced against the new pivot
            low = row & -row
            for i in range(len(basis) - 1):
                if basis[i] & low:
                    basis[i] ^= row
    basis.sort(key=lambda b: b & -b)
    return basis


def rank(rows: Iterable[int]) -> int:
    return len(echelon(rows))


def reduce_vec(vec: int, basis: list[int]) -> int:
    """Reduce vec against an echelon basis; returns 0 iff vec is in the span."""
    for b in basis:
        low = b & -b
        if vec & low:
            vec ^= b
    return vec


def in_span(vec: int, rows: Iterable[int]) -> bool:
    return reduce_vec(vec, echelon(rows)) == 0


def span_members(rows: Iterable[int]) -> list[int]:
    """All 2^rank vectors of the span, ascending; exhaustive, for oracles only."""
    basis = echelon(rows)
    out = [0]
    for b in basis:
        out += [v ^ b for v in out]
    return sorted(out)
