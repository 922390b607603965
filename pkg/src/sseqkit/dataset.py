"""Directory-level discovery and loading of a dataset.

Only S0 and tmf are ring spectra; tmf_X smashes are tmf-modules and every
other spectrum is an S0-module.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .algebra import MapData, SpectrumData
from .errors import MissingFile
from .formats import CofseqRow, SsRow, load_cofseq, load_map, load_spectrum, load_ss

RING_NAMES = ("S0", "tmf")

_GEN_RE = re.compile(r"^(?P<name>.+)_AdamsE2_generators\.csv$")
_SS_RE = re.compile(r"^(?P<name>.+)_AdamsE2_ss\.csv$")
_MAP_RE = re.compile(r"^map_(?P<rest>.+)\.csv$")
_COFSEQ_RE = re.compile(r"^cofseq_(?P<name>.+)\.csv$")
_PROOFS_RE = re.compile(r"^proofs-part(?P<n>\d+)\.csv$")


def ring_of(name: str) -> Optional[str]:
    """The acting ring's name, or None when `name` is itself a ring."""
    if name in RING_NAMES:
        return None
    if name.startswith("tmf_"):
        return "tmf"
    return "S0"


def split_map_filename(rest: str) -> tuple[str, str]:
    """map_X_to_Y or map_X_Y; X and Y never contain '_to_'."""
    if "_to_" in rest:
        src, dst = rest.split("_to_", 1)
        return src, dst
    # without "to": X never embeds a full __-free spectrum boundary; the
    # newer vintage separates with a single underscore between two names
    for i in range(1, len(rest)):
        if rest[i] != "_":
            continue
        src, dst = rest[:i], rest[i + 1:]
        try:
            from .naming import parse_spectrum_name

            parse_spectrum_name(src)
            parse_spectrum_name(dst)
            return src, dst
        except Exception:
            continue
    raise MissingFile(f"cannot split map filename {rest!r}")


@dataclass
class Dataset:
    root: Path
    spectra: dict[str, SpectrumData] = field(default_factory=dict)
    ss_rows: dict[str, list[SsRow]] = field(default_factory=dict)
    maps: dict[tuple[str, str], MapData] = field(default_factory=dict)
    cofseq_rows: dict[str, list[CofseqRow]] = field(default_factory=dict)
    proof_files: list[Path] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    null_compositions: frozenset = frozenset()

    def spectrum(self, name: str) -> SpectrumData:
        if name not in self.spectra:
            raise MissingFile(f"spectrum {name} not loaded", path=str(self.root))
        return self.spectra[name]


def discover(root: Union[str, Path]) -> Dataset:
    """Load every recognized table file under `root` (not recursive)."""
    rootp = Path(root)
    ds = Dataset(rootp)
    names = []
    for p in sorted(rootp.iterdir()):
        m = _GEN_RE.match(p.name)
        if m:
            names.append(m.group("name"))
    # rings first so modules can reference them
    for name in sorted(names, key=lambda n: (ring_of(n) is not None, n)):
        ring_name = ring_of(name)
        ring = ds.spectra.get(ring_name) if ring_name else None
        if ring_name and ring is None:
            ds.skipped.append(name)
            continue  # module without its ring; surfaced by validate
        ds.spectra[name] = load_spectrum(rootp, name,
                                         is_ring=ring_name is None, ring=ring)
    for p in sorted(rootp.iterdir()):
        if _SS_RE.match(p.name):
            ds.ss_rows[_SS_RE.match(p.name).group("name")] = load_ss(p)
        elif _MAP_RE.match(p.name):
            rest = _MAP_RE.match(p.name).group("rest")
            src, dst = split_map_filename(rest)
            module_target = ring_of(dst) is not None
            ds.maps[(src, dst)] = load_map(p, module_target, name=f"{src}__{dst}")
        elif _COFSEQ_RE.match(p.name):
            ds.cofseq_rows[_COFSEQ_RE.match(p.name).group("name")] = load_cofseq(p)
        elif _PROOFS_RE.match(p.name):
            ds.proof_files.append(p)
        elif p.name == "null_compositions.csv":
            from .formats import load_null_compositions

            ds.null_compositions = load_null_compositions(p)
    ds.proof_files.sort(key=lambda p: int(_PROOFS_RE.match(p.name).group("n")))
    return ds
