"""Per-stem chart emission: the staircase as (element, d_r, value) rows.

Within one stem, rows are grouped by filtration s descending; entries keep
staircase order.  Elements print with stored latex generator names when all
names are present, else in the "X (stem,s) [i]" index form.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .algebra import BasisVec, Monomial, SpectrumData
from .errors import RangeEmpty
from .formats import _fmt_rows
from .ss import SsState, decode_level

CHT_HEADER = ["stem", "s", "element", "d", "value"]


@dataclass
class ChartSpec:
    spectrum: str
    stem_lo: int
    stem_hi: int
    s_lo: int = 0
    s_hi: int = 10**6
    fmt: str = "text"          # text | csv | svg
    naming: str = "latex"      # latex | indices

    def __post_init__(self):
        if self.stem_lo > self.stem_hi or self.s_lo > self.s_hi:
            raise RangeEmpty("empty chart range")


def _exp_str(e: int) -> str:
    if e == 1:
        return ""
    if e < 10:
        return f"^{e}"
    return f"^{{{e}}}"


def mono_name(mon: Monomial, spectrum: SpectrumData) -> Optional[str]:
    """Latex name of a basis monomial, or None when a name is missing."""
    parts = []
    for gid, e in mon.ring_part:
        g = spectrum.ring_gen(gid)
        if g.name is None:
            return None
        parts.append(g.name + _exp_str(e))
    if mon.module_gen is not None:
        g = spectrum.module_gen(mon.module_gen)
        if g.name is None:
            return None
        parts.append(g.name)
    if not parts:
        return "1"
    return "".join(parts)


def element_name(v: BasisVec, spectrum: SpectrumData, naming: str) -> str:
    if v.is_zero:
        return "0"
    if naming == "latex":
        names = []
        for i in v.indices:
            name = mono_name(spectrum.basis_monomial(v.degree, i), spectrum)
            if name is None:
                names = None
                break
            names.append(name)
        if names is not None:
            return "+".join(names)
    return (f"{spectrum.name} ({v.degree.stem},{v.degree.s}) "
            f"[{','.join(str(i) for i in v.indices)}]")


def chart_rows(state: SsState, spec: ChartSpec) -> list[tuple[int, int, str, str, str]]:
    """(stem, s, element, d, value) rows; deterministic and byte-stable."""
    out = []
    spectrum = state.spectrum
    nonempty = False
    for stem in range(spec.stem_lo, spec.stem_hi + 1):
        degrees = [d for d in state.table
                   if d.stem == stem and spec.s_lo <= d.s <= spec.s_hi]
        for degree in sorted(degrees, key=lambda d: -d.s):
            for entry in state.entries(degree):
                nonempty = True
                info = decode_level(entry.level)
                elem = element_name(entry.base, spectrum, spec.naming)
                if info.kind == "permanent":
                    d_text, value = "", "Permanent"
                else:
                    d_text = f"d_{{{info.r}}}"
                    if info.kind == "hit":
                        d_text += "^{-1}"
                    if entry.diff is None:
                        value = "?"
                    else:
                        value = element_name(entry.diff, spectrum, spec.naming)
                out.append((stem, degree.s, elem, d_text, value))
    if not out and not nonempty:
        raise RangeEmpty(
            f"{spectrum.name}: no entries with stem in "
            f"[{spec.stem_lo},{spec.stem_hi}], s in [{spec.s_lo},{spec.s_hi}]")
    return out


def render_text(rows) -> str:
    lines = []
    last = None
    for stem, s, elem, d, value in rows:
        if stem != last:
            lines.append(f"stem {stem}")
            last = stem
        lines.append(f"  {s:>3}  {elem} | {d} | {value}")
    return "\n".join(lines) + "\n"


def render_csv(rows) -> str:
    return _fmt_rows(CHT_HEADER, ([str(stem), str(s), elem, d, value]
                                  for stem, s, elem, d, value in rows))


def render_svg(state: SsState, spec: ChartSpec, path: Path) -> None:
    """Minimal grid: one dot per staircase line, one arrow per known value."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(max(4, (spec.stem_hi - spec.stem_lo + 1) * 0.9),
                                    6))
    xs, ys = [], []
    arrows = []
    for stem in range(spec.stem_lo, spec.stem_hi + 1):
        for degree in sorted(d for d in state.table if d.stem == stem):
            if not spec.s_lo <= degree.s <= spec.s_hi:
                continue
            entries = state.entries(degree)
            n = len(entries)
            for i, entry in enumerate(entries):
                off = (i - (n - 1) / 2) * 0.14
                x, y = stem + off, degree.s
                xs.append(x)
                ys.append(y)
                info = decode_level(entry.level)
                if info.kind == "supports" and entry.diff is not None \
                        and not entry.diff.is_zero:
                    arrows.append(((x, y), (stem - 1, degree.s + info.r)))
    ax.scatter(xs, ys, s=12, color="black", zorder=3)
    for (x0, y0), (x1, y1) in arrows:
        ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                    arrowprops=dict(arrowstyle="->", color="tab:blue", lw=0.8))
    ax.set_xlabel("stem")
    ax.set_ylabel("s")
    ax.set_xlim(spec.stem_lo - 1, spec.stem_hi + 1)
    ax.set_title(state.spectrum.name)
    ax.grid(True, alpha=0.25)
    fig.savefig(path, format=path.suffix.lstrip(".") or "svg",
                bbox_inches="tight")
    plt.close(fig)
