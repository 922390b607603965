"""Command line surface: validate, query, chart, deduce, check-proofs."""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .algebra import UNKNOWN, BiDegree
from .charts import ChartSpec, chart_rows, render_csv, render_svg, render_text
from .dataset import Dataset, discover, ring_of
from .deduce import (
    AllContradict,
    Deduced,
    DeductionContext,
    Inconclusive,
    candidates,
    deduce,
)
from .errors import (
    FormatError,
    NotFound,
    RangeEmpty,
    SseqError,
)
from .formats import format_proofs, load_proofs, load_ss, parse_index_vec
from .naming import (
    cofseq_shifts,
    parse_cofseq_ref,
    parse_spectrum_name,
    validate_keyword_degrees,
)
from .proofs import VerifierContext, replay
from .ss import Finding, SsState, build, build_cofseq, check_consistency, decode_level

_SEED_RE = re.compile(r"^(?P<name>.+)_seed_differentials\.csv$")


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:
        import tomli as tomllib  # type: ignore[no-redef]
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return data.get("sseqkit", data)


def _data_dir(args, config: dict) -> Path:
    if args.data_dir:
        return Path(args.data_dir)
    if "data_dir" in config:
        return Path(config["data_dir"])
    env = os.environ.get("SSEQKIT_DATA_DIR")
    if env:
        return Path(env)
    return Path(".")


def _seed_rows(ds: Dataset, name: str):
    path = ds.root / f"{name}_seed_differentials.csv"
    return load_ss(path) if path.exists() else []


def _build_states(ds: Dataset, mirrors: bool = True):
    """One state per loaded spectrum; spectra without ss rows get empty ones."""
    states: dict[str, SsState] = {}
    findings: list[Finding] = []
    for name, spectrum in sorted(ds.spectra.items()):
        rows = ds.ss_rows.get(name, [])
        state, fs = build(spectrum, rows, seed_rows=_seed_rows(ds, name),
                          mirrors=mirrors)
        states[name] = state
        findings.extend(fs)
    return states, findings


def _deduction_context(ds: Dataset, states: dict[str, SsState],
                       budget: int) -> DeductionContext:
    maps = {}
    for (src, dst), mapdata in ds.maps.items():
        if src in states and dst in states:
            maps[(src, dst)] = mapdata
    return DeductionContext(states, maps, budget)


# ---------- validate ----------

def cmd_validate(args, config) -> int:
    root = _data_dir(args, config)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return 2
    try:
        ds = discover(root)
    except FormatError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if not ds.spectra and not ds.maps and not ds.proof_files:
        print(f"warning: nothing found under {root}")
        return 0
    findings: list[str] = []
    for name in ds.skipped:
        findings.append(f"spectrum {name}: ring {ring_of(name)} not loaded")

    for name in sorted(ds.spectra):
        try:
            parse_spectrum_name(name)
        except SseqError as err:
            findings.append(f"name {name}: {err}")
    try:
        validate_keyword_degrees(ds.spectra)
    except SseqError as err:
        findings.append(str(err))

    states, build_findings = _build_states(ds)
    findings.extend(str(f) for f in build_findings)
    for name, state in sorted(states.items()):
        findings.extend(str(f) for f in check_consistency(state))

    for (src, dst), mapdata in sorted(ds.maps.items()):
        if src in ds.spectra and dst in ds.spectra:
            try:
                k, af = mapdata.shift(ds.spectra[src], ds.spectra[dst])
            except SseqError as err:
                findings.append(f"map {src}__{dst}: {err}")

    for cname, rows in sorted(ds.cofseq_rows.items()):
        try:
            ref = parse_cofseq_ref(cname)
            shifts = cofseq_shifts(ref)
        except SseqError as err:
            findings.append(f"cofseq {cname}: {err}")
            continue
        legs = cname.split("__")
        if not all(leg in states for leg in legs):
            print(f"note: cofseq {cname}: legs not all loaded, rows parsed only")
            continue
        _, fs = build_cofseq(cname, tuple(states[leg] for leg in legs),
                             shifts, rows)
        findings.extend(str(f) for f in fs)

    for f in findings:
        print(f"FINDING: {f}")
    count = len(findings)
    print(f"validate: {len(ds.spectra)} spectra, {len(ds.maps)} maps, "
          f"{len(ds.cofseq_rows)} cofiber sequences, {count} finding"
          f"{'s' if count != 1 else ''}")
    return 0 if count == 0 else 1


# ---------- query ----------

def cmd_query(args, config) -> int:
    root = _data_dir(args, config)
    ds = discover(root)
    name = args.spectrum
    if name not in ds.spectra:
        print(f"error: NotFound: spectrum {name} under {root}", file=sys.stderr)
        return 1
    spectrum = ds.spectra[name]
    degree = BiDegree(args.stem, args.s)
    dim = spectrum.dim(degree)
    if dim == 0:
        print(f"{name} ({args.stem},{args.s}): zero bidegree")
        return 0
    from .charts import element_name, mono_name

    if args.index_vec is not None:
        vec = parse_index_vec(args.index_vec, degree)
        if vec is UNKNOWN or any(i >= dim for i in vec.indices):
            print(f"error: NotFound: no element [{args.index_vec}] at "
                  f"({args.stem},{args.s})", file=sys.stderr)
            return 1
        states, _ = _build_states(ds)
        print(f"{name} ({args.stem},{args.s}) {vec}: "
              f"{element_name(vec, spectrum, 'latex')}")
        if name in states:
            val = states[name].d_value(vec, 2)
            shown = "?" if val is UNKNOWN else str(val)
            print(f"  d_2 -> {shown}")
        return 0

    print(f"{name} ({args.stem},{args.s}): dim {dim}")
    for i in range(dim):
        mon = spectrum.basis_monomial(degree, i)
        latex = mono_name(mon, spectrum) or "(unnamed)"
        d2 = spectrum.d2_of(degree, i)
        d2text = "?" if d2 is UNKNOWN else (str(d2) if not d2.is_zero else "0")
        toks = ",".join(str(t) for t in mon.tokens())
        print(f"  [{i}] {latex}  mon={toks}  d2={d2text}")
    states, _ = _build_states(ds)
    if name in states:
        state = states[name]
        for entry in state.entries(degree):
            info = decode_level(entry.level)
            if info.kind == "permanent":
                what = "permanent cycle"
            elif info.kind == "hit":
                what = f"hit by d_{info.r} from {entry.diff if entry.diff else '?'}"
            else:
                what = f"supports d_{info.r} -> {entry.diff if entry.diff else '?'}"
            print(f"  ss: {entry.base} {what}")
    for cname, rows in sorted(ds.cofseq_rows.items()):
        legs = cname.split("__")
        if name not in legs:
            continue
        for row in rows:
            if legs[row.iC] == name and row.degree == degree:
                print(f"  cofseq {cname} iC={row.iC}: base [{row.base}] "
                      f"diff [{row.diff}] level {row.level}")
    return 0


# ---------- chart ----------

def _parse_range(text: str) -> tuple[int, int]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return int(lo), int(hi)
    return int(text), int(text)


def cmd_chart(args, config) -> int:
    root = _data_dir(args, config)
    ds = discover(root)
    name = args.spectrum
    if name not in ds.spectra:
        print(f"error: NotFound: spectrum {name} under {root}", file=sys.stderr)
        return 1
    rows = ds.ss_rows.get(name)
    if rows is None:
        print(f"error: NotFound: {name}_AdamsE2_ss.csv under {root}",
              file=sys.stderr)
        return 1
    state, _ = build(ds.spectra[name], rows, seed_rows=_seed_rows(ds, name),
                     mirrors=args.mirrors)
    stem_lo, stem_hi = _parse_range(args.stem)
    s_lo, s_hi = _parse_range(args.s_range) if args.s_range else (0, 10**6)
    try:
        spec = ChartSpec(name, stem_lo, stem_hi, s_lo, s_hi,
                         fmt=args.format, naming=args.naming)
        table = chart_rows(state, spec)
    except RangeEmpty as err:
        print(f"error: RangeEmpty: {err}", file=sys.stderr)
        return 1
    out_path = Path(args.out) if args.out else None
    if args.format == "svg":
        if out_path is None:
            print("error: --format svg needs --out", file=sys.stderr)
            return 2
        render_svg(state, spec, out_path)
        print(f"wrote {out_path}")
        return 0
    text = render_csv(table) if args.format == "csv" else render_text(table)
    if out_path is None:
        sys.stdout.write(text)
    else:
        out_path.write_text(text)
        print(f"wrote {out_path}")
        if not args.no_figure:
            fig_path = out_path.with_suffix(".svg")
            render_svg(state, spec, fig_path)
            print(f"wrote {fig_path}")
    return 0


# ---------- deduce ----------

def cmd_deduce(args, config) -> int:
    root = _data_dir(args, config)
    ds = discover(root)
    states, findings = _build_states(ds)
    if args.spectrum not in states:
        print(f"error: NotFound: {args.spectrum} with ss rows under {root}",
              file=sys.stderr)
        return 1
    budget = args.budget or config.get("budget", 10000)
    ctx = _deduction_context(ds, states, budget)
    degree = BiDegree(args.stem, args.s)
    x = parse_index_vec(args.x, degree)
    if x is UNKNOWN:
        print("error: x must be an index list", file=sys.stderr)
        return 2
    try:
        result = deduce(ctx, args.spectrum, x, args.r,
                        max_depth=args.max_depth or config.get("max_depth", 2))
    except SseqError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if isinstance(result, Deduced):
        sys.stdout.write(format_proofs(result.trace.rows))
        return 0
    if isinstance(result, AllContradict):
        print("error: every candidate leads to a contradiction; "
              "the state is inconsistent", file=sys.stderr)
        sys.stdout.write(format_proofs(result.rows))
        return 1
    assert isinstance(result, Inconclusive)
    vals = ", ".join(str(v) for v in result.surviving)
    print(f"inconclusive: surviving candidates {vals}")
    return 3


# ---------- check-proofs ----------

def cmd_check_proofs(args, config) -> int:
    paths = [Path(p) for p in args.files]
    root = _data_dir(args, config)
    vctx = VerifierContext()
    if root.is_dir():
        try:
            ds = discover(root)
        except FormatError as err:
            print(f"error: {err}", file=sys.stderr)
            return 1
        states, _ = _build_states(ds)
        vctx.states = states
        vctx.null_compositions = ds.null_compositions
        vctx.deduction = _deduction_context(ds, states,
                                            config.get("budget", 10000))
        for cname, rows in sorted(ds.cofseq_rows.items()):
            legs = cname.split("__")
            if all(leg in states for leg in legs):
                try:
                    shifts = cofseq_shifts(parse_cofseq_ref(cname))
                except SseqError:
                    continue
                cstate, _ = build_cofseq(
                    cname, tuple(states[leg] for leg in legs), shifts, rows)
                vctx.cofseqs[cname] = cstate
    try:
        summary = replay(load_proofs(paths), vctx)
    except FormatError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    for line in summary.lines():
        print(line)
    if args.report_csv:
        from .formats import write_csv

        write_csv(Path(args.report_csv), ["kind", "value"],
                  [["blocks", str(summary.blocks)], ["rows", str(summary.rows)]]
                  + [[f"reason:{k}", str(v)] for k, v in
                     sorted(summary.by_reason.items())]
                  + [[f"outcome:{k}", str(v)] for k, v in
                     sorted(summary.by_outcome.items())])
        print(f"wrote {args.report_csv}")
    return 0 if not summary.failures and not summary.parse_errors else 1


# ---------- entry point ----------

def main(argv: Optional[list[str]] = None) -> int:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="TOML config file")
    shared.add_argument("--data-dir", help="dataset directory "
                                           "(or $SSEQKIT_DATA_DIR)")
    parser = argparse.ArgumentParser(
        prog="sseqkit",
        description="Parse, validate, query and extend Adams spectral "
                    "sequence datasets.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[shared],
                       help="load and cross-check a dataset directory")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("query", parents=[shared],
                       help="inspect one bidegree of a spectrum")
    p.add_argument("spectrum")
    p.add_argument("stem", type=int)
    p.add_argument("s", type=int)
    p.add_argument("index_vec", nargs="?", default=None,
                   help="optional index list selecting one element")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("chart", parents=[shared],
                       help="emit per-stem differential tables")
    p.add_argument("spectrum")
    p.add_argument("--stem", required=True, help="stem or lo:hi range")
    p.add_argument("--s-range", help="s filtration range lo:hi")
    p.add_argument("--format", choices=("text", "csv", "svg"), default="text")
    p.add_argument("--naming", choices=("latex", "indices"), default="latex")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--no-figure", action="store_true",
                   help="skip the svg figure next to --out")
    p.add_argument("--mirrors", action=argparse.BooleanOptionalAction,
                   default=False,
                   help="synthesize mirror rows while building the state")
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("deduce", parents=[shared],
                       help="deduce one differential by elimination")
    p.add_argument("spectrum")
    p.add_argument("stem", type=int)
    p.add_argument("s", type=int)
    p.add_argument("x", help="index list of the source element")
    p.add_argument("r", type=int)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_deduce)

    p = sub.add_parser("check-proofs", parents=[shared],
                       help="replay Table-of-Proofs files")
    p.add_argument("files", nargs="+")
    p.add_argument("--report-csv", help="write a machine-readable summary")
    p.set_defaults(func=cmd_check_proofs)

    args = parser.parse_args(argv)
    config = _load_config(args.config)
    try:
        return args.func(args, config)
    except SseqError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
