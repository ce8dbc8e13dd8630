"""Command line: analyze, orbit, trace and catalog.

Exit codes: 0 success, 1 analysis failure, 2 bad input, 3 no affine chart,
4 nothing to trace, 5 trace aborted.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, catalog, linalg
from .config import Config, ConfigError, dump, load, scalar_json, vector_json, write
from .flex import FlexError, ZeroMotion, normalize_motion, pinned_motions, symmetric_trace_flex, trace_flex
from .geometry import signature, sparsity_counts
from .realization import ChartError, affine_chart, auto_chart, degeneracy_report
from .rigidity import PinError, build_rigidity_matrix, column_labels, pin, rigidity_verdict
from .stress import cokernel_stresses
from .symmetry import (CorrelationGroup, SymmetryError, analyze_orbits, identity_element,
                       nontrivial_orbit_motions, orbit_structure)
from .svg import render_frames

log = logging.getLogger("projrig")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CHART, EXIT_ZERO, EXIT_TRACE = range(6)


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# helpers


def _load(args) -> Config:
    try:
        return load(args.file, args.mode, args.tolerance)
    except ConfigError as exc:
        raise CommandError(str(exc), EXIT_INPUT) from None


def _charted(cfg: Config, args, allow_moves: bool = True):
    """The realization, moved by a seeded rational map if ``--auto-chart`` asks for it."""
    r = cfg.realization
    try:
        affine_chart(r)
        return r, None
    except ChartError as exc:
        if not (args.auto_chart and allow_moves):
            raise CommandError(f"{exc} (try --auto-chart)", EXIT_CHART) from None
    try:
        moved, t = auto_chart(r, args.seed)
    except ChartError as exc:
        raise CommandError(str(exc), EXIT_CHART) from None
    return moved, t


def _kernel_json(k: np.ndarray) -> list:
    return [vector_json(k[:, i]) for i in range(k.shape[1])]


def _emit(args, obj) -> None:
    indent = None if args.json else 2
    sys.stdout.write(json.dumps(obj, indent=indent) + "\n")


# --------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> dict:
    cfg = _load(args)
    r, moved_by = _charted(cfg, args)
    g = r.geometry
    m = build_rigidity_matrix(r)
    verdict = rigidity_verdict(r, args.tolerance)
    sig = signature(g)
    counts = sparsity_counts(g)
    res = linalg.rank_and_kernel(m.matrix, args.tolerance)
    stresses = cokernel_stresses(m) if r.exact else None
    report = {
        "mode": "exact" if r.exact else "float",
        "signature": str(sig),
        "points": len(g.points),
        "lines": len(g.lines),
        "incidences": len(g.incidences),
        "sparsity_excess": counts.excess,
        **verdict.as_dict(),
        "columns_labels": column_labels(g),
        "kernel_basis": _kernel_json(res.kernel),
        "degeneracy": degeneracy_report(cfg.realization).as_dict(),
    }
    if stresses is None:
        left = linalg.left_kernel(m.matrix, args.tolerance)
        report["cokernel_dimension"] = left.shape[1]
    else:
        report["cokernel_dimension"] = len(stresses)
        report["stresses"] = [{f"{p},{l}": scalar_json(c) for (p, l), c in s.coefficients.items() if c != 0}
                              for s in stresses]
    if moved_by is not None:
        report["chart_transform"] = [vector_json(row) for row in moved_by.matrix]
    pins = args.pin or list(cfg.pins)
    if pins:
        try:
            pm = pin(r, pins, m)
        except PinError as exc:
            raise CommandError(str(exc), EXIT_INPUT) from None
        pr = linalg.rank_and_kernel(pm.matrix, args.tolerance)
        report["pinned"] = {"pins": list(pins), "rank": pr.rank, "kernel_dimension": pr.nullity}
    return report


def _group(cfg: Config, name: str | None) -> tuple[str, CorrelationGroup]:
    if name == "trivial":
        return name, CorrelationGroup([identity_element(cfg.realization.exact)])
    if name is None:
        if not cfg.groups:
            raise CommandError("configuration declares no groups; use --group trivial", EXIT_INPUT)
        name = next(iter(cfg.groups))
    if name not in cfg.groups:
        raise CommandError(f"unknown group {name!r}; declared: {', '.join(cfg.groups) or 'none'}", EXIT_INPUT)
    return name, cfg.groups[name]


def cmd_orbit(args) -> dict:
    cfg = _load(args)
    r, _ = _charted(cfg, args, allow_moves=False)
    name, group = _group(cfg, args.group)
    try:
        rep = analyze_orbits(r, group)
    except SymmetryError as exc:
        raise CommandError(str(exc), EXIT_FAIL) from None
    st = rep.structure
    om = rep.matrix
    return {
        "group": name,
        "order": len(group),
        "element_orbits": [[f"{k}:{e}" for k, e in o] for o in st.element_orbits],
        "incidence_orbits": [
            {"label": f"i{i}", "members": [list(m) for m in o.members],
             "representative": {"q": o.q[1], "gamma": o.gamma, "r": o.r[1]}}
            for i, o in enumerate(st.incidence_orbits)],
        "matrix": {"rows": om.row_labels(), "columns": om.column_labels(),
                   "entries": [vector_json(row) for row in om.matrix]},
        "kernel_dimension": rep.kernel_dimension,
        "symmetric_trivial_dimension": rep.symmetric_trivial,
        "nontrivial_symmetric_dimension": rep.nontrivial_dimension,
        "kernel_basis": _kernel_json(rep.kernel),
        "lift_residuals": [scalar_json(x) for x in rep.lift_residuals],
    }


def cmd_trace(args) -> dict:
    cfg = _load(args)
    r, _ = _charted(cfg, args, allow_moves=args.group is None)
    # configuration pins suit pinned traces; pinning whole orbits usually over-constrains
    pins = args.pins if args.pins is not None else (list(cfg.pins) if args.group is None else [])
    try:
        if args.group is not None:
            _, group = _group(cfg, args.group)
            st = orbit_structure(r, group)
            m_hat = None
            if args.motion:
                cand = nontrivial_orbit_motions(r, st)
                if args.motion >= cand.shape[1]:
                    raise CommandError(f"only {cand.shape[1]} nontrivial symmetric motion(s)", EXIT_INPUT)
                m_hat = normalize_motion(cand[:, args.motion])
            trace = symmetric_trace_flex(r, group, m_hat, pins, args.steps, args.dt, structure=st)
        else:
            if len(pins) != 4:
                raise CommandError("a pinned trace needs four --pins", EXIT_INPUT)
            basis = pinned_motions(r, pins)
            if basis.shape[1] == 0:
                raise ZeroMotion("no infinitesimal motion with these pins")
            if args.motion >= basis.shape[1]:
                raise CommandError(f"only {basis.shape[1]} pinned motion(s)", EXIT_INPUT)
            trace = trace_flex(r, pins, normalize_motion(basis[:, args.motion]), args.steps, args.dt)
    except ZeroMotion as exc:
        raise CommandError(str(exc), EXIT_ZERO) from None
    except FlexError as exc:
        raise CommandError(str(exc), EXIT_TRACE) from None
    except SymmetryError as exc:
        raise CommandError(str(exc), EXIT_FAIL) from None
    except ValueError as exc:  # PinError, motion outside the kernel
        raise CommandError(str(exc), EXIT_INPUT) from None
    out = trace.as_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=None if args.json else 2) + "\n")
    if args.svg:
        paths = render_frames(trace, args.svg)
        out["svg_frames"] = [str(p) for p in paths]
    if args.out:
        return {"trace": str(args.out), "samples": len(trace.samples),
                "max_residual": trace.max_residual, **({"svg_frames": out["svg_frames"]} if args.svg else {})}
    return out


def cmd_catalog(args) -> dict:
    if args.action == "list":
        out = []
        for name in catalog.names():
            e = catalog.get(name)
            out.append({"name": name, "mode": "exact" if e.exact else "float",
                        "signature": str(signature(e.geometry)), "groups": list(e.groups),
                        "notes": e.notes})
        return {"entries": out}
    if not args.name:
        raise CommandError(f"catalog {args.action} needs an entry name", EXIT_INPUT)
    try:
        e = catalog.get(args.name)
    except catalog.CatalogError as exc:
        raise CommandError(exc.args[0], EXIT_INPUT) from None
    doc = dump(e.realization, e.groups, e.pins)
    if args.action == "show":
        return {"name": e.name, "notes": e.notes, "config": doc}
    if not args.path:
        raise CommandError("catalog export needs an output path", EXIT_INPUT)
    write(args.path, doc)
    return {"exported": e.name, "path": str(args.path)}


# --------------------------------------------------------------------------


def _global_options(ap: argparse.ArgumentParser, suppress: bool) -> None:
    """Flags accepted both before and after the subcommand."""
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    ap.add_argument("--mode", choices=("exact", "float"), default=d(None),
                    help="override the configuration's arithmetic")
    ap.add_argument("--seed", type=int, default=d(0), help="seed for --auto-chart (default 0)")
    ap.add_argument("--tolerance", type=float, default=d(linalg.FLOAT_RTOL),
                    help="float tolerance for incidences and rank (default 1e-9)")
    ap.add_argument("--auto-chart", action="store_true", default=d(False),
                    help="move the realization by a seeded rational map when it has no affine chart")
    out = ap.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true", default=d(False), help="compact JSON output")
    out.add_argument("--pretty", action="store_true", default=d(False), help="indented JSON output (default)")
    ap.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="projrig", description="Projective rigidity of point-line configurations.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(ap, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="rank, motions and stresses of a configuration")
    p.add_argument("file")
    p.add_argument("--pin", "--pins", dest="pin", nargs=4, metavar="ID")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("orbit", parents=[common], help="orbit rigidity matrix for a symmetry group")
    p.add_argument("file")
    p.add_argument("--group", help="group name from the file, or 'trivial'")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("trace", parents=[common], help="follow a finite flex")
    p.add_argument("file")
    p.add_argument("--pins", "--pin", dest="pins", nargs=4, metavar="ID")
    p.add_argument("--group", help="trace symmetrically under this group")
    p.add_argument("--motion", type=int, default=0, help="index of the kernel basis vector to follow")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--dt", type=float, default=1e-2)
    p.add_argument("--out", help="write the trace JSON here instead of stdout")
    p.add_argument("--svg", help="directory for per-sample SVG frames")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("catalog", parents=[common], help="built-in configurations")
    p.add_argument("action", choices=("list", "show", "export"))
    p.add_argument("name", nargs="?")
    p.add_argument("path", nargs="?")
    p.set_defaults(func=cmd_catalog)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        result = args.func(args)
    except CommandError as exc:
        print(f"projrig: error: {exc}", file=sys.stderr)
        return exc.code
    _emit(args, result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
