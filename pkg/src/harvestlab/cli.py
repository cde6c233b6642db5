"""Command-line front end.

Subcommands::

    point         one parameter point -> JSON (or CSV) report
    sweep         scan one variable -> CSV table
    optimize-gap  optimal gap difference at one geometry -> JSON
    gap-curve     optimal gap difference against dz -> CSV table
    reproduce     preset figure data -> CSV table
    validate      closed forms against the quadrature oracle -> JSON report

Parameters are the dimensionless ratios ``omega_a * sigma``,
``delta_omega / omega_a``, ``L / sigma`` and ``dz / sigma``.  Every value is
per squared coupling unless ``--coupling`` is given.

A run file (``--config``) holds ``key = value`` lines whose keys are the long
option names (``omega-a``, ``l``, ...) plus ``command`` (and ``figure`` for
reproduce); options given on the command line win.  CSV metadata lines
(``# key=value``) use the same keys, so a CSV written by this tool is itself a
valid run file for the run that produced it.

Exit status: 0 success, 1 parameter error, 2 numerical failure, 3 failed
certification.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

from . import __version__
from .figures import PRESETS, figure_table, get_preset
from .measures import report, rescale_report
from .model import Alignment, DetectorPair, Geometry, evaluate
from .optimize import (
    FlatObjectiveWarning,
    PointParams,
    Quantity,
    Spacing,
    SweepSpec,
    SweepVariable,
    optimal_gap,
    optimal_gap_curve,
    sweep,
)
from .oracle import CertificationGrid, QuadratureSpec, certify

EXIT_OK = 0
EXIT_PARAMETER = 1
EXIT_NUMERICAL = 2
EXIT_CERTIFICATION = 3

COMMANDS = ("point", "sweep", "optimize-gap", "gap-curve", "reproduce", "validate")
# options that name files or workers and do not affect the output content
_NOT_ECHOED = {"command", "config", "output", "workers", "figure"}


class ParameterError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParameterError(message)


# ---------------------------------------------------------------------------
# formatting


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, complex):
        return [_json_safe(v.real), _json_safe(v.imag)]
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def _dump_json(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, allow_nan=False) + "\n"


def _dump_csv(meta: list[tuple[str, str]], header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# harvestlab {__version__}\n")
    for k, v in meta:
        buf.write(f"# {k}={v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _echo(args) -> list[tuple[str, str]]:
    meta = [("command", args.command)]
    if args.command == "reproduce":
        meta.append(("figure", args.figure))
    for key, value in vars(args).items():
        if key in _NOT_ECHOED or value is None:
            continue
        meta.append((key.replace("_", "-"), _fmt(value)))
    return meta


# ---------------------------------------------------------------------------
# argument parsing


def _csv_floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(t) for t in text.split(","))


def _add_point_options(p: argparse.ArgumentParser, ratio: bool = True) -> None:
    p.add_argument("--alignment", default="parallel", choices=[a.value for a in Alignment])
    p.add_argument("--omega-a", type=float, default=0.1, help="omega_a * sigma")
    if ratio:
        p.add_argument("--delta-omega-ratio", type=float, default=0.0, help="delta_omega / omega_a")
    p.add_argument("--l", type=float, default=1.0, help="L / sigma")
    p.add_argument("--dz", type=float, default=None, help="dz / sigma (unused without a boundary)")


def _add_output_options(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--format", default=default_format, choices=["csv", "json"])
    p.add_argument("--output", "-o", default=None, help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="harvestlab", description="Correlation harvesting near a reflecting plane.")
    parser.add_argument("--version", action="version", version=f"harvestlab {__version__}")
    parser.add_argument("--config", default=None, help="key = value run file; flags win")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("point", help="evaluate one parameter point")
    _add_point_options(p)
    p.add_argument("--coupling", type=float, default=1.0)
    _add_output_options(p, "json")

    p = sub.add_parser("sweep", help="scan one variable")
    _add_point_options(p)
    # required, but checked in cmd_sweep so a run file can supply them
    p.add_argument("--variable", default=None, choices=[v.value for v in SweepVariable])
    p.add_argument("--lo", type=float, default=None)
    p.add_argument("--hi", type=float, default=None)
    p.add_argument("--n-points", type=int, default=101)
    p.add_argument("--spacing", default="linear", choices=[s.value for s in Spacing])
    p.add_argument("--quantities", default="concurrence,mutual_info",
                   help="comma list of " + ",".join(q.value for q in Quantity))
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=None)
    _add_output_options(p, "csv")

    p = sub.add_parser("optimize-gap", help="optimal gap difference at one geometry")
    _add_point_options(p, ratio=False)
    p.add_argument("--quantity", default="concurrence", choices=["concurrence", "mutual_info"])
    p.add_argument("--bound", type=float, default=20.0, help="upper end of delta_omega * sigma")
    p.add_argument("--coupling", type=float, default=1.0)
    _add_output_options(p, "json")

    p = sub.add_parser("gap-curve", help="optimal gap difference against dz")
    p.add_argument("--alignment", default="parallel", choices=["parallel", "vertical"])
    p.add_argument("--omega-a", type=float, default=0.1)
    p.add_argument("--l", type=float, default=1.0)
    p.add_argument("--dz-lo", type=float, default=0.02)
    p.add_argument("--dz-hi", type=float, default=5.0)
    p.add_argument("--n-points", type=int, default=50)
    p.add_argument("--spacing", default="linear", choices=[s.value for s in Spacing])
    p.add_argument("--quantity", default="concurrence", choices=["concurrence", "mutual_info"])
    p.add_argument("--bound", type=float, default=20.0)
    p.add_argument("--workers", type=int, default=None)
    _add_output_options(p, "csv")

    p = sub.add_parser("reproduce", help="data behind one preset figure")
    p.add_argument("figure", help="one of " + ", ".join(PRESETS))
    p.add_argument("--workers", type=int, default=None)
    _add_output_options(p, "csv")

    grid = CertificationGrid()
    quad = QuadratureSpec()
    p = sub.add_parser("validate", help="certify closed forms against the quadrature oracle")
    p.add_argument("--rel-tol", type=float, default=1e-6, help="pass/fail threshold")
    p.add_argument("--omega-a-values", default=",".join(f"{v:g}" for v in grid.omega_a))
    p.add_argument("--delta-omega-values", default=",".join(f"{v:g}" for v in grid.delta_omega))
    p.add_argument("--l-values", default=",".join(f"{v:g}" for v in grid.separation))
    p.add_argument("--dz-values", default=",".join(f"{v:g}" for v in grid.dz))
    p.add_argument("--alignments", default="parallel,vertical")
    p.add_argument("--quad-abs-tol", type=float, default=quad.abs_tol)
    p.add_argument("--quad-rel-tol", type=float, default=quad.rel_tol)
    p.add_argument("--pv-window", type=float, default=quad.pv_window)
    p.add_argument("--max-subdivisions", type=int, default=quad.max_subdivisions)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output", "-o", default=None)
    return parser


def read_config(path: str) -> dict[str, str]:
    """Parse a flat ``key = value`` run file (CSV metadata lines included)."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if line.startswith("#"):
                line = line[1:].strip()
                if "=" not in line:
                    continue  # plain comment
            elif not line:
                continue
            elif "=" not in line:
                if out:
                    break  # start of CSV data
                raise ParameterError(f"{path}:{lineno}: expected key = value")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key.lstrip("-")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    pre = _Parser(add_help=False)
    pre.add_argument("--config", default=None)
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return argv
    try:
        config = read_config(known.config)
    except OSError as exc:
        raise ParameterError(f"cannot read config: {exc}") from None
    command = config.pop("command", None)
    figure = config.pop("figure", None)
    if not any(a in COMMANDS for a in argv):
        if command is None:
            raise ParameterError("no command given on the command line or in the config")
        # the subcommand must precede its own flags
        argv = ["--config", known.config, command] + ([figure] if command == "reproduce" and figure else []) + rest
    command = next(a for a in argv if a in COMMANDS)
    sub = parser._subparsers._group_actions[0].choices[command]
    dests = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest not in dests or dest == "help":
            if key in ("kind", "quantity", "alignment", "omega_a", "abscissa", "grid", "points",
                       "delta_omega_ratios", "L", "dz", "bound") and command == "reproduce":
                continue  # preset description, fixed by the figure id
            raise ParameterError(f"unknown config key {key!r} for {command}")
        defaults[dest] = value
    sub.set_defaults(**defaults)
    return argv


# ---------------------------------------------------------------------------
# commands


def _geometry(args) -> Geometry:
    al = Alignment(args.alignment)
    if al is Alignment.BOUNDARYLESS:
        return Geometry(al, args.l)
    if args.dz is None:
        raise ParameterError(f"--dz is required for {al.value} alignment")
    return Geometry(al, args.l, args.dz)


def _params_echo(args, geom: Geometry) -> dict:
    out = {
        "alignment": geom.alignment.value,
        "omega_a": args.omega_a,
        "L": geom.separation,
        "dz": geom.dz if geom.alignment is not Alignment.BOUNDARYLESS else None,
    }
    if hasattr(args, "delta_omega_ratio"):
        out["delta_omega_ratio"] = args.delta_omega_ratio
    out["coupling"] = args.coupling
    return out


def cmd_point(args) -> tuple[str, int]:
    geom = _geometry(args)
    pair = DetectorPair.from_ratios(args.omega_a, args.delta_omega_ratio, args.coupling)
    state = evaluate(pair, geom)
    rep = rescale_report(report(state), args.coupling)
    phys = state.scaled(args.coupling)
    result = {
        "p_a": phys.p_a,
        "p_b": phys.p_b,
        "abs_c": abs(phys.c),
        "abs_x": abs(phys.x),
        "concurrence": rep.concurrence,
        "mutual_info": rep.mutual_info,
        "l_plus": rep.l_plus,
        "l_minus": rep.l_minus,
        "perturbative_ok": rep.perturbative_ok,
    }
    if args.format == "json":
        return _dump_json({"parameters": _params_echo(args, geom), "result": result}), EXIT_OK
    return _dump_csv(_echo(args), list(result), [list(result.values())]), EXIT_OK


def cmd_sweep(args) -> tuple[str, int]:
    missing = [f"--{k}" for k in ("variable", "lo", "hi") if getattr(args, k) is None]
    if missing:
        raise ParameterError(f"sweep needs {', '.join(missing)}")
    quantities = tuple(Quantity(q.strip()) for q in args.quantities.split(",") if q.strip())
    geom = _geometry(args) if args.variable != "dz" else None
    dz = geom.dz if geom is not None else math.inf
    fixed = PointParams(args.alignment, args.omega_a, args.omega_a * args.delta_omega_ratio, args.l, dz)
    spec = SweepSpec(args.variable, args.lo, args.hi, args.n_points, fixed, args.spacing,
                     quantities, args.coupling)
    rows = sweep(spec, args.workers)
    header = [spec.variable.value] + [q.value for q in quantities] + ["error"]
    table = [[r[h] for h in header] for r in rows]
    if args.format == "json":
        return _dump_json({"parameters": dict(_echo(args)), "rows": [dict(zip(header, t)) for t in table]}), EXIT_OK
    return _dump_csv(_echo(args), header, table), EXIT_OK


def _result_dict(res, omega_a: float) -> dict:
    return {
        "delta_omega_star": res.delta_omega_star,
        "ratio_star": res.delta_omega_star / omega_a if omega_a > 0 else None,
        "value_at_star": res.value_at_star,
        "at_lower_bound": res.at_lower_bound,
        "bracket": list(res.bracket),
        "flat": res.flat,
    }


def cmd_optimize_gap(args) -> tuple[str, int]:
    geom = _geometry(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FlatObjectiveWarning)
        res = optimal_gap(args.omega_a, geom, args.quantity, args.bound, args.coupling)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    result = _result_dict(res, args.omega_a)
    if args.format == "json":
        params = _params_echo(args, geom) | {"quantity": args.quantity, "bound": args.bound}
        return _dump_json({"parameters": params, "result": result}), EXIT_OK
    result["bracket"] = f"{res.bracket[0]!r};{res.bracket[1]!r}"
    return _dump_csv(_echo(args), list(result), [list(result.values())]), EXIT_OK


def cmd_gap_curve(args) -> tuple[str, int]:
    spec = SweepSpec("dz", args.dz_lo, args.dz_hi, args.n_points,
                     PointParams(args.alignment, args.omega_a, 0.0, args.l), args.spacing)
    rows = optimal_gap_curve(args.omega_a, args.l, spec.abscissae(), args.alignment,
                             args.quantity, args.bound, args.workers)
    header = ["dz", "delta_omega_star", "ratio_star", "value_at_star", "at_lower_bound", "error"]
    table = []
    for row in rows:
        if row.result is None:
            table.append([row.dz, math.nan, math.nan, math.nan, "", row.error])
            continue
        d = _result_dict(row.result, args.omega_a)
        table.append([row.dz, d["delta_omega_star"], d["ratio_star"] if d["ratio_star"] is not None else math.nan,
                      d["value_at_star"], d["at_lower_bound"], ""])
    if args.format == "json":
        return _dump_json({"parameters": dict(_echo(args)), "rows": [dict(zip(header, t)) for t in table]}), EXIT_OK
    return _dump_csv(_echo(args), header, table), EXIT_OK


def cmd_reproduce(args) -> tuple[str, int]:
    preset = get_preset(args.figure)
    header, rows = figure_table(preset, args.workers)
    if args.format == "json":
        return _dump_json({"metadata": dict(preset.metadata()),
                           "rows": [dict(zip(header, r)) for r in rows]}), EXIT_OK
    return _dump_csv(preset.metadata(), header, rows), EXIT_OK


def _point_report(rec) -> dict:
    pair, geom = rec.pair, rec.geometry
    out = {
        "alignment": geom.alignment.value,
        "omega_a": pair.omega_a,
        "omega_b": pair.omega_b,
        "L": geom.separation,
        "dz": geom.dz,
        "worst_rel_error": rec.worst,
    }
    for name, (closed, ref, err, rel) in rec.entries.items():
        out[name] = {"closed_form": closed, "oracle": ref, "oracle_error": err, "rel_error": rel}
    return out


def cmd_validate(args) -> tuple[str, int]:
    if not args.rel_tol > 0:
        raise ParameterError("--rel-tol must be > 0")
    alignments = tuple(Alignment(a.strip()) for a in args.alignments.split(",") if a.strip())
    grid = CertificationGrid(
        _csv_floats(args.omega_a_values),
        _csv_floats(args.delta_omega_values),
        _csv_floats(args.l_values),
        _csv_floats(args.dz_values),
        alignments,
    )
    quad = QuadratureSpec(abs_tol=args.quad_abs_tol, rel_tol=args.quad_rel_tol,
                          pv_window=args.pv_window, max_subdivisions=args.max_subdivisions)
    records = certify(grid, quad, args.workers)
    points = [_point_report(r) for r in records]
    worst = max(range(len(points)), key=lambda i: points[i]["worst_rel_error"])
    failed = [i for i, p in enumerate(points) if not p["worst_rel_error"] <= args.rel_tol]
    verdict = "fail" if failed else "pass"
    out = {
        "verdict": verdict,
        "rel_tol": args.rel_tol,
        "n_points": len(points),
        "n_failed": len(failed),
        "worst": points[worst],
        "quadrature": {"abs_tol": quad.abs_tol, "rel_tol": quad.rel_tol, "pv_window": quad.pv_window,
                       "eps_ladder": list(quad.eps_ladder), "max_subdivisions": quad.max_subdivisions},
        "points": points,
    }
    return _dump_json(out), EXIT_OK if not failed else EXIT_CERTIFICATION


_DISPATCH = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "optimize-gap": cmd_optimize_gap,
    "gap-curve": cmd_gap_curve,
    "reproduce": cmd_reproduce,
    "validate": cmd_validate,
}


def _fail(kind: str, exc: BaseException, code: int) -> int:
    err = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        text, code = _DISPATCH[args.command](args)
    except (ParameterError, ValueError) as exc:
        return _fail("parameter", exc, EXIT_PARAMETER)
    except ArithmeticError as exc:
        return _fail("numerical", exc, EXIT_NUMERICAL)
    try:
        _emit(text, getattr(args, "output", None))
    except OSError as exc:
        return _fail("parameter", exc, EXIT_PARAMETER)
    return code


if __name__ == "__main__":
    sys.exit(main())
