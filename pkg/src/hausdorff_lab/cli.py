"""Command-line entry point: ``hausdorff-lab <command> [options]``.

Scalar results go to stdout as JSON.  Array results (``apply``, ``symbol``,
``mellin``, ``spectrum``) are CSV: written to stdout when no output directory
is set, otherwise to files in ``--out`` (default ``$HAUSDORFF_LAB_OUT``)
alongside a JSON report.  Every JSON report embeds the resolved config.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, hausdorff, mellin, presets, samples, spectral
from .errors import EvalDomainError, NumericalError, ValidationError
from .numgrid import (
    GridSpec,
    conjugate_exponent,
    load_gridfunction,
    log_axis,
    lp_norm,
    save_gridfunction,
    uniform_axis,
)

OUT_ENV = "HAUSDORFF_LAB_OUT"


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _add_operator_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=presets.NAMES, help="named operator")
    src.add_argument("--config", type=Path, help="operator config (JSON file)")
    p.add_argument("--p", type=str, default=None, help="exponent p (number or 'inf'); default from the config")


def _add_grid_args(p, default_nodes=1024):
    p.add_argument("--grid", type=Path, help="grid spec JSON ({'axes': [...]})")
    p.add_argument("--nodes", type=int, default=default_nodes, help="nodes per axis")
    p.add_argument("--ylim", type=float, nargs=2, default=(-20.0, 20.0), metavar=("YMIN", "YMAX"),
                   help="log-uniform axes over y = -log x")
    p.add_argument("--xlim", type=float, nargs=2, default=None, metavar=("XMIN", "XMAX"),
                   help="uniform axes over x instead of log axes")


def _add_function_args(p, default="gauss"):
    p.add_argument("--f", choices=samples.NAMED, default=default, help="built-in test function")
    p.add_argument("--f-expr", help="test function as an expression in u1, u2, ... (read as x1, x2, ...)")
    p.add_argument("--input", type=Path, help="test function CSV (with its .json sidecar)")
    p.add_argument("--center", type=float, default=0.0, help="gauss: centre in grid coordinates")
    p.add_argument("--width", type=float, default=1.0, help="gauss: width in grid coordinates")
    p.add_argument("--tail", default=None, help="zero | nearest | constant:<value>")
    p.add_argument("--seed", type=int, default=0)


def _add_out_arg(p):
    p.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV})")


# --------------------------------------------------------------------------
# resolution
# --------------------------------------------------------------------------


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ValidationError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _raw_config(args):
    if args.preset:
        return presets.preset(args.preset)
    return _load_json(args.config)


def _operator(args):
    cfg = _raw_config(args)
    if presets.is_control(cfg):
        raise ValidationError("the Gaussian control is only available to 'spectrum' and 'riesz-report'")
    if args.p is not None:
        cfg["p"] = args.p
    return hausdorff.build(cfg, cfg.get("name", args.preset or ""))


def _grid(args, dim):
    if args.grid:
        return GridSpec.from_dict(_load_json(args.grid))
    if args.xlim:
        ax = uniform_axis(args.xlim[0], args.xlim[1], args.nodes)
    else:
        ax = log_axis(args.ylim[0], args.ylim[1], args.nodes)
    return GridSpec((ax,) * dim)


def _function(args, spec, rng=None):
    tail = samples.parse_tail(args.tail) if args.tail else None
    if args.input:
        f = load_gridfunction(args.input)
        if f.spec != spec and not args.grid:
            spec = f.spec
        return f if tail is None else f.with_values(f.values, tail)
    tail = tail or samples.ZERO_TAIL
    if args.f_expr:
        return samples.from_expression(spec, args.f_expr, tail)
    if args.f == "gauss":
        return samples.gauss_y(spec, args.center, args.width, tail)
    if args.f == "indicator":
        return samples.indicator_unit(spec)
    if args.f == "ramp":
        return samples.ramp(spec)
    return samples.smooth_random(spec, rng or np.random.default_rng(args.seed), tail=tail)


def _num(x):
    if isinstance(x, complex):
        return {"re": _num(x.real), "im": _num(x.imag)}
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


class _Sink:
    """Routes a command's JSON report and CSV tables to stdout or an output directory."""

    def __init__(self, args, command):
        out = getattr(args, "out", None) or os.environ.get(OUT_ENV) or None
        self.dir = Path(out) if out else None
        self.command = command
        self.tables = []

    def table(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if not isinstance(v, (int, np.integer)) else int(v) for v in r])
        self.tables.append((name, buf.getvalue()))

    def finish(self, report, stdout):
        if self.dir is None:
            if self.tables:
                for _, text in self.tables:
                    stdout.write(text)
            else:
                stdout.write(_json_text(report))
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        files = []
        for name, text in self.tables:
            path = self.dir / name
            path.write_text(text)
            files.append(str(path.name))
        report = dict(report)
        if files:
            report["files"] = files
        (self.dir / f"{self.command}.json").write_text(_json_text(report))
        stdout.write(_json_text(report))


def _base_report(args, command, op=None, spec=None):
    rep = {"command": command, "version": __version__}
    if op is not None:
        rep["config"] = op.to_config()
        rep["name"] = op.name
    if spec is not None:
        rep["grid"] = spec.to_dict()
    return rep


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_describe(args, sink):
    op = _operator(args)
    b = hausdorff.lemma1_bound(op)
    rep = _base_report(args, "describe", op)
    rep.update(
        {
            "dimension": op.n,
            "atoms": op.omega.size,
            "p": _num(op.p),
            "q": _num(op.q),
            "mass": _num(op.mass),
            "bound": _num(b.value),
            "bound_report": b.to_dict(),
            "family": "positive" if op.is_positive else ("negative" if op.is_negative else "mixed-axes"),
            "conjugated": op.has_rotation,
        }
    )
    return rep


def cmd_bound(args, sink):
    op = _operator(args)
    b = hausdorff.lemma1_bound(op)
    rep = _base_report(args, "bound", op)
    rep.update(b.to_dict())
    rep["bound"] = _num(b.value)
    return rep


def cmd_apply(args, sink):
    op = _operator(args)
    spec = _grid(args, op.n)
    f = _function(args, spec)
    g = hausdorff.apply(op, f)
    rep = _base_report(args, "apply", op, f.spec)
    rep.update({"norm_f": lp_norm(f, op.p), "norm_Hf": lp_norm(g, op.p), "tail": g.tail.to_dict(), "notes": list(g.notes)})
    pts = g.spec.points
    names = [f"x{d + 1}" for d in range(g.spec.dim)] if g.spec.dim > 1 else ["x"]
    sink.table("apply.csv", names + ["re", "im"], [list(x) + [v.real, v.imag] for x, v in zip(pts, g.values)])
    return rep


def cmd_adjoint_check(args, sink):
    op = _operator(args)
    spec = _grid(args, op.n)
    rng = np.random.default_rng(args.seed)
    res = []
    for _ in range(args.pairs):
        if args.node_values:
            f, g = samples.node_random(spec, rng), samples.node_random(spec, rng)
        else:
            f, g = samples.smooth_random(spec, rng), samples.smooth_random(spec, rng)
        res.append(hausdorff.adjoint_identity_check(op, f, g))
    rep = _base_report(args, "adjoint-check", op, spec)
    rep.update({"pairs": args.pairs, "seed": args.seed, "max_residual": max(res), "residuals": res})
    return rep


def cmd_symbol(args, sink):
    op = _operator(args)
    p = op.p
    grid = mellin.symbol_spec(args.smax, args.nodes, op.n)
    phi = mellin.symbol(op, grid, p)
    rep = _base_report(args, "symbol", op, grid)
    rep.update({"p": _num(p), "sup_abs_phi": phi.sup, "bound": _num(hausdorff.lemma1_bound(op, p).value)})
    names = ["s"] if op.n == 1 else [f"s{d + 1}" for d in range(op.n)]
    sink.table(
        "symbol.csv",
        names + ["re_phi", "im_phi", "abs_phi"],
        [list(s) + [v.real, v.imag, abs(v)] for s, v in zip(phi.s, phi.values)],
    )
    return rep


def cmd_mellin(args, sink):
    p = hausdorff._parse_p(args.p if args.p is not None else 2)
    spec = GridSpec.from_dict(_load_json(args.grid)) if args.grid else GridSpec(
        (log_axis(args.ylim[0], args.ylim[1], args.nodes),) * args.dim
    )
    f = _function(args, spec)
    F = mellin.mellin(f, p, conjugate_kernel=args.conjugate)
    rep = _base_report(args, "mellin", None, f.spec)
    rep.update({"p": _num(p), "norm_f_p": lp_norm(f, p), "norm_Mf_q": lp_norm(F, conjugate_exponent(p))})
    names = ["s"] if spec.dim == 1 else [f"s{d + 1}" for d in range(spec.dim)]
    sink.table("mellin.csv", names + ["re", "im"], [list(s) + [v.real, v.imag] for s, v in zip(F.spec.points, F.values)])
    return rep


def cmd_diag_check(args, sink):
    op = _operator(args)
    spec = _grid(args, op.n)
    f = _function(args, spec)
    p = min(op.p, 2.0)
    r = mellin.diagonalization_residual(op, f, p)
    rep = _base_report(args, "diag-check", op, spec)
    rep.update({"p": _num(p), "residual": r})
    return rep


def _spectral_target(args):
    cfg = _raw_config(args)
    if presets.is_control(cfg):
        return spectral.CONTROL, cfg
    if args.p is not None:
        cfg["p"] = args.p
    op = hausdorff.build(cfg, cfg.get("name", ""))
    return op, op.to_config()


def cmd_spectrum(args, sink):
    target, cfg = _spectral_target(args)
    thresholds = args.threshold
    if target == spectral.CONTROL:
        m = spectral.gaussian_control_matrix(args.nodes, cfg.get("interval", (0.0, 10.0)), cfg.get("width", 1.0))
        rep_obj = spectral.spectral_report(m, thresholds)
        grid = None
    else:
        grid = spectral.riesz_grid(args.nodes, args.spacing)
        m = spectral.discretize(target, grid, boundary=args.boundary)
        rep_obj = spectral.spectral_report(m, thresholds, spectral.symbol_curve(target, grid))
    rep = {"command": "spectrum", "version": __version__, "config": cfg}
    if grid is not None:
        rep["grid"] = grid.to_dict()
        rep["boundary"] = args.boundary
    rep.update(rep_obj.to_dict())
    sink.table("sigma.csv", ["k", "sigma"], [(k + 1, s) for k, s in enumerate(rep_obj.sigma)])
    sink.table("eigenvalues.csv", ["re_lambda", "im_lambda"], [(z.real, z.imag) for z in rep_obj.eigenvalues])
    return rep


def cmd_riesz_report(args, sink):
    target, cfg = _spectral_target(args)
    r = spectral.riesz_report(target, args.sizes, args.threshold, args.spacing)
    rep = {"command": "riesz-report", "version": __version__, "config": cfg}
    rep.update(r.to_dict())
    return rep


def cmd_regularity(args, sink):
    op = _operator(args)
    spec = _grid(args, op.n)
    f = _function(args, spec)
    mass, est = hausdorff.regularity_probe(op, f, args.X)
    rep = _base_report(args, "regularity", op, spec)
    limit = f.tail.value if f.tail.kind == "constant" else None
    rep.update({"X": args.X, "mass": _num(mass), "estimate": _num(est), "limit": None if limit is None else _num(limit)})
    if limit is not None:
        rep["predicted"] = _num(mass * limit)
    return rep


def cmd_preset(args, sink):
    if args.action == "list":
        return {"command": "preset list", "presets": [{"name": n, "description": presets.DESCRIPTIONS[n]} for n in presets.NAMES]}
    if not args.name:
        raise ValidationError("preset show needs a name")
    return {"command": "preset show", "name": args.name, "config": presets.preset(args.name)}


COMMANDS = {
    "describe": cmd_describe,
    "apply": cmd_apply,
    "bound": cmd_bound,
    "adjoint-check": cmd_adjoint_check,
    "symbol": cmd_symbol,
    "mellin": cmd_mellin,
    "diag-check": cmd_diag_check,
    "spectrum": cmd_spectrum,
    "riesz-report": cmd_riesz_report,
    "regularity": cmd_regularity,
    "preset": cmd_preset,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="hausdorff-lab", description="Generalized Hausdorff operators on sampled grids.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="validate an operator and report mass and norm bound")
    _add_operator_args(p)
    _add_out_arg(p)

    p = sub.add_parser("bound", help="norm bound on L^p")
    _add_operator_args(p)
    _add_out_arg(p)

    p = sub.add_parser("apply", help="apply the operator to a sampled function")
    _add_operator_args(p)
    _add_grid_args(p)
    _add_function_args(p)
    _add_out_arg(p)

    p = sub.add_parser("adjoint-check", help="duality residual over random pairs")
    _add_operator_args(p)
    _add_grid_args(p)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--node-values", action="store_true", help="random values at each node instead of smooth functions")
    _add_out_arg(p)

    p = sub.add_parser("symbol", help="operator symbol on a frequency grid")
    _add_operator_args(p)
    p.add_argument("--smax", type=float, default=4.0)
    p.add_argument("--nodes", type=int, default=129)
    _add_out_arg(p)

    p = sub.add_parser("mellin", help="modified Mellin transform of a sampled function")
    p.add_argument("--p", type=str, default=None)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--conjugate", action="store_true", help="use the exp(+i s.y) kernel")
    _add_grid_args(p, 4096)
    _add_function_args(p)
    _add_out_arg(p)

    p = sub.add_parser("diag-check", help="residual of M(Hf) = phi Mf")
    _add_operator_args(p)
    _add_grid_args(p, 4096)
    _add_function_args(p)
    _add_out_arg(p)

    for name, help_text in (("spectrum", "finite-section spectrum"), ("riesz-report", "grid-refinement spectral study")):
        p = sub.add_parser(name, help=help_text)
        _add_operator_args(p)
        p.add_argument("--threshold", type=_float_list, default=[0.5], help="comma-separated thresholds c")
        p.add_argument("--spacing", type=float, default=0.5, help="log-grid spacing h")
        if name == "spectrum":
            p.add_argument("--nodes", type=int, default=256)
            p.add_argument("--boundary", choices=("periodic", "tail"), default="periodic")
        else:
            p.add_argument("--sizes", type=_int_list, default=[128, 256, 512])
        _add_out_arg(p)

    p = sub.add_parser("regularity", help="mass and (Hf)(X) for f with a limit at infinity")
    _add_operator_args(p)
    _add_grid_args(p, 4096)
    _add_function_args(p, default="ramp")
    p.add_argument("--X", type=float, default=1000.0)
    _add_out_arg(p)

    p = sub.add_parser("preset", help="list or show presets")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    sink = _Sink(args, args.command)
    try:
        report = COMMANDS[args.command](args, sink)
        sink.finish(report, stdout)
    except ValidationError as exc:
        stderr.write(f"error: {exc}\n")
        return 1
    except (NumericalError, EvalDomainError, np.linalg.LinAlgError, FloatingPointError) as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
