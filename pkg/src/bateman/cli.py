"""Command-line entry point.

Subcommands map one-to-one onto the library engines:

    params       derived constants as JSON
    dirac-check  exact bracket-table verification
    classical    RK4 trajectory of the dual pair
    closed-form  Bogoliubov coefficients, occupations, energies
    fock         truncated two-mode propagation and reduced observables
    reduced      memory-kernel evolution vs the partial-trace oracle
    spiral       complex normal modes as logarithmic spirals
    koch         Koch curve vertices plus a summary
    fig3         time-lattice radii for a given decay-per-period ΓT
    fig4         one-period scaling ratio vs the deformation parameter
    sweep        cartesian (s × cutoff) fock runs, one CSV each + index
    plot-script  gnuplot script referencing an emitted CSV
    report       headline datasets with rendered PNG figures

Exit codes: 0 success, 2 validation error, 3 numerical failure.  Errors
are printed as single-line JSON on stderr.  A JSON config file mirroring
the flag names may be passed with --config; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import closed_form, dirac, fock, geometry, reduced
from .classical import ClassicalState, integrate_bateman
from .errors import InvalidParams, NumericalError, ValidationError
from .model import ModelParams, derive_params
from .series import TimeSeries, write_series_csv, write_table

OUTDIR_ENV = "BATEMAN_OUTDIR"


# ---------------------------------------------------------------------------
# shared plumbing

def _json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_json_default)


def _outdir(args) -> str:
    out = getattr(args, "outdir", None) or os.environ.get(OUTDIR_ENV, ".")
    os.makedirs(out, exist_ok=True)
    return out


def _open_out(args):
    path = getattr(args, "out", None)
    if path is None:
        return sys.stdout, False
    if not os.path.isabs(path):
        base = os.environ.get(OUTDIR_ENV)
        if base:
            os.makedirs(base, exist_ok=True)
            path = os.path.join(base, path)
    return open(path, "w"), True


def _params_from(args) -> ModelParams:
    return ModelParams(m=args.m, omega0=args.omega0, s=args.s, hbar=args.hbar)


def _meta(args, command: str, extra: dict | None = None) -> dict:
    meta = {"command": command}
    if hasattr(args, "m"):
        meta["params"] = {"m": args.m, "omega0": args.omega0,
                          "s": args.s, "hbar": args.hbar}
    if extra:
        meta.update(extra)
    return meta


def _emit_table(args, command: str, header: list[str], rows: list, extra_meta=None) -> None:
    fh, close = _open_out(args)
    try:
        if args.format == "json":
            payload = {"meta": _meta(args, command, extra_meta),
                       "data": {"columns": header, "rows": rows}}
            fh.write(_dump_json(payload) + "\n")
        else:
            write_table(fh, header, rows)
    finally:
        if close:
            fh.close()


def _emit_series(args, command: str, series: TimeSeries, extra_meta=None) -> None:
    rows = [list(r) for r in series.rows()]
    _emit_table(args, command, series.header(), rows, extra_meta)


def _grid(t_end: float, dt: float) -> np.ndarray:
    if dt <= 0 or t_end <= 0:
        raise InvalidParams("t_end and dt must be positive")
    n = max(1, int(round(t_end / dt)))
    return np.linspace(0.0, t_end, n + 1)


def _default_span(args, periods: float):
    """(t_end, dt) defaults tied to the lattice period when flags are absent."""
    dp = derive_params(_params_from(args))
    t_end = args.t_end if args.t_end is not None else periods * dp.T
    dt = args.dt if args.dt is not None else dp.T / 400.0
    return t_end, dt


# ---------------------------------------------------------------------------
# subcommands

def run_params(args) -> int:
    p = _params_from(args)
    dp = derive_params(p)
    payload = {"meta": _meta(args, "params"), "data": dp.to_dict()}
    fh, close = _open_out(args)
    try:
        if args.format == "csv":
            keys = sorted(dp.to_dict())
            write_table(fh, keys, [[dp.to_dict()[k] for k in keys]])
        else:
            fh.write(_dump_json(payload) + "\n")
    finally:
        if close:
            fh.close()
    return 0


def run_dirac_check(args) -> int:
    p = _params_from(args)
    report = dirac.verify_bracket_table(p)
    rows = [[name, entry["expected"], entry["computed"], entry["residual"], entry["pass"]]
            for name, entry in sorted(report.items())]
    header = ["bracket", "expected", "computed", "residual", "pass"]
    if args.format == "csv":
        _emit_table(args, "dirac-check", header, rows)
    else:
        fh, close = _open_out(args)
        try:
            payload = {"meta": _meta(args, "dirac-check"),
                       "data": [dict(zip(header, row)) for row in rows]}
            fh.write(_dump_json(payload) + "\n")
        finally:
            if close:
                fh.close()
    return 0


def run_classical(args) -> int:
    p = _params_from(args)
    t_end = args.t_end if args.t_end is not None else 10.0
    dt = args.dt if args.dt is not None else 1e-3
    init = ClassicalState(y1=args.y1, y1dot=args.y1dot, y2=args.y2, y2dot=args.y2dot)
    series = integrate_bateman(p, init, t_end, dt)
    _emit_series(args, "classical", series, {"t_end": t_end, "dt": dt})
    return 0


def run_closed_form(args) -> int:
    p = _params_from(args)
    t_end, dt = _default_span(args, periods=2.0)
    series = closed_form.closed_form_series(
        p, args.na0, args.nb0, _grid(t_end, dt), sign_convention=args.energy_sign)
    _emit_series(args, "closed-form", series,
                 {"t_end": t_end, "dt": dt, "na0": args.na0, "nb0": args.nb0,
                  "energy_sign": args.energy_sign})
    return 0


def run_fock(args) -> int:
    p = _params_from(args)
    t_end, dt = _default_span(args, periods=2.0)
    series = fock.fock_series(p, args.cutoff, _grid(t_end, dt), initial=args.initial)
    _emit_series(args, "fock", series,
                 {"t_end": t_end, "dt": dt, "cutoff": args.cutoff, "initial": args.initial})
    return 0


def run_reduced(args) -> int:
    p = _params_from(args)
    dp = derive_params(p)
    t_end = args.t_end if args.t_end is not None else dp.T
    ds = args.ds if args.ds is not None else dp.T / 400.0
    space = fock.FockSpace(args.cutoff, args.cutoff)
    result = reduced.evolve_reduced(space, p, None, t_end, ds, mode=args.mode)
    _emit_series(args, "reduced", result.series,
                 {"t_end": t_end, "ds": ds, "cutoff": args.cutoff, "mode": args.mode})
    return 0


def run_spiral(args) -> int:
    p = _params_from(args)
    t_end, dt = _default_span(args, periods=3.0)
    series = geometry.spiral_from_dynamics(p, args.r0, _grid(t_end, dt))
    _emit_series(args, "spiral", series, {"t_end": t_end, "dt": dt, "r0": args.r0})
    return 0


def run_koch(args) -> int:
    curve = geometry.koch_generate(args.level)
    summary = geometry.koch_summary(curve)
    header = ["x", "y"]
    rows = [[float(x), float(y)] for x, y in curve.points]
    if args.format == "json":
        fh, close = _open_out(args)
        try:
            payload = {"meta": _meta(args, "koch", {"level": args.level}),
                       "data": {"vertices": rows, "summary": summary}}
            fh.write(_dump_json(payload) + "\n")
        finally:
            if close:
                fh.close()
        return 0
    fh, close = _open_out(args)
    try:
        write_table(fh, header, rows)
    finally:
        if close:
            fh.close()
    # vertices to a file: summary joins them on stdout; vertices to stdout:
    # summary moves to stderr to keep the CSV clean
    target = sys.stdout if close else sys.stderr
    target.write(_dump_json(summary) + "\n")
    return 0


def run_fig3(args) -> int:
    r = geometry.lattice_from_rate(args.gammaT, r0=1.0, n_max=args.n)
    rows = [[n, float(r[n])] for n in range(args.n + 1)]
    _emit_table(args, "fig3", ["n", "r"], rows, {"gammaT": args.gammaT})
    return 0


def run_fig4(args) -> int:
    n = int(round((args.s_max - args.s_min) / args.step))
    s = args.s_min + args.step * np.arange(n + 1)
    ratio = geometry.scaling_ratio_curve(s)
    rows = [[float(sv), float(rv)] for sv, rv in zip(s, ratio)]
    _emit_table(args, "fig4", ["s", "ratio"], rows,
                {"s_min": args.s_min, "s_max": args.s_max, "step": args.step})
    return 0


def _sweep_point(task):
    base, s_value, cutoff, t_end, dt, outdir = task
    params = ModelParams(m=base["m"], omega0=base["omega0"], s=s_value, hbar=base["hbar"])
    dp = derive_params(params)
    t_end = t_end if t_end is not None else 2.0 * dp.T
    dt = dt if dt is not None else dp.T / 200.0
    series = fock.fock_series(params, cutoff, _grid(t_end, dt))
    name = f"sweep_s{s_value}_c{cutoff}.csv"
    path = os.path.join(outdir, name)
    with open(path, "w") as fh:
        write_series_csv(fh, series)
    return {"s": s_value, "cutoff": cutoff, "file": name, "t_end": t_end, "dt": dt}


def run_sweep(args) -> int:
    outdir = _outdir(args)
    base = {"m": args.m, "omega0": args.omega0, "hbar": args.hbar}
    s_values = [float(x) for x in args.s_values.split(",")]
    cutoffs = [int(x) for x in args.cutoffs.split(",")]
    tasks = [(base, sv, c, args.t_end, args.dt, outdir) for sv in s_values for c in cutoffs]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            entries = list(pool.map(_sweep_point, tasks))
    else:
        entries = [_sweep_point(t) for t in tasks]
    index = {"meta": _meta(args, "sweep"), "points": entries}
    index_path = os.path.join(outdir, "index.json")
    with open(index_path, "w") as fh:
        fh.write(_dump_json(index) + "\n")
    sys.stdout.write(index_path + "\n")
    return 0


_GNUPLOT_TEMPLATES = {
    "fig3": (
        "set datafile separator ','\n"
        "set logscale y\n"
        "set xlabel 'n'\nset ylabel 'r(nT)'\n"
        "plot '{data}' using 1:2 skip 1 with linespoints title 'r(nT)'\n"
    ),
    "fig4": (
        "set datafile separator ','\n"
        "set xlabel 's'\nset ylabel 'r(t+T)/r(t)'\n"
        "set xrange [0:2]\n"
        "plot '{data}' using 1:2 skip 1 with lines title 'scaling ratio'\n"
    ),
    "spiral": (
        "set datafile separator ','\n"
        "set size ratio -1\n"
        "set xlabel 'Re z'\nset ylabel 'Im z'\n"
        "plot '{data}' using 2:3 skip 1 with lines title 'contracting', \\\n"
        "     '{data}' using 4:5 skip 1 with lines title 'expanding'\n"
    ),
    "closed-form": (
        "set datafile separator ','\n"
        "set xlabel 't'\nset ylabel 'occupation'\n"
        "plot '{data}' using 1:2 skip 1 with lines title 'Na', \\\n"
        "     '{data}' using 1:3 skip 1 with lines title 'Nb'\n"
    ),
    "fock": (
        "set datafile separator ','\n"
        "set xlabel 't'\nset ylabel 'occupation / entropy'\n"
        "plot '{data}' using 1:2 skip 1 with lines title 'Na', \\\n"
        "     '{data}' using 1:6 skip 1 with lines title 'entropy'\n"
    ),
    "reduced": (
        "set datafile separator ','\n"
        "set xlabel 't'\nset ylabel 'Na'\n"
        "plot '{data}' using 1:2 skip 1 with lines title 'kernel', \\\n"
        "     '{data}' using 1:3 skip 1 with points title 'oracle'\n"
    ),
    "classical": (
        "set datafile separator ','\n"
        "set xlabel 't'\nset ylabel 'y'\n"
        "plot '{data}' using 1:2 skip 1 with lines title 'y1', \\\n"
        "     '{data}' using 1:4 skip 1 with lines title 'y2'\n"
    ),
    "koch": (
        "set datafile separator ','\n"
        "set size ratio -1\nunset key\n"
        "plot '{data}' using 1:2 skip 1 with lines\n"
    ),
}


def run_plot_script(args) -> int:
    if args.figure not in _GNUPLOT_TEMPLATES:
        raise InvalidParams(f"no plot template for {args.figure!r}")
    script = _GNUPLOT_TEMPLATES[args.figure].format(data=args.data)
    fh, close = _open_out(args)
    try:
        fh.write(script)
    finally:
        if close:
            fh.close()
    return 0


def run_report(args) -> int:
    from . import plotting

    p = _params_from(args)
    dp = derive_params(p)
    outdir = _outdir(args)
    index = {"meta": _meta(args, "report"), "artifacts": []}

    def record(name, csv_path, png_path=None):
        entry = {"name": name, "csv": os.path.basename(csv_path)}
        if png_path:
            entry["png"] = os.path.basename(png_path)
        index["artifacts"].append(entry)

    path = os.path.join(outdir, "derived_params.json")
    with open(path, "w") as fh:
        fh.write(_dump_json({"meta": _meta(args, "params"), "data": dp.to_dict()}) + "\n")
    index["artifacts"].append({"name": "params", "json": "derived_params.json"})

    grid = np.linspace(0.0, 2.0 * dp.T, 401)
    cf = closed_form.closed_form_series(p, 0.0, 0.0, grid)
    path = os.path.join(outdir, "closed_form.csv")
    with open(path, "w") as fh:
        write_series_csv(fh, cf)
    record("closed-form", path, plotting.render_occupations(
        cf, os.path.join(outdir, "closed_form.png")))

    fs = fock.fock_series(p, args.cutoff, grid)
    path = os.path.join(outdir, "fock.csv")
    with open(path, "w") as fh:
        write_series_csv(fh, fs)
    record("fock", path, plotting.render_fock(fs, os.path.join(outdir, "fock.png")))

    red_cutoff = min(args.cutoff, 30)
    space = fock.FockSpace(red_cutoff, red_cutoff)
    red = reduced.evolve_reduced(space, p, None, dp.T, dp.T / 400.0)
    path = os.path.join(outdir, "reduced.csv")
    with open(path, "w") as fh:
        write_series_csv(fh, red.series)
    record("reduced", path, plotting.render_reduced(
        red.series, os.path.join(outdir, "reduced.png")))

    sp = geometry.spiral_from_dynamics(p, 1.0, np.linspace(0.0, 3.0 * dp.T, 1201))
    path = os.path.join(outdir, "spiral.csv")
    with open(path, "w") as fh:
        write_series_csv(fh, sp)
    record("spiral", path, plotting.render_spiral(sp, os.path.join(outdir, "spiral.png")))

    r = geometry.lattice_from_rate(1.25, n_max=9)
    path = os.path.join(outdir, "fig3.csv")
    with open(path, "w") as fh:
        write_table(fh, ["n", "r"], [[n, float(rv)] for n, rv in enumerate(r)])
    record("fig3", path, plotting.render_lattice(
        np.arange(r.size), r, os.path.join(outdir, "fig3.png")))

    s = 0.1 * np.arange(21)
    ratio = geometry.scaling_ratio_curve(s)
    path = os.path.join(outdir, "fig4.csv")
    with open(path, "w") as fh:
        write_table(fh, ["s", "ratio"], [[float(a), float(b)] for a, b in zip(s, ratio)])
    record("fig4", path, plotting.render_ratio(s, ratio, os.path.join(outdir, "fig4.png")))

    curve = geometry.koch_generate(5)
    path = os.path.join(outdir, "koch.csv")
    with open(path, "w") as fh:
        write_table(fh, ["x", "y"], [[float(x), float(y)] for x, y in curve.points])
    record("koch", path, plotting.render_koch(curve.points, os.path.join(outdir, "koch.png")))

    index_path = os.path.join(outdir, "index.json")
    with open(index_path, "w") as fh:
        fh.write(_dump_json(index) + "\n")
    sys.stdout.write(index_path + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser assembly

def _add_param_flags(sp):
    sp.add_argument("--m", type=float, default=1.0, help="mass (default 1)")
    sp.add_argument("--omega0", type=float, default=1.0, help="natural frequency (default 1)")
    sp.add_argument("--s", type=float, default=1.0, help="deformation parameter (default 1)")
    sp.add_argument("--hbar", type=float, default=1.0, help="reduced Planck constant (default 1)")


def _add_output_flags(sp, default_format="csv"):
    sp.add_argument("--out", default=None, help="output file (default stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default=default_format,
                    help=f"output format (default {default_format})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bateman",
        description="Bateman dual-oscillator simulations: classical, quantum, reduced, geometric.",
    )
    parser.add_argument("--config", default=None,
                        help="JSON file mirroring the flag names; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("params", help="derived constants")
    _add_param_flags(sp)
    _add_output_flags(sp, default_format="json")
    sp.set_defaults(func=run_params)

    sp = sub.add_parser("dirac-check", help="exact Dirac bracket table")
    _add_param_flags(sp)
    _add_output_flags(sp, default_format="json")
    sp.set_defaults(func=run_dirac_check)

    sp = sub.add_parser("classical", help="RK4 trajectory")
    _add_param_flags(sp)
    _add_output_flags(sp)
    sp.add_argument("--y1", type=float, default=0.0)
    sp.add_argument("--y1dot", type=float, default=0.0)
    sp.add_argument("--y2", type=float, default=1.0)
    sp.add_argument("--y2dot", type=float, default=0.0)
    sp.add_argument("--t-end", type=float, default=None, help="default 10")
    sp.add_argument("--dt", type=float, default=None, help="default 1e-3")
    sp.set_defaults(func=run_classical)

    sp = sub.add_parser("closed-form", help="Bogoliubov solution observables")
    _add_param_flags(sp)
    _add_output_flags(sp)
    sp.add_argument("--na0", type=float, default=0.0)
    sp.add_argument("--nb0", type=float, default=0.0)
    sp.add_argument("--t-end", type=float, default=None, help="default 2T")
    sp.add_argument("--dt", type=float, default=None, help="default T/400")
    sp.add_argument("--energy-sign", choices=closed_form.ENERGY_SIGN_CONVENTIONS,
                    default="paper-rate")
    sp.set_defaults(func=run_closed_form)

    sp = sub.add_parser("fock", help="truncated two-mode engine")
    _add_param_flags(sp)
    _add_output_flags(sp)
    sp.add_argument("--cutoff", type=int, default=40)
    sp.add_argument("--t-end", type=float, default=None, help="default 2T")
    sp.add_argument("--dt", type=float, default=None, help="default T/400")
    sp.add_argument("--initial", default="vacuum",
                    help="vacuum | number:na,nb | squeezed:re,im")
    sp.set_defaults(func=run_fock)

    sp = sub.add_parser("reduced", help="memory-kernel reduced dynamics")
    _add_param_flags(sp)
    _add_output_flags(sp)
    sp.add_argument("--cutoff", type=int, default=30)
    sp.add_argument("--t-end", type=float, default=None, help="default T")
    sp.add_argument("--ds", type=float, default=None, help="default T/400")
    sp.add_argument("--mode", choices=("exact", "born"), default="exact")
    sp.set_defaults(func=run_reduced)

    sp = sub.add_parser("spiral", help="normal modes as logarithmic spirals")
    _add_param_flags(sp)
    _add_output_flags(sp)
    sp.add_argument("--r0", type=float, default=1.0)
    sp.add_argument("--t-end", type=float, default=None, help="default 3T")
    sp.add_argument("--dt", type=float, default=None, help="default T/400")
    sp.set_defaults(func=run_spiral)

    sp = sub.add_parser("koch", help="Koch curve vertices + summary")
    _add_output_flags(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.set_defaults(func=run_koch)

    sp = sub.add_parser("fig3", help="time-lattice radii r(nT) = e^{-ΓT n}")
    _add_output_flags(sp)
    sp.add_argument("--gammaT", type=float, default=1.25,
                    help="decay per period ΓT (display parameter, default 1.25)")
    sp.add_argument("--n", type=int, default=9)
    sp.set_defaults(func=run_fig3)

    sp = sub.add_parser("fig4", help="scaling ratio e^{-2πs} over s")
    _add_output_flags(sp)
    sp.add_argument("--s-min", type=float, default=0.0)
    sp.add_argument("--s-max", type=float, default=2.0)
    sp.add_argument("--step", type=float, default=0.1)
    sp.set_defaults(func=run_fig4)

    sp = sub.add_parser("sweep", help="cartesian s × cutoff fock runs")
    _add_param_flags(sp)
    sp.add_argument("--s-values", default="0.5,1.0")
    sp.add_argument("--cutoffs", default="10,20,40")
    sp.add_argument("--t-end", type=float, default=None)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--workers", type=int, default=2)
    sp.add_argument("--outdir", default=None, help=f"default ${OUTDIR_ENV} or '.'")
    sp.set_defaults(func=run_sweep)

    sp = sub.add_parser("plot-script", help="emit a gnuplot script for a CSV")
    _add_output_flags(sp)
    sp.add_argument("--figure", required=True, choices=sorted(_GNUPLOT_TEMPLATES))
    sp.add_argument("--data", required=True, help="path to the CSV the script will read")
    sp.set_defaults(func=run_plot_script)

    sp = sub.add_parser("report", help="headline datasets with PNG figures")
    _add_param_flags(sp)
    sp.add_argument("--cutoff", type=int, default=40)
    sp.add_argument("--outdir", default=None, help=f"default ${OUTDIR_ENV} or '.'")
    sp.set_defaults(func=run_report)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Load --config JSON (if any) and install its values as defaults."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise InvalidParams("--config requires a path")
    with open(argv[i + 1]) as fh:
        config = {k.replace("-", "_"): v for k, v in json.load(fh).items()}
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in config.items() if k in known})
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        sys.stderr.write(_dump_json({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    except NumericalError as exc:
        sys.stderr.write(_dump_json({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 3
    except OSError as exc:
        sys.stderr.write(_dump_json({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
