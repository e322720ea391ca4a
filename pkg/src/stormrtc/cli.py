"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error (missing or malformed
input), 3 numerical or internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .controller import run_simulation
from .optimizer import InfeasiblePlanError, NumericalError, build_lp, format_lp, plan_outflows
from .report import (
    Orifice,
    Passthrough,
    compare_reports,
    emit_trace_csv,
    format_report,
    metrics,
    static_baseline,
)
from .scenario_io import DataError, forecast_window, load_config, load_scenario, load_series_csv
from .validation import run_validation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("stormrtc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="pond configuration file (key = value)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--inflow", help="inflow series CSV (time_s,value in m3/s)")
    src.add_argument("--rain", help="rain depth series CSV (time_s,value in mm per step)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stormrtc", description="Real-time control of a stormwater detention basin.")
    parser.add_argument("--version", action="version", version=f"stormrtc {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log rule and solver events")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate the controlled pond, write a trace and a report")
    _add_inputs(run)
    run.add_argument("--out", required=True, help="trace CSV to write")
    run.add_argument("--report", help="write the report here instead of stdout")
    run.add_argument("--tss-k", type=float, help="first-order settling rate (1/s) for the TSS estimate")
    run.add_argument("--emit-lp", help="dump the first wet-step LP (CPLEX LP text) to this file")

    cmp_ = sub.add_parser("compare", help="controlled vs static outlet on the same inflow")
    _add_inputs(cmp_)
    cmp_.add_argument("--out", required=True, help="directory for dynamic.csv, static.csv and report.txt")
    cmp_.add_argument("--baseline", choices=("passthrough", "orifice"), default="passthrough")
    cmp_.add_argument("--orifice-ca", type=float, default=1.0, help="orifice discharge coefficient x area (m2)")
    cmp_.add_argument("--tss-k", type=float, help="first-order settling rate (1/s) for the TSS estimate")
    cmp_.add_argument("--emit-lp", help="dump the first wet-step LP to this file")

    plan = sub.add_parser("plan", help="solve one outflow plan and print the schedule")
    plan.add_argument("--config", required=True)
    plan.add_argument("--inflow", required=True, help="forecast CSV; its length sets the horizon")
    plan.add_argument("--depth", type=float, help="initial depth (m); default from the config")
    plan.add_argument("--initial-outflow", type=float, help="pin Q(0) to this outflow (m3/s)")
    plan.add_argument("--emit-lp", help="dump the LP to this file")

    sub.add_parser("validate", help="run the built-in invariant checks on the bundled fixtures")
    return parser


def _scenario(args, params, catchment):
    return load_scenario(params.dt, inflow_path=args.inflow, rain_path=args.rain, catchment=catchment)


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _emit_first_wet_lp(path, trace, scenario, params, config) -> None:
    wet = [k for k, m in enumerate(trace.mode) if m == "wet"]
    if not wet:
        _write_text(path, "\\ no wet step: nothing was optimized\n")
        return
    k = wet[0]
    depth = trace.depth[k - 1] if k else trace.initial_depth
    q_prev = trace.realized[k - 1] if k else trace.initial_outflow
    window = forecast_window(scenario, k, config)
    _write_text(path, format_lp(build_lp(params, float(depth), window.inflow, min(float(q_prev), params.q_max))))


def _cmd_run(args) -> int:
    params, config, catchment = load_config(args.config)
    scenario = _scenario(args, params, catchment)
    trace = run_simulation(scenario, params, config)
    emit_trace_csv(trace, args.out)
    text = format_report(metrics(trace, params, config, tss_k=args.tss_k), "dynamic")
    if args.report:
        _write_text(args.report, text)
    else:
        sys.stdout.write(text)
    if args.emit_lp:
        _emit_first_wet_lp(args.emit_lp, trace, scenario, params, config)
    return EXIT_OK


def _cmd_compare(args) -> int:
    params, config, catchment = load_config(args.config)
    scenario = _scenario(args, params, catchment)
    spec = Passthrough() if args.baseline == "passthrough" else Orifice(args.orifice_ca)
    dynamic = run_simulation(scenario, params, config)
    static = static_baseline(scenario, params, spec, initial_depth=config.initial_depth)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_trace_csv(dynamic, out / "dynamic.csv")
    emit_trace_csv(static, out / "static.csv")
    rd = metrics(dynamic, params, config, tss_k=args.tss_k)
    rs = metrics(static, params, config, tss_k=args.tss_k)
    delta = compare_reports(rd, rs)
    text = format_report(rd, "dynamic") + format_report(rs, f"static:{args.baseline}")
    text += "[dynamic - static]\n" + "".join(f"{k} = {v:.6g}\n" for k, v in delta.items())
    _write_text(out / "report.txt", text)
    sys.stdout.write(text)
    if args.emit_lp:
        _emit_first_wet_lp(args.emit_lp, dynamic, scenario, params, config)
    return EXIT_OK


def _cmd_plan(args) -> int:
    params, config, _ = load_config(args.config)
    series = load_series_csv(args.inflow, params.dt)
    if len(series) < 2:
        raise DataError(f"{args.inflow}: a forecast needs at least two samples")
    params = replace(params, n_c=len(series) - 1)
    depth = config.initial_depth if args.depth is None else args.depth
    if args.emit_lp:
        _write_text(args.emit_lp, format_lp(build_lp(params, depth, series.values, args.initial_outflow)))
    try:
        plan = plan_outflows(params, depth, series.values, initial_outflow=args.initial_outflow)
    except InfeasiblePlanError as exc:
        sys.stdout.write(f"infeasible: overflow of at least {exc.deficit:.6g} m3 even at q_max\n")
        return EXIT_OK
    lines = ["step,time_s,outflow_m3s,depth_m"]
    for k, (q, h) in enumerate(zip(plan.outflows, plan.depths)):
        lines.append(f"{k},{series.times[k]:.17g},{q:.17g},{h:.17g}")
    lines.append(f"# total_release_m3 = {plan.total_release_volume:.6g}")
    lines.append(f"# peak_outflow_m3s = {plan.peak_outflow:.6g}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_validate(args) -> int:
    results = run_validation()
    for r in results:
        sys.stdout.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  ({r.detail})\n")
    failed = sum(not r.passed for r in results)
    sys.stdout.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


_COMMANDS = {"run": _cmd_run, "compare": _cmd_compare, "plan": _cmd_plan, "validate": _cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: file not found: {exc.filename or exc}\n")
        return EXIT_DATA
    except (DataError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except NumericalError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except Exception as exc:  # noqa: BLE001 - last-resort exit code contract
        log.exception("internal error")
        sys.stderr.write(f"internal error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
