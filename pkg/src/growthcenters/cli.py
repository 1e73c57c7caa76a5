"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 numerical failure, 3 I/O error.
Every command that takes ``--out`` computes all of its outputs first and only
then writes them (each atomically), followed by ``manifest.json``.
"""
from __future__ import annotations

import argparse
import inspect
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import GrowthSystem, Trajectory, aggregate, integrate
from .errors import ConvergenceError, GrowthError, InputError, NumericalError
from .formats import (SystemSpec, atomic_write_text, crossing_csv, csv_text, dispersion_csv,
                      dumps_json, fmt, growth_rates_csv, histogram_csv, layout_csv, load_system,
                      moran_csv, read_layout, read_trajectory, trajectory_csv)
from .ingest import load_panel, panel_csv, yearly_correlation_report
from .scenarios import SCENARIOS, get_scenario
from .spatial import DistanceBands, SpatialLayout, moran_curve, threshold_crossing_map
from .spectral import steady_state
from .stats import detect_j_curve, dispersion_series, growth_rates, log_histogram
from .svg import line_chart

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
DEFAULT_DT, DEFAULT_T_END = 0.25, 72.0
PATH_FLAGS = ("--system", "--trajectory", "--layout", "--panel", "--attributes", "--activity")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


@dataclass
class Outputs:
    """Files to emit, held in memory until every computation has succeeded."""

    files: dict[str, str] = field(default_factory=dict)
    notices: list[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    seed: int | None = None

    def add(self, name: str, text: str):
        self.files[name] = text

    def commit(self, out_dir, command: str, argv: list[str]) -> list[Path]:
        out_dir = Path(out_dir)
        written = [atomic_write_text(out_dir / name, text) for name, text in sorted(self.files.items())]
        manifest = {
            "command": command,
            "argv": argv,
            "config": self.config,
            "seed": self.seed,
            "files": sorted(self.files),
            "notices": self.notices,
            "version": __version__,
        }
        written.append(atomic_write_text(out_dir / "manifest.json", dumps_json(manifest)))
        return written


@dataclass
class Source:
    system: GrowthSystem
    w0: np.ndarray
    t_end: float
    dt: float
    layout: SpatialLayout | None
    threshold: float | None
    seed: int | None
    system_doc: dict
    description: dict


def _positive(name, value):
    if value is not None and not value > 0:
        raise InputError(f"{name} must be positive, got {value}")
    return value


def _resolve_source(args) -> Source:
    _positive("--dt", args.dt)
    _positive("--t-end", args.t_end)
    scenario_name = getattr(args, "scenario", None) or getattr(args, "name", None)
    if scenario_name and getattr(args, "system", None):
        raise InputError("give either --system or a scenario, not both")
    if scenario_name:
        factory = SCENARIOS.get(scenario_name.replace("-", "_"))
        if factory is None:
            raise InputError(f"unknown scenario {scenario_name!r}; choose from {sorted(SCENARIOS)}")
        accepted = inspect.signature(factory).parameters
        overrides = {k: v for k, v in (("seed", args.seed), ("dt", args.dt), ("t_end", args.t_end))
                     if v is not None and k in accepted}
        sc = get_scenario(scenario_name, **overrides)
        doc = SystemSpec(sc.system, sc.w0, sc.w0.tolist(), sc.t_end, sc.dt).to_dict()
        return Source(sc.system, sc.w0, sc.t_end, sc.dt, sc.layout, sc.threshold, sc.seed, doc,
                      {"scenario": sc.name, "params": sc.params, "centers": list(sc.centers)})
    if not getattr(args, "system", None):
        raise InputError("need --system FILE or --scenario NAME")
    spec = load_system(args.system)
    dt = args.dt or spec.dt or DEFAULT_DT
    t_end = args.t_end or spec.t_end or DEFAULT_T_END
    seed = spec.w0_spec.get("random_uniform", {}).get("seed") if isinstance(spec.w0_spec, dict) else None
    layout = read_layout(args.layout) if getattr(args, "layout", None) else None
    if layout is not None and layout.n != spec.system.n:
        raise InputError(f"layout has {layout.n} units, system has {spec.system.n}")
    doc = SystemSpec(spec.system, spec.w0, spec.w0_spec, t_end, dt).to_dict()
    return Source(spec.system, spec.w0, t_end, dt, layout, None, seed, doc,
                  {"system": str(Path(args.system).resolve())})


def _simulation_files(out: Outputs, traj: Trajectory):
    out.add("trajectory.csv", trajectory_csv(traj))
    out.add("growth_rates.csv", growth_rates_csv(growth_rates(traj)))
    labels = [f"W_{i + 1}" for i in range(traj.n)]
    out.add("w.svg", line_chart([(lab, traj.times, traj.w[:, i]) for i, lab in enumerate(labels)],
                                "W_i(t)", "t [month]", "W"))
    out.add("log_w.svg", line_chart([(lab, traj.times, np.log(traj.w[:, i])) for i, lab in enumerate(labels)],
                                    "log W_i(t)", "t [month]", "log W"))


def _report_files(out: Outputs, system: GrowthSystem, traj: Trajectory, layout: SpatialLayout | None,
                  threshold: float, band_width: float, bins: int, tol: float, max_iter: int):
    summary = {}
    try:
        st = steady_state(system, tol=tol, max_iter=max_iter)
        out.add("steady_state.json", dumps_json(st.to_dict()))
        summary["lambda"] = st.lam
    except ConvergenceError as exc:
        last = exc.last.to_dict() if exc.last is not None else {}
        out.add("steady_state.json", dumps_json({"converged": False, "error": str(exc), "last": last}))
        out.notices.append(f"steady state not converged: {exc}")

    agg = aggregate(traj)
    jc = detect_j_curve(traj.times, agg)
    out.add("jcurve.json", dumps_json(jc.to_dict()))
    out.add("aggregate.svg", line_chart([("mean W", traj.times, agg)], "aggregate activity", "t [month]", "mean W"))
    if "lambda" in summary:
        rate = jc.recovery_rate if jc.recovery_rate is not None else jc.tail_rate
        summary["late_rate_minus_lambda"] = rate - summary["lambda"]

    disp = dispersion_series(traj)
    out.add("dispersion.csv", dispersion_csv(disp))
    out.add("dispersion.svg", line_chart([("std log W", disp.times, disp.log_std),
                                          ("log(max - min)", disp.times,
                                           np.log(np.where(disp.spread > 0, disp.spread, np.nan)))],
                                         "dispersion", "t [month]", ""))
    out.add("histogram.csv", histogram_csv(log_histogram(traj.w[-1], bins)))

    ids = layout.labels() if layout is not None else tuple(str(i + 1) for i in range(traj.n))
    crossing = threshold_crossing_map(traj, threshold)
    out.add("crossing.csv", crossing_csv(ids, crossing))

    if layout is None:
        out.notices.append("no layout given: Moran curve skipped")
    else:
        bands = DistanceBands.build(layout, band_width)
        curves = {}
        for name, values in (("moran.csv", traj.w[-1]), ("moran_t0.csv", traj.w[0])):
            curve = moran_curve(values, layout, bands)
            curves[name] = curve
            out.add(name, moran_csv(curve))
            gaps = [f"({p.band_lo}, {p.band_hi}]: {p.reason}" for p in curve if p.value is None]
            if gaps:
                out.notices.append(f"{name}: gaps in bands " + "; ".join(gaps))
        out.add("moran.svg", line_chart(
            [(label, [p.midpoint for p in curves[name]],
              [np.nan if p.value is None else p.value for p in curves[name]])
             for label, name in (("t = 0", "moran_t0.csv"), ("final", "moran.csv"))],
            "Moran's I by distance", "distance [km]", "I"))
    out.add("summary.json", dumps_json(summary))


def _configure(out: Outputs, src: Source, args, **extra):
    out.seed = src.seed
    out.config = {"source": src.description, "dt": src.dt, "t_end": src.t_end, **extra}


def cmd_simulate(args) -> Outputs:
    src = _resolve_source(args)
    traj = integrate(src.system, src.w0, src.t_end, src.dt)
    out = Outputs()
    _configure(out, src, args)
    _simulation_files(out, traj)
    return out


def cmd_steady_state(args) -> Outputs:
    _positive("--tol", args.tol)
    src = _resolve_source(args)
    st = steady_state(src.system, tol=args.tol, max_iter=args.max_iter)
    out = Outputs()
    _configure(out, src, args, tol=args.tol, max_iter=args.max_iter)
    out.add("steady_state.json", dumps_json(st.to_dict()))
    if not args.out:
        sys.stdout.write(dumps_json(st.to_dict()))
    return out


def _threshold(args, src: Source | None) -> float:
    if args.threshold is not None:
        return _positive("--threshold", args.threshold)
    return src.threshold if src is not None and src.threshold is not None else 0.01


def cmd_report(args) -> Outputs:
    _positive("--tol", args.tol)
    _positive("--band-width-km", args.band_width_km)
    src = _resolve_source(args)
    traj = read_trajectory(args.trajectory) if args.trajectory else integrate(src.system, src.w0, src.t_end, src.dt)
    if traj.n != src.system.n:
        raise InputError(f"trajectory has {traj.n} units, system has {src.system.n}")
    threshold = _threshold(args, src)
    out = Outputs()
    _configure(out, src, args, threshold=threshold, band_width_km=args.band_width_km, bins=args.bins,
               tol=args.tol, max_iter=args.max_iter,
               trajectory=str(Path(args.trajectory).resolve()) if args.trajectory else None)
    _report_files(out, src.system, traj, src.layout, threshold, args.band_width_km, args.bins,
                  args.tol, args.max_iter)
    return out


def cmd_scenario(args) -> Outputs:
    _positive("--tol", args.tol)
    _positive("--band-width-km", args.band_width_km)
    src = _resolve_source(args)
    traj = integrate(src.system, src.w0, src.t_end, src.dt)
    threshold = _threshold(args, src)
    out = Outputs()
    _configure(out, src, args, threshold=threshold, band_width_km=args.band_width_km, bins=args.bins,
               tol=args.tol, max_iter=args.max_iter)
    out.add("system.json", dumps_json(src.system_doc))
    if src.layout is not None:
        out.add("layout.csv", layout_csv(src.layout))
    _simulation_files(out, traj)
    _report_files(out, src.system, traj, src.layout, threshold, args.band_width_km, args.bins,
                  args.tol, args.max_iter)
    return out


def _values_at(traj: Trajectory, time: float | None) -> tuple[float, np.ndarray]:
    if time is None:
        return float(traj.times[-1]), traj.w[-1]
    k = int(np.argmin(np.abs(traj.times - time)))
    return float(traj.times[k]), traj.w[k]


def cmd_moran(args) -> Outputs:
    _positive("--band-width-km", args.band_width_km)
    if args.trajectory:
        traj = read_trajectory(args.trajectory)
        layout = read_layout(args.layout) if args.layout else None
        config = {"trajectory": str(Path(args.trajectory).resolve())}
        seed = None
    else:
        src = _resolve_source(args)
        traj = integrate(src.system, src.w0, src.t_end, src.dt)
        layout, config, seed = src.layout, {"source": src.description, "dt": src.dt, "t_end": src.t_end}, src.seed
    if layout is None:
        raise InputError("moran needs a layout (--layout FILE or a scenario that has one)")
    if layout.n != traj.n:
        raise InputError(f"layout has {layout.n} units, trajectory has {traj.n}")
    t, values = _values_at(traj, args.time)
    curve = moran_curve(values, layout, DistanceBands.build(layout, args.band_width_km),
                        symmetric_weights=args.symmetric_weights)
    out = Outputs(config={**config, "time": t, "band_width_km": args.band_width_km,
                          "symmetric_weights": args.symmetric_weights}, seed=seed)
    out.add("moran.csv", moran_csv(curve))
    if not args.out:
        sys.stdout.write(out.files["moran.csv"])
    return out


def cmd_jcurve(args) -> Outputs:
    if args.trajectory:
        traj = read_trajectory(args.trajectory)
        out = Outputs(config={"trajectory": str(Path(args.trajectory).resolve())})
    else:
        src = _resolve_source(args)
        traj = integrate(src.system, src.w0, src.t_end, src.dt)
        out = Outputs()
        _configure(out, src, args)
    jc = detect_j_curve(traj.times, aggregate(traj), tail_fraction=args.tail_fraction)
    out.config["tail_fraction"] = args.tail_fraction
    out.add("jcurve.json", dumps_json(jc.to_dict()))
    if not args.out:
        sys.stdout.write(out.files["jcurve.json"])
    return out


def _panel(args):
    if args.panel:
        return load_panel(args.panel), {"panel": str(Path(args.panel).resolve())}
    if args.attributes and args.activity:
        return (load_panel(args.attributes, args.activity),
                {"attributes": str(Path(args.attributes).resolve()),
                 "activity": str(Path(args.activity).resolve())})
    raise InputError("need --panel DIR or both --attributes and --activity")


def cmd_ingest(args) -> Outputs:
    panel, config = _panel(args)
    out = Outputs(config=config)
    if args.out:
        attributes, activity = panel_csv(panel)
        out.add("attributes.csv", attributes)
        out.add("activity.csv", activity)
    summary = {
        "counties": panel.n,
        "years": panel.years.tolist(),
        "missing_cells": int(np.isnan(panel.activity).sum()),
        "has_layout": panel.layout is not None,
    }
    out.add("panel_summary.json", dumps_json(summary))
    if not args.out:
        sys.stdout.write(out.files["panel_summary.json"])
    return out


def cmd_correlate(args) -> Outputs:
    panel, config = _panel(args)
    rows = yearly_correlation_report(panel)
    out = Outputs(config=config)
    header = ["year", "count", "r_education", "r_density", "partial_education", "partial_density"]
    out.add("correlations.csv", csv_text(header, ([r.year, r.count, fmt(r.r_education), fmt(r.r_density),
                                                    fmt(r.partial_education), fmt(r.partial_density)]
                                                   for r in rows)))
    out.add("correlations.json", dumps_json([r.__dict__ for r in rows]))
    years = [r.year for r in rows]
    out.add("correlations.svg", line_chart(
        [(name, years, [getattr(r, name) for r in rows]) for name in header[2:]],
        "activity correlations by year", "year", "r"))
    if not args.out:
        sys.stdout.write(out.files["correlations.csv"])
    return out


def cmd_rerun(args) -> Outputs | None:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    argv = list(manifest["argv"])
    if args.out:
        argv += ["--out", args.out]
    code = main(argv)
    if code:
        raise SystemExit(code)
    return None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="growthcenters", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def source(sp, scenario_flag=True):
        sp.add_argument("--system", help="system JSON file")
        if scenario_flag:
            sp.add_argument("--scenario", help=f"built-in scenario: {', '.join(sorted(SCENARIOS))}")
        sp.add_argument("--dt", type=float)
        sp.add_argument("--t-end", type=float)
        sp.add_argument("--seed", type=int)

    def reporting(sp):
        sp.add_argument("--threshold", type=float, help="crossing threshold (default 0.01)")
        sp.add_argument("--band-width-km", type=float, default=10.0)
        sp.add_argument("--bins", type=int, default=20)
        sp.add_argument("--tol", type=float, default=1e-12)
        sp.add_argument("--max-iter", type=int, default=100_000)

    sp = sub.add_parser("simulate", help="integrate a system and write the trajectory")
    source(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("steady-state", help="dominant eigenpair (steady shares and common rate)")
    source(sp)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-iter", type=int, default=100_000)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_steady_state)

    sp = sub.add_parser("report", help="steady state, J-curve, dispersion, histogram, Moran, crossing map")
    source(sp)
    sp.add_argument("--trajectory", help="trajectory CSV (simulated if omitted)")
    sp.add_argument("--layout", help="layout CSV id,x_km,y_km,area_km2")
    reporting(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("moran", help="Moran's I by distance band")
    source(sp)
    sp.add_argument("--trajectory")
    sp.add_argument("--layout")
    sp.add_argument("--time", type=float, help="sample time (default: final)")
    sp.add_argument("--band-width-km", type=float, default=10.0)
    sp.add_argument("--symmetric-weights", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_moran)

    sp = sub.add_parser("jcurve", help="J-curve analysis of the aggregate")
    source(sp)
    sp.add_argument("--trajectory")
    sp.add_argument("--tail-fraction", type=float, default=0.5)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_jcurve)

    sp = sub.add_parser("scenario", help="run a built-in scenario and emit every artifact")
    sp.add_argument("name")
    source(sp, scenario_flag=False)
    reporting(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_scenario)

    for name, func, help_ in (("ingest", cmd_ingest, "validate a county panel"),
                              ("correlate", cmd_correlate, "yearly (partial) correlations of a panel")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--panel", help="directory with attributes.csv and activity.csv")
        sp.add_argument("--attributes")
        sp.add_argument("--activity")
        sp.add_argument("--out")
        sp.set_defaults(func=func)

    sp = sub.add_parser("rerun", help="repeat the run recorded in a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_rerun)
    return p


def _canonical_argv(argv: list[str]) -> list[str]:
    """argv with --out dropped and input paths made absolute, for the manifest."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        flag, eq, val = tok.partition("=")
        if flag == "--out":
            k += 1 if eq else 2
            continue
        if flag in PATH_FLAGS:
            if eq:
                out.append(f"{flag}={Path(val).resolve()}")
            else:
                out.append(flag)
                if k + 1 < len(argv):
                    out.append(str(Path(argv[k + 1]).resolve()))
                k += 1
        else:
            out.append(tok)
        k += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        result = args.func(args)
        if result is not None and getattr(args, "out", None):
            result.commit(args.out, args.command, _canonical_argv(argv))
        return EXIT_OK
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GrowthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
