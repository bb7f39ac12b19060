"""Command line interface.

One binary, four subcommands:

    aavr case-study 1 --model aavr --replications 200
    aavr simulate --scenario synthetic-10x100 --periods 50 --seeds 20 --outdir out/
    aavr fit --decisions decisions.csv --holdout 2 --outdir out/
    aavr plotdata reachability --scenario case-study-1 --outdir out/

Every command that writes files also drops a ``manifest.json`` next to
them recording the exact invocation, so any output directory can be
reproduced from its manifest alone.

Exit codes: 0 success, 2 usage error, 3 optimization infeasible or
unsolved, 4 bad input data.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import json
import re
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

from .behavior import (
    BetaBelief,
    fit_preference,
    load_decision_corpus,
    preference_distribution,
    update_belief,
)
from .core import PlanningHorizon, ScenarioConfig, reachability_fraction
from .rebalance import (
    MODELS,
    SolveFailed,
    build_aavr,
    build_b1,
    build_b2,
    build_b3,
    build_b4,
    plan_to_flow,
    solve_model,
    write_flow_csv,
    write_plan_csv,
)
from .scenarios import (
    ScenarioBundle,
    case_study_1,
    case_study_2,
    case_study_3,
    ingest_trip_records,
    synthetic_network,
)
from .sim import (
    _SUMMARY_FIELDS,
    ExperimentResult,
    monte_carlo_case_study,
    opening_snapshot,
    run_experiment,
    write_metrics_csv,
    write_period_csv,
    write_summary_csv,
)
from .solver import write_lp


class UsageError(Exception):
    """Bad command line; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    # raise instead of sys.exit so main() controls the exit code
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _version() -> str:
    try:
        return metadata.version("aavr")
    except metadata.PackageNotFoundError:
        return "unknown"


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ")


def _write_manifest(outdir: Path, command: str, argv: list,
                    parameters: dict) -> None:
    clean = {}
    for key, val in parameters.items():
        if isinstance(val, Path):
            val = str(val)
        elif isinstance(val, np.ndarray):
            val = val.tolist()
        clean[key] = val
    doc = {
        "command": command,
        "created_utc": _utc_now(),
        "version": _version(),
        "argv": list(argv),
        "parameters": clean,
    }
    (outdir / "manifest.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _ensure_outdir(path_str: str) -> Path:
    out = Path(path_str)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_models(spec: str) -> list:
    if spec == "all":
        return list(MODELS)
    models = [m.strip() for m in spec.split(",") if m.strip()]
    if not models:
        raise UsageError("no models given")
    for m in models:
        if m not in MODELS:
            raise UsageError(
                f"unknown model {m!r}; expected one of {', '.join(MODELS)} or all")
    return models


_SYNTH_RE = re.compile(r"^synthetic-(\d+)x(\d+)$")


def _resolve_bundle(args) -> ScenarioBundle:
    """Build the scenario from --scenario/--bundle plus overrides."""
    scenario = getattr(args, "scenario", None)
    bundle_path = getattr(args, "bundle", None)
    if (scenario is None) == (bundle_path is None):
        raise UsageError("give exactly one of --scenario or --bundle")

    if bundle_path is not None:
        bundle = ScenarioBundle.load(bundle_path)
    else:
        seed = getattr(args, "seed", None)
        m = _SYNTH_RE.match(scenario)
        if m:
            regions, drivers = int(m.group(1)), int(m.group(2))
            if regions < 1 or drivers < 1:
                raise UsageError(f"bad synthetic size in {scenario!r}")
            bundle = synthetic_network(regions, drivers,
                                       seed=0 if seed is None else seed)
        elif scenario == "case-study-1":
            bundle = case_study_1(**({} if seed is None else {"seed": seed}))
        elif scenario == "case-study-2":
            bundle = case_study_2(**({} if seed is None else {"seed": seed}))
        elif scenario == "case-study-3":
            bundle = case_study_3(**({} if seed is None else {"seed": seed}))
        else:
            raise UsageError(
                f"unknown scenario {scenario!r}; expected case-study-1/2/3 "
                "or synthetic-<regions>x<drivers>")

    config_path = getattr(args, "config", None)
    if config_path is not None:
        bundle = dataclasses.replace(
            bundle, config=_overlay_config(bundle.config, config_path))
    return bundle


def _overlay_config(base: ScenarioConfig, path) -> ScenarioConfig:
    """Apply config-file keys on top of the scenario's own config."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"config {path} must contain a JSON object")
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"config {path} has unknown keys: {', '.join(unknown)}")
    if "horizon" in raw:
        raw["horizon"] = PlanningHorizon(float(raw["horizon"]))
    return dataclasses.replace(base, **raw)


# ---------------------------------------------------------------- case-study

_CASES = {1: case_study_1, 2: case_study_2, 3: case_study_3}

_BUILDERS = {
    "aavr": build_aavr,
    "b1": build_b1,
    "b2": build_b2,
    "b3": lambda snap: build_b3(snap, integer_targets=True),
    "b4": build_b4,
}


def _fmt_float(x: float | None) -> str:
    return "" if x is None else format(float(x), ".6f")


def _cmd_case_study(args, argv) -> int:
    kwargs = {"ab_minutes": args.ab_minutes}
    if args.seed is not None:
        kwargs["seed"] = args.seed
    bundle = _CASES[args.case](**kwargs)
    models = _parse_models(args.model)
    snapshot = opening_snapshot(bundle)

    outdir = _ensure_outdir(args.outdir) if args.outdir else None
    lpdir = _ensure_outdir(args.export_lp) if args.export_lp else None

    for model in models:
        if lpdir is not None:
            write_lp(_BUILDERS[model](snapshot), lpdir / f"{model}.lp")

        if args.replications > 0:
            stats = monte_carlo_case_study(bundle, model, args.replications)
            idle = ",".join(format(v, ".6f") for v in stats["mean_idle_arrivals"])
            print(f"scenario={bundle.name} model={model} "
                  f"replications={stats['replications']} "
                  f"moves={stats['recommended']} "
                  f"mean_served={stats['mean_served']:.6f} "
                  f"mean_accepted={stats['mean_accepted']:.6f} "
                  f"mean_idle_arrivals={idle}")
            continue

        plan = solve_model(model, snapshot)
        flow = plan_to_flow(plan, bundle.n_regions)
        moves = int(flow.X.sum())
        pairs = ";".join(f"{i}->{j}:{int(flow.X[i, j])}"
                         for i, j in zip(*np.nonzero(flow.X)))
        print(f"scenario={bundle.name} model={model} "
              f"n_drivers={plan.n_drivers} moves={moves} "
              f"flows={pairs or '-'} "
              f"objective={_fmt_float(plan.objective_value)}")

        if outdir is not None:
            write_plan_csv(plan, bundle.graph, outdir / f"plan_{model}.csv")
            write_flow_csv(flow, outdir / f"flow_{model}.csv")

    if outdir is not None:
        _write_manifest(outdir, "case-study", argv, {
            "case": args.case, "scenario": bundle.name, "models": models,
            "ab_minutes": args.ab_minutes, "seed": bundle.config.seed,
            "replications": args.replications,
        })
    return 0


# ------------------------------------------------------------------ simulate

def _cmd_simulate(args, argv) -> int:
    bundle = _resolve_bundle(args)
    models = _parse_models(args.models)
    if args.periods < 0:
        raise UsageError("--periods must be nonnegative")
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    outdir = _ensure_outdir(args.outdir)

    base_seed = bundle.config.seed if args.seed is None else args.seed
    seeds = [base_seed + k for k in range(args.seeds)]

    if args.periods == 0:
        # schema-only run: emit the headers and stop
        empty = ExperimentResult(models=models, seeds=[], rows=[])
        write_metrics_csv(empty, outdir / "metrics.csv")
        with open(outdir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
            csv.DictWriter(fh, fieldnames=_SUMMARY_FIELDS).writeheader()
        if args.keep_periods:
            write_period_csv(empty, outdir / "periods.csv")
    else:
        result = run_experiment(
            bundle, models, args.periods, args.seeds,
            base_seed=args.seed, jobs=args.jobs,
            demand_scale=args.demand_scale,
            keep_periods=args.keep_periods)
        write_metrics_csv(result, outdir / "metrics.csv")
        write_summary_csv(result, outdir / "summary.csv")
        if args.keep_periods:
            write_period_csv(result, outdir / "periods.csv")
        for row in result.summary():
            print(" ".join(f"{k}={v}" for k, v in row.items()))

    _write_manifest(outdir, "simulate", argv, {
        "scenario": bundle.name, "bundle": args.bundle,
        "config": args.config, "models": models,
        "periods": args.periods, "seeds": seeds,
        "jobs": args.jobs, "demand_scale": args.demand_scale,
        "keep_periods": args.keep_periods,
    })
    print(f"wrote {outdir / 'metrics.csv'}")
    return 0


# ----------------------------------------------------------------------- fit

def _cmd_fit(args, argv) -> int:
    if (args.decisions is None) == (args.trips is None):
        raise UsageError("give exactly one of --decisions or --trips")
    outdir = _ensure_outdir(args.outdir)
    if args.decisions is not None:
        _fit_decisions(args, outdir)
        source = args.decisions
    else:
        _fit_trips(args, outdir)
        source = args.trips
    _write_manifest(outdir, "fit", argv, {
        "decisions": args.decisions, "trips": args.trips,
        "holdout": args.holdout, "regions": args.regions,
        "window": args.window, "source": source,
    })
    return 0


def _fit_decisions(args, outdir: Path) -> None:
    if args.holdout < 0:
        raise UsageError("--holdout must be nonnegative")
    corpus = load_decision_corpus(args.decisions)
    if not corpus:
        raise ValueError(f"decision corpus {args.decisions} is empty")
    by_driver: dict = {}
    for driver_id, _period, chosen, X in corpus:   # already (driver, period) sorted
        by_driver.setdefault(driver_id, []).append((chosen, X))

    models = {}
    hits = trials = 0
    for driver_id, decisions in by_driver.items():
        n_hold = args.holdout if len(decisions) > args.holdout else 0
        train = decisions[:-n_hold] if n_hold else decisions
        model = fit_preference(train)
        models[driver_id] = model
        for chosen, X in decisions[len(train):]:
            pred = int(np.argmax(preference_distribution(model, X)))
            hits += int(pred == chosen)
            trials += 1

    dim = max(m.weights.size for m in models.values())
    with open(outdir / "weights.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["driver_id"] + [f"w_{j}" for j in range(dim)])
        for driver_id in sorted(models):
            w.writerow([driver_id] + [format(v, ".12g")
                                      for v in models[driver_id].weights])

    line = f"drivers={len(models)} decisions={len(corpus)} held_out={trials}"
    if trials:
        line += f" top1_accuracy={hits / trials:.6f}"
    print(line)
    print(f"wrote {outdir / 'weights.csv'}")


def _fit_trips(args, outdir: Path) -> None:
    result = ingest_trip_records(args.trips, n_regions=args.regions,
                                 window=args.window)
    for message in result.warnings:
        print(f"warning: {message}", file=sys.stderr)

    graph = result.graph
    R = graph.n_regions
    with open(outdir / "travel.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["from", "to", "minutes", "stddev_minutes", "km"])
        for i in range(R):
            for j in range(R):
                w.writerow([i, j,
                            format(graph.expected_travel_time[i, j], ".12g"),
                            format(graph.travel_time_stddev[i, j], ".12g"),
                            format(graph.distance[i, j], ".12g")])
    with open(outdir / "od.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["from", "to", "prob"])
        for i in range(R):
            for j in range(R):
                w.writerow([i, j, format(result.od[i, j], ".12g")])
    with open(outdir / "demand_history.csv", "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "demand", "hour", "weekday", "day_of_month"])
        for r in range(R):
            for obs in result.history.series(r):
                w.writerow([r, format(obs.demand, ".12g"), obs.hour,
                            obs.weekday, obs.day_of_month])

    print(f"rows={result.n_rows} skipped={result.skipped_rows} "
          f"regions={R} fallback_pairs={result.fallback_pairs}")
    print(f"wrote {outdir / 'travel.csv'}")


# ------------------------------------------------------------------ plotdata

def _cmd_plotdata(args, argv) -> int:
    outdir = _ensure_outdir(args.outdir)
    if args.kind == "reachability":
        path = _plot_reachability(args, outdir)
    elif args.kind == "posterior":
        path = _plot_posterior(args, outdir)
    else:
        path = _plot_comparison(args, outdir)
    _write_manifest(outdir, f"plotdata {args.kind}", argv, {
        "kind": args.kind,
        "scenario": getattr(args, "scenario", None),
        "bundle": getattr(args, "bundle", None),
        "max_horizon": getattr(args, "max_horizon", None),
        "steps": getattr(args, "steps", None),
        "outcomes": getattr(args, "outcomes", None),
        "inputs": getattr(args, "inputs", None),
        "labels": getattr(args, "labels", None),
    })
    print(f"wrote {path}")
    return 0


def _plot_reachability(args, outdir: Path) -> Path:
    bundle = _resolve_bundle(args)
    tmax = args.max_horizon
    if tmax is None:
        tmax = 1.25 * float(bundle.graph.expected_travel_time.max())
    if tmax <= 0 or args.steps < 1:
        raise UsageError("--max-horizon must be positive and --steps >= 1")
    path = outdir / "reachability.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "horizon_min", "fraction"])
        for h in np.linspace(tmax / args.steps, tmax, args.steps):
            frac = reachability_fraction(bundle.graph, PlanningHorizon(float(h)))
            w.writerow([bundle.name, format(float(h), ".6f"),
                        format(frac, ".6f")])
    return path


def _plot_posterior(args, outdir: Path) -> Path:
    if not args.outcomes or set(args.outcomes) - {"0", "1"}:
        raise UsageError("--outcomes must be a nonempty string of 0s and 1s")
    belief = BetaBelief(args.alpha0, args.beta0)
    path = outdir / "posterior.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "outcome", "alpha", "beta", "mean"])
        w.writerow([0, "", format(belief.alpha, ".6f"),
                    format(belief.beta, ".6f"), format(belief.mean, ".6f")])
        for step, ch in enumerate(args.outcomes, start=1):
            belief = update_belief(belief, int(ch), args.eps0, args.eps1)
            w.writerow([step, ch, format(belief.alpha, ".6f"),
                        format(belief.beta, ".6f"), format(belief.mean, ".6f")])
    print(f"final_mean={belief.mean:.6f}")
    return path


def _plot_comparison(args, outdir: Path) -> Path:
    if not args.inputs:
        raise UsageError("--inputs requires at least one summary.csv")
    labels = args.labels
    if labels is None:
        labels = [Path(p).resolve().parent.name or Path(p).stem
                  for p in args.inputs]
    if len(labels) != len(args.inputs):
        raise UsageError("--labels must match --inputs one to one")

    path = outdir / "comparison.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "model", "metric", "value"])
        for label, src in zip(labels, args.inputs):
            with open(src, newline="", encoding="utf-8") as sfh:
                reader = csv.DictReader(sfh)
                if reader.fieldnames is None or "model" not in reader.fieldnames:
                    raise ValueError(f"{src} is not a summary.csv (no model column)")
                for row in reader:
                    for col in reader.fieldnames:
                        if col == "model":
                            continue
                        w.writerow([label, row["model"], col, row[col]])
    return path


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aavr",
                     description="Adherence-aware vehicle rebalancing toolkit.")
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", metavar="command")

    cs = sub.add_parser("case-study", help="solve a canonical two-region case",
                        description="Solve one of the canonical case studies "
                        "and report the recommended flows.")
    cs.add_argument("case", type=int, choices=(1, 2, 3))
    cs.add_argument("--model", default="aavr",
                    help="model name, comma list, or all (default: aavr)")
    cs.add_argument("--ab-minutes", type=float, default=4.0,
                    help="A-to-B travel time in minutes (default: 4)")
    cs.add_argument("--seed", type=int, default=None)
    cs.add_argument("--replications", type=int, default=0,
                    help="run a single-period Monte Carlo instead of "
                    "printing the plan")
    cs.add_argument("--outdir", default=None,
                    help="write plan_<model>.csv and flow_<model>.csv here")
    cs.add_argument("--export-lp", default=None, metavar="DIR",
                    help="also write each model's program in LP format")
    cs.set_defaults(func=_cmd_case_study)

    sim = sub.add_parser("simulate", help="run the fleet simulator",
                         description="Replicate models over common random "
                         "numbers and write metrics/summary CSVs.")
    sim.add_argument("--scenario", default=None,
                     help="case-study-1/2/3 or synthetic-<regions>x<drivers>")
    sim.add_argument("--bundle", default=None,
                     help="path to a scenario bundle JSON")
    sim.add_argument("--config", default=None,
                     help="JSON file of config fields layered on the scenario")
    sim.add_argument("--models", default="all",
                     help="comma list of models or all (default: all)")
    sim.add_argument("--periods", type=int, default=50)
    sim.add_argument("--seeds", type=int, default=20,
                     help="number of replications (default: 20)")
    sim.add_argument("--seed", type=int, default=None,
                     help="base seed (default: the scenario's)")
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--demand-scale", type=float, default=1.0)
    sim.add_argument("--keep-periods", action="store_true",
                     help="also write per-period rows to periods.csv")
    sim.add_argument("--outdir", required=True)
    sim.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser("fit", help="estimate tables from logged data",
                         description="Fit driver preferences from a decision "
                         "corpus, or distill travel/OD/demand tables from "
                         "trip records.")
    fit.add_argument("--decisions", default=None,
                     help="repositioning-decision corpus CSV")
    fit.add_argument("--holdout", type=int, default=0,
                     help="per-driver decisions held out for top-1 accuracy")
    fit.add_argument("--trips", default=None, help="trip-record CSV")
    fit.add_argument("--regions", type=int, default=None,
                     help="region count override for --trips")
    fit.add_argument("--window", type=int, default=168,
                     help="demand-history window for --trips (default: 168)")
    fit.add_argument("--outdir", required=True)
    fit.set_defaults(func=_cmd_fit)

    pd = sub.add_parser("plotdata", help="emit plot-ready CSV tables",
                        description="Generate tidy CSVs for plots: horizon "
                        "reachability sweeps, belief posterior traces, or "
                        "cross-run summary comparisons.")
    pd.add_argument("kind", choices=("reachability", "posterior", "comparison"))
    pd.add_argument("--scenario", default=None)
    pd.add_argument("--bundle", default=None)
    pd.add_argument("--config", default=None)
    pd.add_argument("--seed", type=int, default=None)
    pd.add_argument("--max-horizon", type=float, default=None,
                    help="largest horizon in the sweep (default: 1.25x the "
                    "slowest pair)")
    pd.add_argument("--steps", type=int, default=25)
    pd.add_argument("--outcomes", default="111111",
                    help="observed 0/1 repositioning outcomes (default: 111111)")
    pd.add_argument("--alpha0", type=float, default=1.0)
    pd.add_argument("--beta0", type=float, default=1.0)
    pd.add_argument("--eps0", type=float, default=1.0)
    pd.add_argument("--eps1", type=float, default=1.0)
    pd.add_argument("--inputs", nargs="+", default=None,
                    help="summary.csv files to merge (comparison)")
    pd.add_argument("--labels", nargs="+", default=None,
                    help="one label per input (default: parent directory)")
    pd.add_argument("--outdir", required=True)
    pd.set_defaults(func=_cmd_plotdata)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_help(sys.stderr)
            return 2
        return args.func(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolveFailed as exc:
        period = getattr(exc, "period", None)
        where = f" (period {period})" if period is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
