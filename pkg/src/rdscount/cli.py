"""Command-line entry point: reproducible pipelines with JSON config files,
deterministic seeds, and a replayable manifest per run.

Subcommands: simulate-network, simulate-rds, estimate, power, forecast,
replay.  Exit codes: 0 success, 2 validation error, 3 estimator undefined.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, ergm, reference, timeseries
from .bootstrap import BootstrapPlan, bootstrap_ci, write_replicates_csv
from .errors import EstimatorUndefinedError, InputError
from .estimators import delta_ci_total, demographic_breakdown, sh_proportion, total_from_known
from .graph import AttributedNetwork
from .power import PowerSweepConfig, run_power_sweep, total_statistic, write_power_csv
from .rds import RdsDesign, drop_early_waves, read_rds_csv, simulate_rds, write_rds_csv


def _dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(out_dir: str, subcommand: str, config: dict, outputs: list[str]) -> None:
    manifest = {
        "tool": "rdscount",
        "version": __version__,
        "subcommand": subcommand,
        "config": {k: v for k, v in sorted(config.items()) if k not in ("out_dir", "config", "func")},
        "outputs": sorted(outputs),
    }
    _dump_json(manifest, os.path.join(out_dir, "manifest.json"))


def _prepare_out_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


# -- subcommand bodies -----------------------------------------------------------


def run_simulate_network(args: dict) -> list[str]:
    out = _prepare_out_dir(args["out_dir"])
    n = args["n"]
    if n < 1:
        raise InputError("n must be >= 1")
    if args["model"] == "reference":
        model = reference.reference_model()
    else:
        model = ergm.ErgmModel.from_json(args["model"])
    margins = reference.read_margins_csv(args["margins"]) if args.get("margins") else None
    attrs = reference.generate_attributes(
        n=n, n_group_a=args["n_group_a"], margins=margins,
        rng_seed=args["seed"], schema=reference.REFERENCE_SCHEMA,
    )
    dyads = n * (n - 1) // 2
    ctl = ergm.SimulationControl(
        burn_in=args["burn_in"] if args["burn_in"] is not None else 10 * dyads,
        thin=1,
        rng_seed=args["seed"],
    )
    net = ergm.simulate(model, n, attrs, ctl, schema=reference.REFERENCE_SCHEMA)
    edge_path = os.path.join(out, "edges.csv")
    node_path = os.path.join(out, "nodes.csv")
    net.to_csv(edge_path, node_path)
    stats = {
        "n": n,
        "edges": net.edge_count,
        "subgroup_counts": net.subgroup_counts("group"),
        "sufficient_stats": {
            t.label(): float(v)
            for t, v in zip(model.terms, ergm.sufficient_stats(net, model.terms))
        },
        "isolates": int(len(net.isolates)),
    }
    _dump_json(stats, os.path.join(out, "stats.json"))
    return ["edges.csv", "nodes.csv", "stats.json"]


def run_simulate_rds(args: dict) -> list[str]:
    out = _prepare_out_dir(args["out_dir"])
    net = AttributedNetwork.from_csv(args["edges"], args["nodes"])
    design = RdsDesign(
        target_n=args["target_n"],
        n_seeds=args["n_seeds"],
        seed_rule=args["seed_rule"],
        coupon_limit=args["coupon_limit"],
        rng_seed=args["seed"],
    )
    sample = simulate_rds(net, design)
    write_rds_csv(sample, os.path.join(out, "sample.csv"))
    return ["sample.csv"]


def run_estimate(args: dict) -> list[str]:
    out = _prepare_out_dir(args["out_dir"])
    sample = read_rds_csv(args["sample"])
    drop = args["drop_waves"]
    if args["exclude_seeds"]:
        drop = max(drop, 1)
    if drop:
        sample = drop_early_waves(sample, drop)
    plan = BootstrapPlan(replicates=args["replicates"], level=args["level"],
                         rng_seed=args["seed"], scheme=args["scheme"])
    group_a = args.get("group_a")
    n_b = args["shelter_count"]
    summary = sh_proportion(sample, group_a=group_a)
    mu_est, mu_reps = bootstrap_ci(
        sample, plan,
        lambda s: sh_proportion(s, group_a=group_a).mu_a,
        return_replicates=True,
    )
    total_est, total_reps = bootstrap_ci(
        sample, plan, total_statistic("group", group_a, n_b), return_replicates=True
    )
    delta_est = delta_ci_total(mu_est, n_b)
    settings = {
        "shelter_count": n_b,
        "group_a": summary.group_a,
        "group_b": summary.group_b,
        "drop_waves": drop,
        "bootstrap": {"replicates": plan.replicates, "scheme": plan.scheme,
                      "seed": plan.rng_seed},
        "mu_se_source": "bootstrap",
    }
    records = [
        {"estimator": "proportion_group_a", "n": sample.n, "settings": settings,
         **mu_est.to_dict()},
        {"estimator": "total_group_a_bootstrap", "n": sample.n, "settings": settings,
         **total_est.to_dict()},
        {"estimator": "total_group_a_delta", "n": sample.n, "settings": settings,
         **delta_est.to_dict()},
        {"estimator": "group_summary", "n": sample.n, "settings": settings,
         "mean_degree_a": summary.mean_degree_a, "mean_degree_b": summary.mean_degree_b,
         "c_ab": summary.c_ab, "c_ba": summary.c_ba, "mu_a": summary.mu_a,
         "point_total": total_from_known(summary.mu_a, n_b)},
    ]
    for attr in args["demographics"]:
        table = demographic_breakdown(sample, attr, plan=plan, group_a=group_a)
        for (g, lv), est in sorted(table.items()):
            records.append({"estimator": f"demographic.{attr}", "group": g, "levelvalue": lv,
                            "n": sample.n, **est.to_dict()})
    _dump_json(records, os.path.join(out, "results.json"))
    outputs = ["results.json"]
    if args["dump_replicates"]:
        write_replicates_csv(mu_reps, os.path.join(out, "replicates_mu.csv"))
        write_replicates_csv(total_reps, os.path.join(out, "replicates_total.csv"))
        outputs += ["replicates_mu.csv", "replicates_total.csv"]
    return outputs


def run_power(args: dict) -> list[str]:
    out = _prepare_out_dir(args["out_dir"])
    net = AttributedNetwork.from_csv(args["edges"], args["nodes"])
    cfg = PowerSweepConfig(
        fractions=tuple(args["fractions"]),
        replicates=args["replicates"],
        design=RdsDesign(target_n=args["n_seeds"], n_seeds=args["n_seeds"],
                         coupon_limit=args["coupon_limit"]),
        plan=BootstrapPlan(replicates=args["bootstrap_replicates"]),
        group_a=args.get("group_a"),
        rng_seed=args["seed"],
    )
    points = run_power_sweep(net, cfg)
    write_power_csv(points, os.path.join(out, "power.csv"))
    return ["power.csv"]


def run_forecast(args: dict) -> list[str]:
    out = _prepare_out_dir(args["out_dir"])
    series = timeseries.PitSeries.from_csv(args["series"])
    fit = timeseries.fit_arima010_with_covariate(series, variance=args["variance"])
    if args.get("future_shelter"):
        future = [float(v) for v in args["future_shelter"]]
        if len(future) != args["horizon"]:
            raise InputError("future_shelter must supply one value per horizon step")
    else:
        future = [series.shelter_covariate[-1]] * args["horizon"]
    logs = list(np.log(future))
    fc = timeseries.forecast(fit, series.unsheltered[-1], logs, level=args["level"])
    doc = {
        "fit": fit.to_dict(),
        "forecast": [
            {"horizon": h, "covariate": future[h - 1], **est.to_dict()}
            for h, est in enumerate(fc, start=1)
        ],
    }
    if args["rank_candidates"]:
        doc["candidates"] = timeseries.rank_arima_candidates(series)
    _dump_json(doc, os.path.join(out, "forecast.json"))
    return ["forecast.json"]


RUNNERS = {
    "simulate-network": run_simulate_network,
    "simulate-rds": run_simulate_rds,
    "estimate": run_estimate,
    "power": run_power,
    "forecast": run_forecast,
}


def run_replay(args: dict) -> list[str]:
    with open(args["manifest"], encoding="utf-8") as fh:
        manifest = json.load(fh)
    sub = manifest.get("subcommand")
    if sub not in RUNNERS:
        raise InputError(f"manifest names unknown subcommand {sub!r}")
    config = dict(manifest["config"])
    config["out_dir"] = args["out_dir"]
    outputs = RUNNERS[sub](config)
    _write_manifest(args["out_dir"], sub, config, outputs)
    return outputs


# -- argument parsing -------------------------------------------------------------


def _csv_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _csv_names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdscount",
        description="Network-sample simulation and hidden-population estimation pipelines",
    )
    parser.add_argument("--version", action="version", version=f"rdscount {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with defaults for this subcommand")
        p.add_argument("--out-dir", required=True, help="directory for outputs + manifest")
        p.add_argument("--seed", type=int, default=0, help="master RNG seed")

    p = sub.add_parser("simulate-network", help="draw a network from an ERGM")
    common(p)
    p.add_argument("--model", default="reference",
                   help="model JSON path, or 'reference' for the bundled model")
    p.add_argument("--n", type=int, default=reference.REFERENCE_N)
    p.add_argument("--n-group-a", type=int, default=reference.REFERENCE_UNSHELTERED,
                   help="number of group-A (unsheltered) nodes")
    p.add_argument("--margins", help="attribute margins CSV (attribute,level,proportion[,group])")
    p.add_argument("--burn-in", type=int, default=None,
                   help="Metropolis proposals (default: 10 * dyad count)")

    p = sub.add_parser("simulate-rds", help="simulate RDS recruitment on a network")
    common(p)
    p.add_argument("--edges", required=True)
    p.add_argument("--nodes", required=True)
    p.add_argument("--target-n", type=int, required=True)
    p.add_argument("--n-seeds", type=int, default=8)
    p.add_argument("--seed-rule", default="degree_proportional",
                   choices=["degree_proportional", "uniform", "fixed_list"])
    p.add_argument("--coupon-limit", type=int, default=3)

    p = sub.add_parser("estimate", help="proportion/total estimates from an RDS sample CSV")
    common(p)
    p.add_argument("--sample", required=True)
    p.add_argument("--shelter-count", type=int, required=True,
                   help="known size of group B (e.g. the administrative shelter count)")
    p.add_argument("--group-a", default=None)
    p.add_argument("--drop-waves", type=int, default=0)
    p.add_argument("--exclude-seeds", action="store_true")
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--scheme", default="tree", choices=["tree", "respondent_iid"])
    p.add_argument("--demographics", type=_csv_names, default=[],
                   help="comma-separated attribute names to break down")
    p.add_argument("--dump-replicates", action="store_true")

    p = sub.add_parser("power", help="bias/CI-width sweep over sampling fractions")
    common(p)
    p.add_argument("--edges", required=True)
    p.add_argument("--nodes", required=True)
    p.add_argument("--fractions", type=_csv_floats, default=list(PowerSweepConfig().fractions))
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--bootstrap-replicates", type=int, default=200)
    p.add_argument("--n-seeds", type=int, default=8)
    p.add_argument("--coupon-limit", type=int, default=3)
    p.add_argument("--group-a", default=None)

    p = sub.add_parser("forecast", help="drift+covariate forecast of a yearly count series")
    common(p)
    p.add_argument("--series", required=True, help="CSV with year,unsheltered,sheltered")
    p.add_argument("--horizon", type=int, default=2)
    p.add_argument("--future-shelter", type=_csv_floats, default=None,
                   help="future shelter counts, one per horizon step (default: hold last)")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--variance", default="ml", choices=["ml", "unbiased"])
    p.add_argument("--rank-candidates", action="store_true",
                   help="include the AIC table over the candidate order grid")

    p = sub.add_parser("replay", help="re-run a pipeline from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", required=True)
    # kept for config-file merging: subparser defaults shadow root-level ones
    parser._subcommand_parsers = dict(sub.choices)  # type: ignore[attr-defined]
    return parser


def _merge_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {config_path}: {exc}") from None
        if not isinstance(overrides, dict):
            raise InputError(f"{config_path}: config must be a JSON object")
        # defaults must land on the subparser actually in play, or its own
        # declared defaults shadow them on the second parse
        target = parser._subcommand_parsers.get(args.subcommand, parser)  # type: ignore[attr-defined]
        known = {a.dest for a in target._actions}
        unknown = set(overrides) - known
        if unknown:
            raise InputError(f"{config_path}: unknown config keys {sorted(unknown)}")
        target.set_defaults(**overrides)
        args = parser.parse_args(argv)  # explicit flags still win
    return args


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = _merge_config(parser, argv)
        args = vars(ns)
        sub = args.pop("subcommand")
        if sub == "replay":
            run_replay(args)
            return 0
        outputs = RUNNERS[sub](args)
        _write_manifest(args["out_dir"], sub, args, outputs)
        return 0
    except InputError as exc:
        print(f"rdscount: error: {exc}", file=sys.stderr)
        return 2
    except EstimatorUndefinedError as exc:
        print(f"rdscount: estimator undefined: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
