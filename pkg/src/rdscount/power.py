"""Monte Carlo power-analysis sweeps: estimator bias and CI width as a
function of the sampled population fraction, plus the seed/burn-in
sensitivity harness.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .bootstrap import BootstrapPlan, bootstrap_ci
from .errors import EstimatorUndefinedError, InputError
from .estimators import sh_proportion, total_from_known
from .graph import AttributedNetwork
from .rds import RdsDesign, RdsSample, drop_early_waves, simulate_rds

DEFAULT_FRACTIONS = (0.02, 0.05, 0.10, 0.20, 0.30, 0.50)


@dataclass(frozen=True)
class PowerSweepConfig:
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    replicates: int = 100
    design: RdsDesign = field(default_factory=lambda: RdsDesign(target_n=100))
    plan: BootstrapPlan = field(default_factory=lambda: BootstrapPlan(replicates=200))
    group_attr: str = "group"
    group_a: str | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if not self.fractions or any(not 0 < f <= 1 for f in self.fractions):
            raise InputError("fractions must lie in (0, 1]")
        if any(b <= a for a, b in zip(self.fractions, self.fractions[1:])):
            raise InputError("fractions must be strictly increasing")
        if self.replicates < 30:
            raise InputError("need at least 30 replicates per fraction")


@dataclass
class PowerCurvePoint:
    fraction: float
    mean_estimate: float
    mean_bias: float
    ci_low_mean: float
    ci_high_mean: float
    coverage_rate: float
    mean_max_wave: float
    failures: int

    def row(self) -> list:
        return [self.fraction, self.mean_estimate, self.mean_bias, self.ci_low_mean,
                self.ci_high_mean, self.coverage_rate, self.mean_max_wave, self.failures]


def total_statistic(group_attr: str, group_a: str | None, n_b: int):
    """Statistic closure: unsheltered-style total from a sample."""
    def stat(s: RdsSample) -> float:
        summary = sh_proportion(s, group_attr, group_a)
        return total_from_known(summary.mu_a, n_b)
    return stat


def _derive(master: int, *idx: int) -> int:
    return int(np.random.SeedSequence([master & (2**63 - 1), *idx]).generate_state(1, np.uint64)[0])


def run_power_sweep(net: AttributedNetwork, cfg: PowerSweepConfig) -> list[PowerCurvePoint]:
    """For each fraction f: ``replicates`` independent RDS + proportion +
    total + bootstrap pipelines against the known totals of ``net``."""
    counts = net.subgroup_counts(cfg.group_attr)
    levels = tuple(sorted(counts))
    from .estimators import resolve_group_a

    group_a, group_b = resolve_group_a(levels, cfg.group_a)
    truth_a = counts[group_a]
    n_b = counts[group_b]
    if truth_a == 0 or n_b == 0:
        raise InputError("network must contain both groups")
    out = []
    for fi, f in enumerate(cfg.fractions):
        target = max(cfg.design.n_seeds, round(f * net.node_count))
        estimates, lows, highs, waves = [], [], [], []
        covered = 0
        failures = 0
        for rep in range(cfg.replicates):
            design = replace(cfg.design, target_n=target,
                             rng_seed=_derive(cfg.rng_seed, fi, rep, 0))
            plan = replace(cfg.plan, rng_seed=_derive(cfg.rng_seed, fi, rep, 1))
            try:
                sample = simulate_rds(net, design)
                est = bootstrap_ci(sample, plan, total_statistic(cfg.group_attr, group_a, n_b))
            except EstimatorUndefinedError:
                failures += 1
                continue
            estimates.append(est.point)
            lows.append(est.ci_low)
            highs.append(est.ci_high)
            waves.append(sample.max_wave)
            if est.ci_low <= truth_a <= est.ci_high:
                covered += 1
        ok = len(estimates)
        if ok == 0:
            raise EstimatorUndefinedError(f"all replicates failed at fraction {f}")
        point = PowerCurvePoint(
            fraction=f,
            mean_estimate=float(np.mean(estimates)),
            mean_bias=float(np.mean(estimates) - truth_a),
            ci_low_mean=float(np.mean(lows)),
            ci_high_mean=float(np.mean(highs)),
            coverage_rate=covered / ok,
            mean_max_wave=float(np.mean(waves)),
            failures=failures,
        )
        out.append(point)
    return out


def write_power_csv(points: list[PowerCurvePoint], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["fraction", "mean_estimate", "mean_bias", "ci_low_mean",
                    "ci_high_mean", "coverage", "mean_max_wave", "failures"])
        for p in points:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in p.row()])


# -- seed / burn-in sensitivity ---------------------------------------------------


def seed_sensitivity(source, n_b: int, protocol: dict | None = None,
                     plan: BootstrapPlan | None = None,
                     group_attr: str = "group", group_a: str | None = None,
                     design: RdsDesign | None = None) -> list[dict]:
    """Estimates under perturbations of one sample (or of a fresh sample
    simulated from a network + design).

    protocol keys: ``drop_seeds`` (bool), ``drop_waves`` (list of w),
    ``vary_seed_rule`` (list of rules; needs a network source).
    Rows whose perturbation empties the sample or leaves the estimator
    undefined are emitted as NA.  Mean shifts beyond one baseline bootstrap
    SE are flagged.
    """
    protocol = protocol or {"drop_seeds": True, "drop_waves": [1, 2]}
    plan = plan or BootstrapPlan(replicates=500)
    if isinstance(source, AttributedNetwork):
        if design is None:
            raise InputError("seed sensitivity on a network requires a design")
        base_sample = simulate_rds(source, design)
    else:
        base_sample = source

    stat = total_statistic(group_attr, group_a, n_b)
    rows: list[dict] = []

    def add_row(name: str, sample: RdsSample | None, baseline: dict | None = None):
        if sample is None:
            rows.append({"perturbation": name, "point": None, "se": None,
                         "ci": None, "na": True, "shift_flag": None})
            return
        try:
            est = bootstrap_ci(sample, plan, stat)
        except EstimatorUndefinedError as exc:
            rows.append({"perturbation": name, "point": None, "se": None,
                         "ci": None, "na": True, "shift_flag": None, "reason": str(exc)})
            return
        flag = None
        if baseline is not None:
            flag = abs(est.point - baseline["point"]) > baseline["se"]
        rows.append({"perturbation": name, "point": est.point, "se": est.se,
                     "ci": [est.ci_low, est.ci_high], "na": False, "shift_flag": flag})

    add_row("baseline", base_sample)
    baseline = rows[0] if not rows[0]["na"] else None
    if protocol.get("drop_seeds"):
        try:
            pert = drop_early_waves(base_sample, 1)
        except InputError:
            pert = None
        add_row("drop_seeds", pert, baseline)
    for w in protocol.get("drop_waves", []):
        if w == 0:
            add_row("drop_waves_0", base_sample, baseline)
            continue
        try:
            pert = drop_early_waves(base_sample, w)
        except InputError:
            pert = None
        add_row(f"drop_waves_{w}", pert, baseline)
    for rule in protocol.get("vary_seed_rule", []):
        if not isinstance(source, AttributedNetwork):
            raise InputError("vary_seed_rule requires a network source")
        pert = simulate_rds(source, replace(design, seed_rule=rule))
        add_row(f"seed_rule_{rule}", pert, baseline)
    return rows
