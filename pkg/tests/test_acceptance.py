"""The nine release gates, one test per criterion.

Each test prints (and records for the terminal summary) a single
"ACCEPTANCE k: PASS/FAIL" line with the measured quantities.
"""

import json
import math
import os

import numpy as np
import networkx as nx
from networkx.generators.atlas import graph_atlas_g

import rdscount as rc
from rdscount import cli, ergm, power, reference, timeseries
from rdscount.bootstrap import BootstrapPlan, bootstrap_ci
from rdscount.errors import EstimatorUndefinedError
from rdscount.power import total_statistic
from rdscount.rds import cross_recruit_counts

from conftest import ACCEPTANCE_LINES


def _report(num: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# -- 1: estimator oracle equivalence on all small two-group graphs ------------


def _oracle_mu(sample):
    """Independent recount of the two-group proportion from the sample:
    exact-arithmetic group mean degrees and cross-recruitment fractions."""
    grp = sample.attribute("group")
    d = sample.degree
    in_a = grp == "A"
    if not in_a.any() or in_a.all():
        return None
    dbar_a = in_a.sum() / np.sum(1.0 / d[in_a])
    dbar_b = (~in_a).sum() / np.sum(1.0 / d[~in_a])
    r, _ = cross_recruit_counts(sample, "group", ("A", "B"))
    if r[0, 1] == 0 or r[1, 0] == 0:
        return None
    c_ab = r[0, 1] / (r[0, 0] + r[0, 1])
    c_ba = r[1, 0] / (r[1, 0] + r[1, 1])
    return dbar_b * c_ba / (dbar_a * c_ab + dbar_b * c_ba)


def test_criterion_1_estimator_oracle_equivalence():
    checked = 0
    worst = 0.0
    for g in graph_atlas_g():
        n = g.number_of_nodes()
        if n < 2 or n > 7 or not nx.is_connected(g):
            continue
        edges = np.array(sorted(tuple(sorted(e)) for e in g.edges()), dtype=np.int64)
        for bits in range(1, 2 ** n - 1):
            labels = ["A" if (bits >> k) & 1 else "B" for k in range(n)]
            net = rc.AttributedNetwork(n, edges, {"group": labels})
            design = rc.RdsDesign(target_n=n, n_seeds=1, coupon_limit=n,
                                  rng_seed=0, seed_rule="uniform")
            sample = rc.simulate_rds(net, design)
            assert sample.n == n  # full census of a connected graph
            mu_oracle = _oracle_mu(sample)
            if mu_oracle is None:
                continue  # estimator precondition (cross-ties both ways) unmet
            try:
                mu = rc.sh_proportion(sample, "group", "A").mu_a
            except EstimatorUndefinedError:
                continue
            worst = max(worst, abs(mu - mu_oracle))
            checked += 1
    ok = checked > 50_000 and worst <= 1e-9
    _report(1, ok, f"{checked} census samples on all connected graphs N<=7, "
                   f"max |mu - oracle| = {worst:.2e} (tol 1e-9)")


# -- 2: deterministic total from the published proportion ---------------------


def test_criterion_2_total_from_known():
    total = rc.total_from_known(0.304, 1225)
    ok = abs(total - 535.06) <= 0.01
    _report(2, ok, f"total_from_known(0.304, 1225) = {total:.4f} (want 535.06 +- 0.01)")


# -- 3: full simulated pipeline, distributional -------------------------------


def test_criterion_3_pipeline_distribution():
    attrs = reference.generate_attributes(rng_seed=1)
    model = reference.reference_model()
    n = reference.REFERENCE_N
    dyads = n * (n - 1) // 2
    ctl = ergm.SimulationControl(burn_in=10 * dyads, thin=2 * dyads, rng_seed=42)
    nets = ergm.simulate_many(model, n, attrs, ctl, 200, schema=reference.REFERENCE_SCHEMA)
    known_shelter = 1225  # administrative count used by the estimate pipeline
    estimates = []
    covered = 0
    usable = 0
    for k, net in enumerate(nets):
        truth = net.subgroup_counts("group")[reference.GROUP_A]
        sample = rc.simulate_rds(net, rc.RdsDesign(target_n=246, n_seeds=8,
                                                   coupon_limit=3, rng_seed=1000 + k))
        plan = BootstrapPlan(replicates=400, rng_seed=2000 + k)
        try:
            est = bootstrap_ci(sample, plan,
                               total_statistic("group", reference.GROUP_A, known_shelter))
        except EstimatorUndefinedError:
            continue
        usable += 1
        estimates.append(est.point)
        covered += int(est.ci_low <= truth <= est.ci_high)
    median = float(np.median(estimates))
    coverage = covered / usable
    ok = usable >= 190 and 480 <= median <= 590 and coverage >= 0.85
    _report(3, ok, f"{usable}/200 runs usable, median total {median:.1f} "
                   f"(want [480, 590]), truth coverage {coverage:.3f} (want >= 0.85)")


# -- 4: power-curve shape ------------------------------------------------------


def test_criterion_4_power_curve_shape(reference_net):
    cfg = power.PowerSweepConfig(
        replicates=100,
        design=rc.RdsDesign(target_n=100, n_seeds=8, coupon_limit=3),
        plan=BootstrapPlan(replicates=200, rng_seed=0),
        rng_seed=2024)
    points = power.run_power_sweep(reference_net, cfg)
    by_frac = {round(p.fraction, 4): p for p in points}
    bias_small = by_frac[0.02].mean_bias
    bias_large = by_frac[0.20].mean_bias
    widths = [p.ci_high_mean - p.ci_low_mean for p in points]
    halved = abs(bias_large) <= 0.5 * abs(bias_small)
    decreasing = all(a > b for a, b in zip(widths, widths[1:]))
    ok = halved and decreasing
    _report(4, ok, f"|bias| {abs(bias_small):.1f} @0.02 -> {abs(bias_large):.1f} @0.20 "
                   f"(halving {halved}), widths {[round(w) for w in widths]} "
                   f"strictly decreasing {decreasing}")


# -- 5: sampler calibration and change statistics ------------------------------


def test_criterion_5_sampler_calibration():
    p, n = 0.1, 100
    dyads = n * (n - 1) // 2
    model = ergm.ErgmModel([ergm.edges()], np.array([math.log(p / (1 - p))]))
    ctl = ergm.SimulationControl(burn_in=10 * dyads, thin=2 * dyads, rng_seed=20)
    counts = ergm.simulate_edge_counts(model, n, {"group": ["A"] * n}, ctl, 200)
    mean = float(np.mean(counts))
    se = float(np.std(counts, ddof=1) / math.sqrt(len(counts)))
    calibrated = abs(mean - 495.0) <= 3 * se

    terms = [ergm.edges(), ergm.degree(2), ergm.degree(4),
             ergm.nodefactor("group", "B"), ergm.nodematch("group")]
    rng = np.random.default_rng(6)
    from rdscount.graph import NodeAttributeSchema
    schema = NodeAttributeSchema({"group": ["A", "B"]})
    worst = 0.0
    for size in range(2, 13):
        mask = rng.random((size, size)) < 0.35
        edges = [(i, j) for i in range(size) for j in range(i + 1, size) if mask[i, j]]
        groups = [("A", "B")[k] for k in rng.integers(0, 2, size=size)]
        net = rc.AttributedNetwork(size, np.array(edges, dtype=np.int64).reshape(-1, 2),
                                   {"group": groups}, schema=schema)
        edge_set = {tuple(e) for e in net.edges.tolist()}
        for i in range(size):
            for j in range(i + 1, size):
                plus = rc.AttributedNetwork(
                    size, np.array(sorted(edge_set | {(i, j)}), dtype=np.int64).reshape(-1, 2),
                    {"group": groups}, schema=schema)
                minus = rc.AttributedNetwork(
                    size, np.array(sorted(edge_set - {(i, j)}), dtype=np.int64).reshape(-1, 2),
                    {"group": groups}, schema=schema)
                diff = ergm.sufficient_stats(plus, terms) - ergm.sufficient_stats(minus, terms)
                worst = max(worst, float(np.max(np.abs(
                    ergm.change_stats(net, terms, i, j) - diff))))
    ok = calibrated and worst == 0.0
    _report(5, ok, f"edges-only N=100 p=0.1: mean {mean:.2f} vs 495 (3*SE {3 * se:.2f}); "
                   f"change-stat recount max error {worst} for N<=12")


# -- 6: moment-matching recovery ------------------------------------------------


def test_criterion_6_moment_matching_recovery():
    n = 200
    dyads = n * (n - 1) // 2
    errors = {}
    for p in (0.05, 0.2, 0.5):
        ctl = ergm.SimulationControl(burn_in=4 * dyads, thin=dyads, rng_seed=int(p * 100))
        res = ergm.fit_moment_matching([p * dyads], [ergm.edges()], n,
                                       {"group": ["A"] * n}, ctl,
                                       theta0=[math.log(p / (1 - p)) - 0.5],
                                       max_iter=60, draws_per_iter=10)
        errors[p] = abs(res.model.theta[0] - math.log(p / (1 - p)))
    ok = all(e <= 0.15 for e in errors.values())
    _report(6, ok, "theta error vs logit(p): " +
            ", ".join(f"p={p}: {e:.4f}" for p, e in errors.items()) + " (tol 0.15)")


# -- 7: drift + covariate regression --------------------------------------------


TRUE_DRIFT = 306.69
TRUE_BETA = -7580.84
TRUE_SIGMA2 = 309_249.9


def _synthetic_series(rng):
    n = 14
    shelter = 9000.0 * np.exp(np.cumsum(rng.normal(0.0, 0.06, size=n)))
    dlx = np.diff(np.log(shelter))
    y = np.empty(n)
    y[0] = 6000.0
    for t in range(1, n):
        y[t] = (y[t - 1] + TRUE_DRIFT + TRUE_BETA * dlx[t - 1]
                + rng.normal(0.0, math.sqrt(TRUE_SIGMA2)))
    return timeseries.PitSeries(list(range(2007, 2007 + n)), list(y), list(shelter))


def test_criterion_7_arima_recovery():
    rng = np.random.default_rng(14)
    drifts, betas = [], []
    worst_ols = 0.0
    for _ in range(200):
        s = _synthetic_series(rng)
        fit = timeseries.fit_arima010_with_covariate(s)
        drifts.append(fit.drift)
        betas.append(fit.beta_log_shelter)
        dy = np.diff(np.asarray(s.unsheltered))
        dx = np.diff(np.log(np.asarray(s.shelter_covariate)))
        X = np.column_stack((np.ones(dy.size), dx))
        coef = np.linalg.solve(X.T @ X, X.T @ dy)
        worst_ols = max(worst_ols, abs(fit.drift - coef[0]), abs(fit.beta_log_shelter - coef[1]))
    se_drift = float(np.std(drifts, ddof=1) / math.sqrt(len(drifts)))
    se_beta = float(np.std(betas, ddof=1) / math.sqrt(len(betas)))
    drift_ok = abs(np.mean(drifts) - TRUE_DRIFT) <= 2 * se_drift
    beta_ok = abs(np.mean(betas) - TRUE_BETA) <= 2 * se_beta
    ols_ok = worst_ols <= 1e-8

    real_path = os.path.join(os.path.dirname(__file__), "..", "data",
                             "hud_king_county_series.csv")
    real_note = "real-series clause not exercised (no data file bundled)"
    real_ok = True
    if os.path.exists(real_path):
        s = timeseries.PitSeries.from_csv(real_path)
        fit = timeseries.fit_arima010_with_covariate(s)
        real_ok = (abs(fit.drift - TRUE_DRIFT) <= 0.01 * abs(TRUE_DRIFT)
                   and abs(fit.beta_log_shelter - TRUE_BETA) <= 0.01 * abs(TRUE_BETA))
        real_note = f"real series: drift {fit.drift:.2f}, beta {fit.beta_log_shelter:.2f}"

    ok = drift_ok and beta_ok and ols_ok and real_ok
    _report(7, ok, f"mean drift {np.mean(drifts):.2f} (true {TRUE_DRIFT}, 2SE {2 * se_drift:.2f}), "
                   f"mean beta {np.mean(betas):.1f} (true {TRUE_BETA}, 2SE {2 * se_beta:.1f}), "
                   f"OLS-vs-oracle max err {worst_ols:.1e}; {real_note}")


# -- 8: bootstrap coverage -------------------------------------------------------


def test_criterion_8_bootstrap_coverage(reference_net):
    counts = reference_net.subgroup_counts("group")
    truth = counts[reference.GROUP_A]
    n_b = counts[reference.GROUP_B]
    covered = 0
    usable = 0
    for k in range(200):
        sample = rc.simulate_rds(reference_net,
                                 rc.RdsDesign(target_n=246, n_seeds=8, rng_seed=5000 + k))
        try:
            est = bootstrap_ci(sample, BootstrapPlan(replicates=400, rng_seed=6000 + k),
                               total_statistic("group", reference.GROUP_A, n_b))
        except EstimatorUndefinedError:
            continue  # counted against coverage below
        usable += 1
        covered += int(est.ci_low <= truth <= est.ci_high)
    coverage = covered / 200.0  # failures count as non-coverage
    ok = coverage >= 0.85
    _report(8, ok, f"tree-bootstrap 95% CI covered truth {truth} in {covered}/200 "
                   f"replicates ({usable} usable) -> {coverage:.3f} (want >= 0.85)")


# -- 9: manifest replay determinism ----------------------------------------------


def _assert_replay_identical(tmp_path, name, argv):
    first = tmp_path / name
    assert cli.main(argv + ["--out-dir", str(first)]) == 0
    second = tmp_path / (name + "_replay")
    assert cli.main(["replay", str(first / "manifest.json"),
                     "--out-dir", str(second)]) == 0
    for fname in sorted(os.listdir(first)):
        a = (first / fname).read_bytes()
        b = (second / fname).read_bytes()
        assert a == b, f"{name}/{fname} differs under replay"
    return len(os.listdir(first))


def test_criterion_9_replay_determinism(tmp_path):
    try:
        n_files = _run_all_pipelines(tmp_path)
    except AssertionError as exc:
        _report(9, False, str(exc))
        return
    _report(9, True, f"5 pipelines replayed byte-identically ({n_files} files compared)")


def _run_all_pipelines(tmp_path) -> int:
    n_files = 0
    # desk-size network: edges-only model dense enough for downstream pipelines
    model_path = tmp_path / "model.json"
    ergm.ErgmModel([ergm.edges()], np.array([math.log(0.1 / 0.9)])).to_json(model_path)
    net_args = ["simulate-network", "--n", "80", "--n-group-a", "30",
                "--seed", "21", "--model", str(model_path)]
    net_dir = tmp_path / "net"
    assert cli.main(net_args + ["--out-dir", str(net_dir)]) == 0
    n_files += _assert_replay_identical(tmp_path, "network", list(net_args))
    rds_dir = tmp_path / "rds"
    assert cli.main(["simulate-rds", "--out-dir", str(rds_dir),
                     "--edges", str(net_dir / "edges.csv"),
                     "--nodes", str(net_dir / "nodes.csv"),
                     "--target-n", "50", "--n-seeds", "5", "--seed", "8"]) == 0
    n_files += _assert_replay_identical(
        tmp_path, "rds2",
        ["simulate-rds", "--edges", str(net_dir / "edges.csv"),
         "--nodes", str(net_dir / "nodes.csv"),
         "--target-n", "50", "--n-seeds", "5", "--seed", "8"])
    n_files += _assert_replay_identical(
        tmp_path, "estimate",
        ["estimate", "--sample", str(rds_dir / "sample.csv"),
         "--shelter-count", "50", "--group-a", "unsheltered",
         "--replicates", "200", "--seed", "4", "--dump-replicates",
         "--demographics", "gender"])
    n_files += _assert_replay_identical(
        tmp_path, "power",
        ["power", "--edges", str(net_dir / "edges.csv"),
         "--nodes", str(net_dir / "nodes.csv"),
         "--fractions", "0.3,0.6", "--replicates", "30",
         "--bootstrap-replicates", "100", "--n-seeds", "4", "--seed", "2"])
    series = tmp_path / "series.csv"
    series.write_text("year,unsheltered,sheltered\n" + "".join(
        f"{2008 + k},{100 + 31 * k + (k % 3) * 13},{900 + 21 * k}\n" for k in range(13)))
    n_files += _assert_replay_identical(
        tmp_path, "forecast",
        ["forecast", "--series", str(series), "--horizon", "2", "--rank-candidates"])
    return n_files
