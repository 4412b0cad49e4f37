import math

import numpy as np
import pytest

import rdscount as rc
from rdscount import ergm
from rdscount.errors import InputError


def triangle_net():
    # triangle plus a pendant: degrees 2,2,3,1
    edges = np.array([[0, 1], [0, 2], [1, 2], [2, 3]], dtype=np.int64)
    return rc.AttributedNetwork(4, edges, {"group": ["A", "A", "B", "B"]})


STAT_TERMS = [ergm.edges(), ergm.degree(1), ergm.degree(2), ergm.degree(3),
              ergm.nodefactor("group", "B"), ergm.nodematch("group")]


def test_sufficient_stats_hand_computed():
    net = triangle_net()
    stats = ergm.sufficient_stats(net, STAT_TERMS)
    # edges=4; degree counts: one node of degree 1, two of degree 2, one of 3;
    # nodefactor counts edge endpoints in level B: (0-2),(1-2) 1 each, (2-3) 2;
    # nodematch counts same-group edges: 0-1 and 2-3.
    assert stats.tolist() == [4.0, 1.0, 2.0, 1.0, 4.0, 2.0]


def test_offset_edges_contributes_like_edges():
    net = triangle_net()
    s = ergm.sufficient_stats(net, [ergm.offset_edges()])
    assert s.tolist() == [4.0]


def test_change_stats_match_recount_exhaustively():
    """Incremental change statistics equal stats(toggled) - stats(original)
    for every dyad of random graphs up to N = 12."""
    rng = np.random.default_rng(3)
    from rdscount.graph import NodeAttributeSchema
    schema = NodeAttributeSchema({"group": ["A", "B"]})
    for n in range(2, 13):
        for _ in range(3):
            mask = rng.random((n, n)) < 0.3
            edges = [(i, j) for i in range(n) for j in range(i + 1, n) if mask[i, j]]
            groups = [("A", "B")[k] for k in rng.integers(0, 2, size=n)]
            net = rc.AttributedNetwork(n, np.array(edges, dtype=np.int64).reshape(-1, 2),
                                       {"group": groups}, schema=schema)
            edge_set = {tuple(e) for e in net.edges.tolist()}
            for i in range(n):
                for j in range(i + 1, n):
                    # change score: s(graph with ij) - s(graph without ij)
                    with_ij = sorted(edge_set | {(i, j)})
                    without_ij = sorted(edge_set - {(i, j)})
                    net_plus = rc.AttributedNetwork(
                        n, np.array(with_ij, dtype=np.int64).reshape(-1, 2),
                        {"group": groups}, schema=schema)
                    net_minus = rc.AttributedNetwork(
                        n, np.array(without_ij, dtype=np.int64).reshape(-1, 2),
                        {"group": groups}, schema=schema)
                    expected = (ergm.sufficient_stats(net_plus, STAT_TERMS)
                                - ergm.sufficient_stats(net_minus, STAT_TERMS))
                    got = ergm.change_stats(net, STAT_TERMS, i, j)
                    assert np.allclose(got, expected), (n, i, j)


def test_log_odds_matches_theta_dot_change():
    net = triangle_net()
    theta = np.array([0.5, -0.2, 0.3, 0.1, -0.4, 0.7])
    model = ergm.ErgmModel(list(STAT_TERMS), theta)
    for i, j in [(0, 3), (1, 3), (0, 1)]:
        expected = float(theta @ ergm.change_stats(net, STAT_TERMS, i, j))
        assert ergm.log_odds_of_toggle(model, net, i, j) == pytest.approx(expected)


def test_model_json_round_trip(tmp_path):
    from rdscount import reference
    model = reference.reference_model()
    path = tmp_path / "model.json"
    model.to_json(path)
    back = ergm.ErgmModel.from_json(path)
    assert [t.label() for t in back.terms] == [t.label() for t in model.terms]
    assert np.allclose(back.theta, model.theta)
    assert back.fixed.tolist() == model.fixed.tolist()


def test_simulate_is_deterministic():
    attrs = {"group": ["A"] * 15 + ["B"] * 15}
    model = ergm.ErgmModel([ergm.edges()], np.array([-1.0]))
    ctl = ergm.SimulationControl(burn_in=5000, thin=1, rng_seed=11)
    a = ergm.simulate(model, 30, attrs, ctl)
    b = ergm.simulate(model, 30, attrs, ctl)
    assert a.edges.tolist() == b.edges.tolist()
    c = ergm.simulate(model, 30, attrs, ergm.SimulationControl(5000, 1, 12))
    assert c.edges.tolist() != a.edges.tolist()


def test_edges_only_density_calibration():
    """theta = logit(p) must give mean edge count ~ p * dyads."""
    p, n = 0.1, 40
    dyads = n * (n - 1) // 2
    model = ergm.ErgmModel([ergm.edges()], np.array([math.log(p / (1 - p))]))
    counts = ergm.simulate_edge_counts(
        model, n, {"group": ["A"] * n},
        ergm.SimulationControl(burn_in=10 * dyads, thin=2 * dyads, rng_seed=4), 100)
    mean = float(np.mean(counts))
    se = float(np.std(counts, ddof=1) / math.sqrt(len(counts)))
    assert abs(mean - p * dyads) <= 4 * se


def test_fit_moment_matching_recovers_density():
    p, n = 0.2, 120
    dyads = n * (n - 1) // 2
    ctl = ergm.SimulationControl(burn_in=4 * dyads, thin=dyads, rng_seed=5)
    res = ergm.fit_moment_matching(
        [p * dyads], [ergm.edges()], n, {"group": ["A"] * n}, ctl,
        theta0=[math.log(p / (1 - p)) - 0.8],  # start well away from truth
        max_iter=60, draws_per_iter=10)
    assert res.converged
    assert res.model.theta[0] == pytest.approx(math.log(p / (1 - p)), abs=0.2)


def test_fit_respects_fixed_offset():
    n = 40
    ctl = ergm.SimulationControl(burn_in=2 * n * n, thin=n * n, rng_seed=6)
    res = ergm.fit_moment_matching(
        [60.0], [ergm.offset_edges(), ergm.edges()], n, {"group": ["A"] * n}, ctl,
        fixed_theta=[-6.342], max_iter=40, draws_per_iter=8)
    assert res.model.theta[0] == -6.342
    assert res.model.fixed.tolist() == [True, False]


def test_control_validation():
    with pytest.raises(InputError):
        ergm.SimulationControl(burn_in=-1, thin=1)
    with pytest.raises(InputError):
        ergm.SimulationControl(burn_in=0, thin=0)


def test_term_validation():
    with pytest.raises(InputError):
        ergm.degree(-1)
    with pytest.raises(InputError):
        ergm.ErgmModel([ergm.edges()], np.array([0.0, 1.0]))  # length mismatch
