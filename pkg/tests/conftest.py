"""Shared fixtures and the acceptance-summary terminal hook."""

import numpy as np
import pytest

import rdscount as rc
from rdscount import ergm, reference

# Acceptance tests append "ACCEPTANCE k: PASS/FAIL - detail" lines here; the
# terminal-summary hook below prints them so the one-line-per-criterion report
# survives pytest's output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def house_net():
    """5 nodes: path-ish graph with one isolate (node 4).

    Edges: 0-1, 0-2, 1-2, 2-3.  Groups: 0,1 = A; 2,3,4 = B.
    """
    edges = np.array([[0, 1], [0, 2], [1, 2], [2, 3]], dtype=np.int64)
    return rc.AttributedNetwork(5, edges, {"group": ["A", "A", "B", "B", "B"]})


@pytest.fixture
def line_net():
    """Path 0-1-2-3 with alternating groups, no isolates."""
    edges = np.array([[0, 1], [1, 2], [2, 3]], dtype=np.int64)
    return rc.AttributedNetwork(4, edges, {"group": ["A", "B", "A", "B"]})


@pytest.fixture(scope="session")
def reference_net():
    """One realized draw from the bundled reference model (N=2035)."""
    attrs = reference.generate_attributes(rng_seed=1)
    model = reference.reference_model()
    n = reference.REFERENCE_N
    ctl = ergm.SimulationControl(burn_in=10 * n * (n - 1) // 2, thin=1, rng_seed=7)
    return ergm.simulate(model, n, attrs, ctl, schema=reference.REFERENCE_SCHEMA)


def make_chain_sample(groups, degrees, recruiter_pos=None, waves=None, coupon_limit=3):
    """Hand-built RdsSample: by default one seed recruiting a single chain."""
    n = len(groups)
    if recruiter_pos is None:
        recruiter_pos = [-1] + list(range(n - 1))
    if waves is None:
        waves = [0] + [w + 1 for w in range(n - 1)]
    return rc.RdsSample(
        ids=np.arange(n, dtype=np.int64),
        recruiter_pos=np.asarray(recruiter_pos, dtype=np.int64),
        wave=np.asarray(waves, dtype=np.int64),
        degree=np.asarray(degrees, dtype=np.float64),
        attributes={"group": np.asarray([str(g) for g in groups], dtype=object)},
        coupon_limit=coupon_limit,
    )
