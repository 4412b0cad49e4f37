"""Tree (chain-respecting) bootstrap for standard errors and percentile
confidence intervals of any statistic over an RDS sample.

Replicates draw from independent RNG streams derived from
(rng_seed, replicate_index), so results do not depend on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _mcmc
from .errors import EstimatorUndefinedError, InputError
from .estimators import EstimateWithCi
from .rds import RdsSample


@dataclass(frozen=True)
class BootstrapPlan:
    replicates: int = 1000
    level: float = 0.95
    rng_seed: int = 0
    scheme: str = "tree"  # tree | respondent_iid

    def __post_init__(self):
        if self.replicates < 100:
            raise InputError("need at least 100 replicates for CI output")
        if not 0 < self.level < 1:
            raise InputError("level must be in (0, 1)")
        if self.scheme not in ("tree", "respondent_iid"):
            raise InputError(f"unknown bootstrap scheme {self.scheme!r}")


def _derive_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master & (2**63 - 1), index]).generate_state(1, np.uint64)[0])


def _tree_indices(sample: RdsSample, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    offsets, children = sample.children_csr()
    seed_positions = sample.seed_positions
    max_out = 4 * sample.n + 64
    while True:
        orig_idx = np.empty(max_out, dtype=np.int64)
        recruiter_pos = np.empty(max_out, dtype=np.int64)
        wave = np.empty(max_out, dtype=np.int64)
        state = np.array([np.uint64(seed)], dtype=np.uint64)
        m = _mcmc.tree_resample(seed_positions, offsets, children, len(seed_positions),
                                state, orig_idx, recruiter_pos, wave, max_out)
        if m >= 0:
            return orig_idx[:m], recruiter_pos[:m], wave[:m]
        max_out *= 4


def resample_tree(sample: RdsSample, rng: np.random.Generator) -> RdsSample:
    """One tree resample: seeds with replacement from the seed set, then each
    included respondent's recruits with replacement from that respondent's
    original recruit set.  Ids are re-keyed since rows may repeat."""
    seed = int(rng.integers(0, 2**63 - 1, dtype=np.int64))
    orig_idx, recruiter_pos, wave = _tree_indices(sample, seed)
    return sample.take(orig_idx, recruiter_pos, wave,
                       new_ids=np.arange(len(orig_idx), dtype=np.int64))


def _iid_indices(sample: RdsSample, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, sample.n, size=sample.n)
    zeros = np.zeros(sample.n, dtype=np.int64)
    return idx, zeros - 1, zeros


def resample_iid(sample: RdsSample, rng: np.random.Generator) -> RdsSample:
    """Comparison scheme: respondents resampled iid; chain structure dropped
    (every row becomes a wave-0 seed)."""
    seed = int(rng.integers(0, 2**63 - 1, dtype=np.int64))
    idx, rec, wave = _iid_indices(sample, seed)
    return sample.take(idx, rec, wave, new_ids=np.arange(len(idx), dtype=np.int64))


def bootstrap_ci(sample: RdsSample, plan: BootstrapPlan, statistic,
                 return_replicates: bool = False):
    """Percentile bootstrap CI of ``statistic`` (RdsSample -> float).

    A replicate on which the statistic raises EstimatorUndefinedError is
    recorded and redrawn, up to 10 * replicates attempts in total.
    """
    point = float(statistic(sample))
    values = np.empty(plan.replicates, dtype=np.float64)
    indices = _tree_indices if plan.scheme == "tree" else _iid_indices
    got = 0
    failures = 0
    attempts = 0
    max_attempts = 10 * plan.replicates
    while got < plan.replicates:
        if attempts >= max_attempts:
            raise EstimatorUndefinedError("statistic undefined on resamples")
        seed = _derive_seed(plan.rng_seed, attempts)
        attempts += 1
        orig_idx, rec, wave = indices(sample, seed)
        rep = sample.take(orig_idx, rec, wave,
                          new_ids=np.arange(len(orig_idx), dtype=np.int64))
        try:
            values[got] = float(statistic(rep))
        except EstimatorUndefinedError:
            failures += 1
            if failures > 0.9 * max_attempts:
                raise EstimatorUndefinedError("statistic undefined on resamples") from None
            continue
        got += 1
    se = float(np.std(values, ddof=1))
    alpha = 1.0 - plan.level
    lo, hi = np.quantile(values, [alpha / 2.0, 1.0 - alpha / 2.0])
    est = EstimateWithCi(point, se, min(float(lo), point), max(float(hi), point),
                         level=plan.level, method="bootstrap")
    if return_replicates:
        return est, values
    return est


def write_replicates_csv(values: np.ndarray, path) -> None:
    """Replicate dump for external diagnostics."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("replicate,value\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{float(v)!r}\n")
