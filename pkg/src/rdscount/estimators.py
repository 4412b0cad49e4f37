"""Point estimators: Hajek means, the two-group proportion estimator,
total-from-known-subgroup, demographic breakdowns, and delta-method CIs.

All functions are pure over immutable samples and safe to call from
parallel bootstrap workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import EstimatorUndefinedError, InputError
from .rds import RdsSample, cross_recruit_counts


@dataclass
class EstimateWithCi:
    point: float
    se: float
    ci_low: float
    ci_high: float
    level: float = 0.95
    method: str = "analytic"  # bootstrap | delta | analytic
    note: str | None = None

    def __post_init__(self):
        if self.method not in ("bootstrap", "delta", "analytic"):
            raise InputError(f"unknown CI method {self.method!r}")
        if self.se < 0:
            raise InputError("standard error must be >= 0")
        if self.method in ("bootstrap", "delta") and not (
            self.ci_low <= self.point + 1e-12 and self.point - 1e-12 <= self.ci_high
        ):
            raise InputError("confidence interval must bracket the point estimate")

    def to_dict(self) -> dict:
        d = {
            "point": float(self.point),
            "se": float(self.se),
            "ci": [float(self.ci_low), float(self.ci_high)],
            "level": float(self.level),
            "method": self.method,
        }
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class GroupSummary:
    group_a: str
    group_b: str
    mean_degree_a: float
    mean_degree_b: float
    c_ab: float
    c_ba: float
    mu_a: float
    n_a: int = 0
    n_b: int = 0

    @property
    def mu_b(self) -> float:
        return 1.0 - self.mu_a


def z_quantile(level: float) -> float:
    """Two-sided normal quantile (1.959964... at level 0.95)."""
    if not 0 < level < 1:
        raise InputError("level must be in (0, 1)")
    return NormalDist().inv_cdf(0.5 + level / 2.0)


def hajek_mean(z, d) -> float:
    """(sum z_i/d_i) / (sum 1/d_i): inclusion probability taken proportional
    to degree, so the unknown proportionality constant cancels."""
    z = np.asarray(z, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if z.shape != d.shape or z.ndim != 1:
        raise InputError("z and d must be equal-length vectors")
    if z.size == 0:
        raise InputError("empty sample")
    if np.any(d <= 0):
        raise InputError("degrees must be >= 1 (isolates are unsampleable)")
    w = 1.0 / d
    return float(np.sum(z * w) / np.sum(w))


def resolve_group_a(levels: tuple[str, ...], group_a: str | None) -> tuple[str, str]:
    """Pick (group_a, group_b) labels; defaults cover the common encodings."""
    if len(levels) != 2:
        raise EstimatorUndefinedError(
            f"two-group estimator needs exactly two group levels, got {levels}"
        )
    if group_a is None:
        if set(levels) == {"A", "B"}:
            group_a = "A"
        elif "unsheltered" in levels:
            group_a = "unsheltered"
        else:
            raise InputError(f"ambiguous group levels {levels}: pass group_a explicitly")
    if group_a not in levels:
        raise InputError(f"group_a {group_a!r} not among levels {levels}")
    group_b = levels[0] if levels[1] == group_a else levels[1]
    return group_a, group_b


def sh_proportion(sample: RdsSample, group_attr: str = "group",
                  group_a: str | None = None) -> GroupSummary:
    """Two-group proportion estimate mu_A from group mean degrees (Hajek)
    and cross-group recruitment proportions.

    mu_A = dbar_B * c_BA / (dbar_A * c_AB + dbar_B * c_BA)
    """
    levels = sample.group_levels(group_attr)
    group_a, group_b = resolve_group_a(levels, group_a)
    vals = sample.attribute(group_attr)
    in_a = np.asarray(vals == group_a, dtype=bool)
    if not in_a.any() or in_a.all():
        raise EstimatorUndefinedError("both groups must be present among respondents")
    d = sample.degree
    dbar_a = hajek_mean(d[in_a], d[in_a])
    dbar_b = hajek_mean(d[~in_a], d[~in_a])
    r, _ = cross_recruit_counts(sample, group_attr, levels=(group_a, group_b))
    row_a = r[0, 0] + r[0, 1]
    row_b = r[1, 0] + r[1, 1]
    if r[0, 1] == 0 or r[1, 0] == 0:
        raise EstimatorUndefinedError(
            "estimator undefined: no cross-ties observed (fall back to hajek_mean "
            "of the group indicator if appropriate)"
        )
    c_ab = r[0, 1] / row_a
    c_ba = r[1, 0] / row_b
    mu_a = dbar_b * c_ba / (dbar_a * c_ab + dbar_b * c_ba)
    return GroupSummary(group_a, group_b, dbar_a, dbar_b, c_ab, c_ba, mu_a,
                        n_a=int(in_a.sum()), n_b=int((~in_a).sum()))


def total_from_known(mu_a: float, n_b: int) -> float:
    """Size of group A from its proportion and the known size of group B."""
    if n_b < 1:
        raise InputError("n_b must be >= 1")
    if not 0.0 < mu_a < 1.0:
        raise EstimatorUndefinedError("total undefined at boundary: mu_a must be in (0, 1)")
    return n_b * mu_a / (1.0 - mu_a)


def delta_ci_total(mu: EstimateWithCi, n_b: int) -> EstimateWithCi:
    """First-order variance propagation through N_B * mu / (1 - mu)."""
    if not np.isfinite(mu.se):
        raise InputError("mu.se must be finite")
    point = total_from_known(mu.point, n_b)
    se = n_b * mu.se / (1.0 - mu.point) ** 2
    z = z_quantile(mu.level)
    return EstimateWithCi(point, se, point - z * se, point + z * se,
                          level=mu.level, method="delta")


def demographic_breakdown(sample: RdsSample, attr: str, plan=None,
                          group_attr: str = "group",
                          group_a: str | None = None) -> dict[tuple[str, str], EstimateWithCi]:
    """Within each group, the Hajek proportion of every level of ``attr``,
    with bootstrap CIs when a plan is supplied."""
    from .bootstrap import bootstrap_ci  # local import: avoid a cycle

    levels = sample.group_levels(group_attr)
    group_a, group_b = resolve_group_a(levels, group_a)
    attr_levels = sorted({str(v) for v in sample.attribute(attr)})
    out: dict[tuple[str, str], EstimateWithCi] = {}
    for g in (group_a, group_b):
        for lv in attr_levels:
            def stat(s: RdsSample, g=g, lv=lv) -> float:
                in_g = np.asarray(s.attribute(group_attr) == g, dtype=bool)
                if not in_g.any():
                    raise EstimatorUndefinedError(f"group {g!r} absent from resample")
                ind = np.asarray(s.attribute(attr) == lv, dtype=np.float64)
                return hajek_mean(ind[in_g], s.degree[in_g])

            point = stat(sample)
            if point == 0.0:
                out[(g, lv)] = EstimateWithCi(0.0, 0.0, 0.0, 0.0, method="analytic",
                                              note=f"level {lv!r} absent in group {g!r}")
            elif plan is None:
                out[(g, lv)] = EstimateWithCi(point, 0.0, point, point, method="analytic",
                                              note="no bootstrap plan supplied")
            else:
                out[(g, lv)] = bootstrap_ci(sample, plan, stat)
    return out
