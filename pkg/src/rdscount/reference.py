"""Reference generative model and attribute margins for the bundled
desk-scale pipelines: a 2,035-person population with 597 unsheltered and
1,438 sheltered people, and the published coefficient set for its ERGM.

Margins are configurable via CSV (``attribute,level,proportion`` with an
optional ``group`` column for group-specific splits).
"""

from __future__ import annotations

import csv

import numpy as np

from . import ergm
from .errors import InputError
from .graph import NodeAttributeSchema

REFERENCE_N = 2035
REFERENCE_UNSHELTERED = 597
REFERENCE_SHELTERED = 1438

GROUP_A = "unsheltered"
GROUP_B = "sheltered"

REFERENCE_SCHEMA = NodeAttributeSchema(
    {
        "group": [GROUP_A, GROUP_B],
        "gender": ["Female", "Male"],
        "race": ["White", "Black", "LatinX", "Asian", "AIAN", "NHPI"],
        "age_band": ["18-24", "over-24"],
        "season": ["Summer", "Fall", "Winter", "Spring"],
    }
)

# Fixed density offset plus edges, degree-count, seasonal/race/gender
# node-factor, and gender-homophily coefficients of the reference model.
REFERENCE_THETA = {
    "offset_edges": -6.342,
    "edges": 2.037,
    "degree2": 0.338,
    "degree3": 0.117,
    "degree4": 0.854,
    "degree5": 1.300,
    "degree6": 1.239,
    "nodefactor.season.Fall": -0.881,
    "nodefactor.season.Winter": -0.867,
    "nodefactor.season.Spring": -0.804,
    "nodefactor.race.Black": -0.016,
    "nodefactor.race.LatinX": -0.731,
    "nodefactor.race.Asian": 0.308,
    "nodefactor.race.AIAN": -0.202,
    "nodefactor.race.NHPI": -0.552,
    "nodefactor.gender.Male": 0.277,
    "nodematch.gender": -0.423,
}

# Group-specific margins from the published point-in-time splits
# (female/young-adult shares differ by shelter status); race and season
# margins are package defaults, overridable via CSV.
DEFAULT_MARGINS: dict[str, dict[str, dict[str, float]]] = {
    "gender": {
        GROUP_B: {"Female": 0.275, "Male": 0.725},
        GROUP_A: {"Female": 0.233, "Male": 0.767},
    },
    "age_band": {
        GROUP_B: {"18-24": 0.076, "over-24": 0.924},
        GROUP_A: {"18-24": 0.029, "over-24": 0.971},
    },
    "race": {
        "*": {"White": 0.50, "Black": 0.40, "LatinX": 0.05,
              "Asian": 0.02, "AIAN": 0.02, "NHPI": 0.01},
    },
    "season": {
        "*": {"Summer": 0.25, "Fall": 0.25, "Winter": 0.25, "Spring": 0.25},
    },
}


def reference_model() -> ergm.ErgmModel:
    """The published model: offset + edges + degree(2..6) + season/race/gender
    node factors + gender homophily, with the offset coefficient held fixed."""
    terms = [ergm.offset_edges(), ergm.edges()]
    theta = [REFERENCE_THETA["offset_edges"], REFERENCE_THETA["edges"]]
    for k in range(2, 7):
        terms.append(ergm.degree(k))
        theta.append(REFERENCE_THETA[f"degree{k}"])
    for attr in ("season", "race", "gender"):
        levels = REFERENCE_SCHEMA.levels[attr]
        ref = REFERENCE_SCHEMA.reference[attr]
        for lv in levels:
            if lv == ref:
                continue
            key = f"nodefactor.{attr}.{lv}"
            if key in REFERENCE_THETA:
                terms.append(ergm.nodefactor(attr, lv))
                theta.append(REFERENCE_THETA[key])
    terms.append(ergm.nodematch("gender"))
    theta.append(REFERENCE_THETA["nodematch.gender"])
    return ergm.ErgmModel(terms, np.asarray(theta))


def read_margins_csv(path) -> dict[str, dict[str, dict[str, float]]]:
    """Margins CSV: attribute,level,proportion[,group]; '*' or empty group
    means the margin applies to both groups."""
    out: dict[str, dict[str, dict[str, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"attribute", "level", "proportion"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise InputError(f"{path}: margins CSV needs columns attribute,level,proportion")
        for lineno, row in enumerate(reader, start=2):
            grp = (row.get("group") or "*").strip() or "*"
            try:
                p = float(row["proportion"])
            except (TypeError, ValueError):
                raise InputError(f"{path}:{lineno}: bad proportion") from None
            out.setdefault(row["attribute"], {}).setdefault(grp, {})[row["level"]] = p
    for attr, groups in out.items():
        for grp, marg in groups.items():
            total = sum(marg.values())
            if abs(total - 1.0) > 1e-6:
                raise InputError(f"{path}: margins for {attr!r}/{grp!r} sum to {total}, not 1")
    return out


def _exact_counts(n: int, margin: dict[str, float]) -> dict[str, int]:
    """Largest-remainder apportionment so counts hit the margins exactly."""
    raw = {lv: n * p for lv, p in margin.items()}
    counts = {lv: int(x) for lv, x in raw.items()}
    short = n - sum(counts.values())
    for lv in sorted(raw, key=lambda lv: raw[lv] - counts[lv], reverse=True)[:short]:
        counts[lv] += 1
    return counts


def generate_attributes(n: int = REFERENCE_N, n_group_a: int = REFERENCE_UNSHELTERED,
                        margins: dict | None = None, rng_seed: int = 0,
                        schema: NodeAttributeSchema = REFERENCE_SCHEMA) -> dict[str, list[str]]:
    """Node attribute table with exact group counts and per-group margins
    matched by largest-remainder rounding; assignment order shuffled."""
    if not 0 < n_group_a < n:
        raise InputError("n_group_a must be strictly between 0 and n")
    margins = margins if margins is not None else DEFAULT_MARGINS
    rng = np.random.default_rng(rng_seed)
    group_a, group_b = schema.levels["group"][0], schema.levels["group"][1]
    group = np.array([group_a] * n_group_a + [group_b] * (n - n_group_a), dtype=object)
    rng.shuffle(group)
    attrs: dict[str, list[str]] = {"group": [str(g) for g in group]}
    for attr in schema.names:
        if attr == "group":
            continue
        if attr not in margins:
            raise InputError(f"no margins supplied for attribute {attr!r}")
        values = np.empty(n, dtype=object)
        groups_spec = margins[attr]
        for g, size in ((group_a, n_group_a), (group_b, n - n_group_a)):
            marg = groups_spec.get(g, groups_spec.get("*"))
            if marg is None:
                raise InputError(f"margins for {attr!r} cover neither {g!r} nor '*'")
            unknown = set(marg) - set(schema.levels[attr])
            if unknown:
                raise InputError(f"margin levels {unknown} not in schema for {attr!r}")
            counts = _exact_counts(size, marg)
            pool = np.array(sum(([lv] * c for lv, c in counts.items()), []), dtype=object)
            rng.shuffle(pool)
            values[group == g] = pool
        attrs[attr] = [str(v) for v in values]
    return attrs
