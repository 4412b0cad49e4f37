"""RDS recruitment: simulation on a network, sample representation, and
ingestion of field-collected samples.

Samples are stored columnwise (numpy arrays) so estimators and the
bootstrap can run vectorised; ``RdsRespondent`` offers a per-row view.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .graph import AttributedNetwork

CSV_CORE_COLUMNS = ("id", "recruiter_id", "wave", "degree")


@dataclass(frozen=True)
class RdsRespondent:
    id: int
    recruiter: int | None
    wave: int
    reported_degree: int
    attributes: dict[str, str]


@dataclass(frozen=True)
class RdsDesign:
    target_n: int
    n_seeds: int = 8
    seed_rule: str = "degree_proportional"  # degree_proportional | uniform | fixed_list
    coupon_limit: int = 3
    rng_seed: int = 0
    fixed_seeds: tuple[int, ...] = ()
    degree_noise_sigma: float = 0.0  # multiplicative lognormal noise on reported degree

    def __post_init__(self):
        if self.n_seeds < 1:
            raise InputError("n_seeds must be >= 1")
        if self.target_n < self.n_seeds:
            raise InputError("target_n must be >= n_seeds")
        if self.coupon_limit < 1:
            raise InputError("coupon_limit must be >= 1")
        if self.seed_rule not in ("degree_proportional", "uniform", "fixed_list"):
            raise InputError(f"unknown seed_rule {self.seed_rule!r}")
        if self.seed_rule == "fixed_list" and len(self.fixed_seeds) != self.n_seeds:
            raise InputError("fixed_list seed_rule requires n_seeds fixed seed ids")


class RdsSample:
    """Recruitment forest, in recruitment order (recruiters before recruits)."""

    def __init__(self, ids, recruiter_pos, wave, degree,
                 attributes: dict[str, np.ndarray | list[str]],
                 coupon_limit: int = 3, shortfall: bool = False):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.recruiter_pos = np.asarray(recruiter_pos, dtype=np.int64)
        self.wave = np.asarray(wave, dtype=np.int64)
        self.degree = np.asarray(degree, dtype=np.float64)
        self.attributes = {a: np.asarray(v, dtype=object) for a, v in attributes.items()}
        self.coupon_limit = int(coupon_limit)
        self.shortfall = bool(shortfall)
        self._children = None
        self.validate()

    # -- invariants ----------------------------------------------------------

    def validate(self) -> None:
        n = self.n
        if n == 0:
            raise InputError("empty sample")
        for arr in (self.recruiter_pos, self.wave):
            if arr.shape != (n,):
                raise InputError("sample columns must have equal length")
        if self.degree.shape != (n,):
            raise InputError("sample columns must have equal length")
        for a, v in self.attributes.items():
            if v.shape != (n,):
                raise InputError(f"attribute column {a!r} must have length {n}")
        if len(np.unique(self.ids)) != n:
            raise InputError("duplicate respondent ids (sampling is without replacement)")
        if np.any(self.degree < 1):
            raise InputError("reported degree must be >= 1")
        pos = np.arange(n)
        nonseed = self.recruiter_pos >= 0
        if np.any(self.recruiter_pos[nonseed] >= pos[nonseed]):
            raise InputError("recruiter must appear earlier in the sample")
        if np.any(self.wave[~nonseed] != 0):
            raise InputError("seeds must have wave 0")
        if np.any(self.wave[nonseed] != self.wave[self.recruiter_pos[nonseed]] + 1):
            raise InputError("recruit wave must be recruiter wave + 1")
        counts = np.bincount(self.recruiter_pos[nonseed], minlength=n) if nonseed.any() else np.zeros(n, int)
        if np.any(counts > self.coupon_limit):
            raise InputError("a recruiter exceeds the coupon limit")

    # -- accessors -----------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def seed_positions(self) -> np.ndarray:
        return np.flatnonzero(self.recruiter_pos < 0)

    @property
    def seed_ids(self) -> list[int]:
        return [int(x) for x in self.ids[self.seed_positions]]

    @property
    def max_wave(self) -> int:
        return int(self.wave.max())

    def children_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(offsets, children) arrays: positions recruited by each respondent."""
        if self._children is None:
            n = self.n
            nonseed = np.flatnonzero(self.recruiter_pos >= 0)
            counts = np.bincount(self.recruiter_pos[nonseed], minlength=n)
            offsets = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            children = np.empty(offsets[-1], dtype=np.int64)
            cursor = offsets[:-1].copy()
            for p in nonseed:  # sample order, so children stay ordered
                r = self.recruiter_pos[p]
                children[cursor[r]] = p
                cursor[r] += 1
            self._children = (offsets, children)
        return self._children

    def respondent(self, pos: int) -> RdsRespondent:
        r = self.recruiter_pos[pos]
        return RdsRespondent(
            id=int(self.ids[pos]),
            recruiter=None if r < 0 else int(self.ids[r]),
            wave=int(self.wave[pos]),
            reported_degree=int(self.degree[pos]),
            attributes={a: str(v[pos]) for a, v in self.attributes.items()},
        )

    def respondents(self):
        return [self.respondent(p) for p in range(self.n)]

    def attribute(self, attr: str) -> np.ndarray:
        if attr not in self.attributes:
            raise InputError(f"unknown attribute {attr!r}")
        return self.attributes[attr]

    def group_levels(self, attr: str = "group") -> tuple[str, ...]:
        vals = self.attribute(attr)
        seen: dict[str, None] = {}
        for v in vals:
            seen.setdefault(str(v), None)
        return tuple(sorted(seen))

    def take(self, positions: np.ndarray, recruiter_pos: np.ndarray, wave: np.ndarray,
             new_ids: np.ndarray | None = None, shortfall: bool | None = None) -> "RdsSample":
        """Build a sample from rows of this one (used by filters and resampling)."""
        positions = np.asarray(positions, dtype=np.int64)
        return RdsSample(
            ids=self.ids[positions] if new_ids is None else new_ids,
            recruiter_pos=recruiter_pos,
            wave=wave,
            degree=self.degree[positions],
            attributes={a: v[positions] for a, v in self.attributes.items()},
            coupon_limit=self.coupon_limit,
            shortfall=self.shortfall if shortfall is None else shortfall,
        )

    def __repr__(self):
        return (f"RdsSample(n={self.n}, seeds={len(self.seed_positions)}, "
                f"max_wave={self.max_wave}, shortfall={self.shortfall})")


# -- simulation ---------------------------------------------------------------


def _draw_seeds(net: AttributedNetwork, design: RdsDesign, rng: np.random.Generator) -> np.ndarray:
    deg = net.degrees
    eligible = np.flatnonzero(deg > 0)
    if design.seed_rule == "fixed_list":
        seeds = np.asarray(design.fixed_seeds, dtype=np.int64)
        for s in seeds:
            net._check_node(s)
        if len(np.unique(seeds)) != len(seeds):
            raise InputError("fixed seed list contains duplicates")
        return seeds
    if len(eligible) == 0:
        raise InputError("network has no recruitable nodes")
    if len(eligible) < design.n_seeds:
        raise InputError("network has fewer non-isolate nodes than n_seeds")
    if design.seed_rule == "uniform":
        return rng.choice(eligible, size=design.n_seeds, replace=False)
    p = deg[eligible] / deg[eligible].sum()
    return rng.choice(eligible, size=design.n_seeds, replace=False, p=p)


def simulate_rds(net: AttributedNetwork, design: RdsDesign) -> RdsSample:
    """Breadth-ordered (FIFO frontier) recruitment: each respondent recruits
    up to ``coupon_limit`` uniformly random not-yet-sampled neighbors.

    Stops at ``target_n``; exhaustion before that sets the shortfall flag.
    Deterministic given ``design.rng_seed``.
    """
    rng = np.random.default_rng(design.rng_seed)
    seeds = _draw_seeds(net, design, rng)

    sampled = np.zeros(net.node_count, dtype=bool)
    ids: list[int] = []
    recruiter_pos: list[int] = []
    wave: list[int] = []
    for s in seeds:
        sampled[s] = True
        ids.append(int(s))
        recruiter_pos.append(-1)
        wave.append(0)

    head = 0
    while head < len(ids) and len(ids) < design.target_n:
        u = ids[head]
        nbrs = net.neighbors(u)
        avail = nbrs[~sampled[nbrs]]
        if len(avail):
            k = min(design.coupon_limit, len(avail), design.target_n - len(ids))
            picks = rng.choice(avail, size=k, replace=False) if k < len(avail) else avail.copy()
            for v in picks:
                sampled[v] = True
                ids.append(int(v))
                recruiter_pos.append(head)
                wave.append(wave[head] + 1)
        head += 1

    shortfall = len(ids) < design.target_n
    ids_arr = np.asarray(ids, dtype=np.int64)
    degree = net.degrees[ids_arr].astype(np.float64)
    if design.degree_noise_sigma > 0:
        noise = rng.lognormal(mean=0.0, sigma=design.degree_noise_sigma, size=len(ids_arr))
        degree = np.maximum(1, np.rint(degree * noise))
    attributes = {}
    for a in net.schema.names:
        levels = net.schema.levels[a]
        codes = net.attribute_codes(a)[ids_arr]
        attributes[a] = np.array([levels[c] for c in codes], dtype=object)
    return RdsSample(ids_arr, recruiter_pos, wave, degree, attributes,
                     coupon_limit=design.coupon_limit, shortfall=shortfall)


# -- structural operations ------------------------------------------------------


def cross_recruit_counts(sample: RdsSample, attr: str = "group",
                         levels: tuple[str, str] | None = None) -> tuple[np.ndarray, tuple[str, str]]:
    """2x2 matrix r[X][Y]: recruitment edges from a group-X recruiter to a
    group-Y recruit.  Seeds contribute no incoming edge."""
    vals = sample.attribute(attr)
    if levels is None:
        lv = sample.group_levels(attr)
        if len(lv) > 2:
            raise InputError(f"attribute {attr!r} has more than two levels: {lv}")
        if len(lv) == 1:
            lv = (lv[0], None)  # second row/col stays zero
        levels = lv  # type: ignore[assignment]
    is_b = vals == levels[1]
    if levels[1] is not None and not np.all(is_b | (vals == levels[0])):
        raise InputError(f"value outside declared levels {levels} for attribute {attr!r}")
    code = np.asarray(is_b, dtype=np.int64)
    nonseed = np.flatnonzero(sample.recruiter_pos >= 0)
    if nonseed.size == 0:
        return np.zeros((2, 2), dtype=np.int64), levels  # type: ignore[return-value]
    x = code[sample.recruiter_pos[nonseed]]
    y = code[nonseed]
    r = np.bincount(2 * x + y, minlength=4).reshape(2, 2)
    return r, levels  # type: ignore[return-value]


def drop_early_waves(sample: RdsSample, w: int) -> RdsSample:
    """Remove respondents with wave < w; wave-w respondents become seeds."""
    if w < 0:
        raise InputError("w must be >= 0")
    if w == 0:
        return sample
    keep = np.flatnonzero(sample.wave >= w)
    if keep.size == 0:
        raise InputError("empty sample: all respondents removed")
    remap = -np.ones(sample.n, dtype=np.int64)
    remap[keep] = np.arange(keep.size)
    old_rec = sample.recruiter_pos[keep]
    new_rec = np.where(sample.wave[keep] == w, -1, remap[old_rec])
    return sample.take(keep, new_rec, sample.wave[keep] - w)


# -- I/O ------------------------------------------------------------------------


def write_rds_csv(sample: RdsSample, path) -> None:
    attrs = list(sample.attributes)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(CSV_CORE_COLUMNS) + attrs)
        for p in range(sample.n):
            r = sample.recruiter_pos[p]
            w.writerow([
                int(sample.ids[p]),
                "" if r < 0 else int(sample.ids[r]),
                int(sample.wave[p]),
                int(sample.degree[p]) if float(sample.degree[p]).is_integer() else float(sample.degree[p]),
            ] + [str(sample.attributes[a][p]) for a in attrs])


def read_rds_csv(path, coupon_limit: int | None = None) -> RdsSample:
    """Ingest a field sample.  Self-reported degrees are accepted as-is.

    Extra columns beyond the core four are carried as attributes.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(CSV_CORE_COLUMNS) <= set(reader.fieldnames):
            raise InputError(f"{path}: RDS CSV needs columns {','.join(CSV_CORE_COLUMNS)}")
        attrs = [c for c in reader.fieldnames if c not in CSV_CORE_COLUMNS]
        rows = list(reader)
    if not rows:
        raise InputError(f"{path}: empty sample")
    errors = []
    ids, rec_ids, wave, degree = [], [], [], []
    attributes: dict[str, list[str]] = {a: [] for a in attrs}
    for lineno, r in enumerate(rows, start=2):
        try:
            ids.append(int(r["id"]))
            rec_ids.append(None if (r["recruiter_id"] or "").strip() == "" else int(r["recruiter_id"]))
            wave.append(int(r["wave"]))
            degree.append(float(r["degree"]))
        except (TypeError, ValueError) as exc:
            errors.append(f"{path}:{lineno}: {exc}")
            continue
        for a in attrs:
            attributes[a].append(r[a])
    if errors:
        raise InputError("; ".join(errors))
    pos_of_id = {}
    recruiter_pos = []
    for p, (i, ri) in enumerate(zip(ids, rec_ids)):
        if ri is None:
            recruiter_pos.append(-1)
        else:
            if ri not in pos_of_id:
                raise InputError(f"{path}: row {p + 2}: recruiter {ri} not seen earlier in file")
            recruiter_pos.append(pos_of_id[ri])
        pos_of_id[i] = p
    if coupon_limit is None:
        counts = np.bincount([x for x in recruiter_pos if x >= 0], minlength=len(ids)) if ids else []
        coupon_limit = max(3, int(np.max(counts)) if len(counts) else 0)
    return RdsSample(ids, recruiter_pos, wave, degree,
                     {a: np.array(v, dtype=object) for a, v in attributes.items()},
                     coupon_limit=coupon_limit)
