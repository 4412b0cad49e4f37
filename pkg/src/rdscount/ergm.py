"""Exponential-family random graph model: sufficient statistics,
Metropolis edge-toggle simulation, and a moment-matching fit.

Term kinds: ``edges``, ``degree(k)``, ``nodefactor(attr, level)``,
``nodematch(attr)``, and ``offset_edges`` (same statistic as ``edges``
but its coefficient is held fixed during fitting).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _mcmc
from .errors import InputError
from .graph import AttributedNetwork, NodeAttributeSchema

TERM_KINDS = ("edges", "degree", "nodefactor", "nodematch", "offset_edges")


@dataclass(frozen=True)
class ErgmTerm:
    kind: str
    k: int | None = None
    attr: str | None = None
    level: str | None = None

    def __post_init__(self):
        if self.kind not in TERM_KINDS:
            raise InputError(f"unknown ERGM term kind {self.kind!r}")
        if self.kind == "degree" and (self.k is None or self.k < 1):
            raise InputError("degree term requires k >= 1")
        if self.kind == "nodefactor" and (self.attr is None or self.level is None):
            raise InputError("nodefactor term requires attr and level")
        if self.kind == "nodematch" and self.attr is None:
            raise InputError("nodematch term requires attr")

    def label(self) -> str:
        if self.kind == "degree":
            return f"degree{self.k}"
        if self.kind == "nodefactor":
            return f"nodefactor.{self.attr}.{self.level}"
        if self.kind == "nodematch":
            return f"nodematch.{self.attr}"
        return self.kind


def edges() -> ErgmTerm:
    return ErgmTerm("edges")


def offset_edges() -> ErgmTerm:
    return ErgmTerm("offset_edges")


def degree(k: int) -> ErgmTerm:
    return ErgmTerm("degree", k=k)


def nodefactor(attr: str, level: str) -> ErgmTerm:
    return ErgmTerm("nodefactor", attr=attr, level=level)


def nodematch(attr: str) -> ErgmTerm:
    return ErgmTerm("nodematch", attr=attr)


@dataclass
class ErgmModel:
    terms: list[ErgmTerm]
    theta: np.ndarray
    fixed: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.shape != (len(self.terms),):
            raise InputError("theta length must match number of terms")
        if self.fixed is None:
            self.fixed = np.array([t.kind == "offset_edges" for t in self.terms])
        self.fixed = np.asarray(self.fixed, dtype=bool)
        if self.fixed.shape != (len(self.terms),):
            raise InputError("fixed mask length must match number of terms")

    def to_json(self, path=None) -> str:
        doc = {
            "terms": [
                {k: v for k, v in (("kind", t.kind), ("k", t.k), ("attr", t.attr), ("level", t.level)) if v is not None}
                for t in self.terms
            ],
            "theta": [float(x) for x in self.theta],
            "fixed": [bool(b) for b in self.fixed],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, source) -> "ErgmModel":
        if hasattr(source, "read"):
            doc = json.load(source)
        elif isinstance(source, str) and source.lstrip().startswith("{"):
            doc = json.loads(source)
        else:
            with open(source, encoding="utf-8") as fh:
                doc = json.load(fh)
        try:
            terms = [ErgmTerm(**t) for t in doc["terms"]]
            theta = np.asarray(doc["theta"], dtype=np.float64)
            fixed = np.asarray(doc.get("fixed", [t.kind == "offset_edges" for t in terms]), dtype=bool)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed ERGM model document: {exc}") from None
        return cls(terms, theta, fixed)


@dataclass(frozen=True)
class SimulationControl:
    burn_in: int
    thin: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.burn_in < 0:
            raise InputError("burn_in must be >= 0")
        if self.thin < 1:
            raise InputError("thin must be >= 1")


def default_control(n: int, rng_seed: int = 0) -> SimulationControl:
    """Conservative defaults: burn 10 passes over the dyads, thin by 2."""
    dyads = n * (n - 1) // 2
    return SimulationControl(burn_in=10 * dyads, thin=2 * dyads, rng_seed=rng_seed)


# -- statistics ------------------------------------------------------------


def _check_terms(terms, schema: NodeAttributeSchema) -> None:
    for t in terms:
        if t.attr is not None:
            schema._check(t.attr)
            if t.level is not None and t.level not in schema.levels[t.attr]:
                raise InputError(f"level {t.level!r} not in attribute {t.attr!r}")


def sufficient_stats(net: AttributedNetwork, terms: list[ErgmTerm]) -> np.ndarray:
    """Sufficient statistic vector of ``net`` for ``terms``."""
    _check_terms(terms, net.schema)
    e = net.edges
    deg = net.degrees
    out = np.empty(len(terms), dtype=np.float64)
    for idx, t in enumerate(terms):
        if t.kind in ("edges", "offset_edges"):
            out[idx] = e.shape[0]
        elif t.kind == "degree":
            out[idx] = int(np.sum(deg == t.k))
        elif t.kind == "nodefactor":
            code = net.schema.level_code(t.attr, t.level)
            codes = net.attribute_codes(t.attr)
            if e.shape[0]:
                out[idx] = int(np.sum(codes[e[:, 0]] == code) + np.sum(codes[e[:, 1]] == code))
            else:
                out[idx] = 0.0
        elif t.kind == "nodematch":
            codes = net.attribute_codes(t.attr)
            out[idx] = int(np.sum(codes[e[:, 0]] == codes[e[:, 1]])) if e.shape[0] else 0.0
    return out


def change_stats(net: AttributedNetwork, terms: list[ErgmTerm], i: int, j: int) -> np.ndarray:
    """s(g+ij) - s(g-ij), computed term by term from the degree cache and
    node attributes, without recounting the full statistic vector."""
    if i == j:
        raise InputError("change statistics are undefined for i == j")
    net._check_node(i)
    net._check_node(j)
    _check_terms(terms, net.schema)
    present = net.has_edge(i, j)
    # degrees in the edge-absent state
    di = net.degree(i) - (1 if present else 0)
    dj = net.degree(j) - (1 if present else 0)
    out = np.empty(len(terms), dtype=np.float64)
    for idx, t in enumerate(terms):
        if t.kind in ("edges", "offset_edges"):
            out[idx] = 1.0
        elif t.kind == "degree":
            d = 0.0
            d += (1.0 if di + 1 == t.k else 0.0) - (1.0 if di == t.k else 0.0)
            d += (1.0 if dj + 1 == t.k else 0.0) - (1.0 if dj == t.k else 0.0)
            out[idx] = d
        elif t.kind == "nodefactor":
            code = net.schema.level_code(t.attr, t.level)
            codes = net.attribute_codes(t.attr)
            out[idx] = float(codes[i] == code) + float(codes[j] == code)
        elif t.kind == "nodematch":
            codes = net.attribute_codes(t.attr)
            out[idx] = float(codes[i] == codes[j])
    return out


def log_odds_of_toggle(model: ErgmModel, net: AttributedNetwork, i: int, j: int) -> float:
    """theta . (s(g+ij) - s(g-ij)): the conditional log odds of the tie."""
    return float(model.theta @ change_stats(net, model.terms, i, j))


# -- simulation ------------------------------------------------------------


def _kernel_inputs(model: ErgmModel, n: int, attrs: dict[str, list[str]], schema: NodeAttributeSchema):
    """Flatten the term list into arrays consumed by the Metropolis kernel."""
    _check_terms(model.terms, schema)
    codes = {}
    for attr in schema.names:
        lut = {lv: k for k, lv in enumerate(schema.levels[attr])}
        values = attrs[attr]
        if len(values) != n:
            raise InputError(f"attribute {attr!r} has {len(values)} values for n={n}")
        codes[attr] = np.array([lut[str(v)] for v in values], dtype=np.int64)
    base = 0.0
    node_static = np.zeros(n, dtype=np.float64)
    degtheta = np.zeros(n + 2, dtype=np.float64)
    match_rows = []
    match_theta = []
    for t, th in zip(model.terms, model.theta):
        if t.kind in ("edges", "offset_edges"):
            base += th
        elif t.kind == "degree":
            if t.k <= n:
                degtheta[t.k] += th
        elif t.kind == "nodefactor":
            code = schema.level_code(t.attr, t.level)
            node_static[codes[t.attr] == code] += th
        elif t.kind == "nodematch":
            match_rows.append(codes[t.attr])
            match_theta.append(th)
    if match_rows:
        match_codes = np.ascontiguousarray(np.stack(match_rows))
        match_theta = np.asarray(match_theta, dtype=np.float64)
    else:
        match_codes = np.empty((0, n), dtype=np.int64)
        match_theta = np.empty(0, dtype=np.float64)
    return base, node_static, match_codes, match_theta, degtheta, codes


class _Chain:
    """Mutable Metropolis chain state over n nodes."""

    def __init__(self, model: ErgmModel, n: int, attrs, schema, rng_seed: int):
        if not np.all(np.isfinite(model.theta)):
            raise InputError("theta must be finite")
        self.n = n
        self.schema = schema
        (self.base, self.node_static, self.match_codes, self.match_theta,
         self.degtheta, self.codes) = _kernel_inputs(model, n, attrs, schema)
        self.attrs = {a: [str(v) for v in attrs[a]] for a in schema.names}
        self.adj = np.zeros((n, n), dtype=np.uint8)
        self.deg = np.zeros(n, dtype=np.int64)
        self.rng_state = np.array([np.uint64(rng_seed)], dtype=np.uint64)

    def advance(self, steps: int) -> None:
        _mcmc.metropolis_steps(self.adj, self.deg, self.base, self.node_static,
                               self.match_codes, self.match_theta, self.degtheta,
                               int(steps), self.rng_state)

    def snapshot(self) -> AttributedNetwork:
        iu = np.triu_indices(self.n, k=1)
        mask = self.adj[iu].astype(bool)
        edges = np.column_stack((iu[0][mask], iu[1][mask]))
        return AttributedNetwork(self.n, edges, self.attrs, schema=self.schema)

    def edge_count(self) -> int:
        return int(self.deg.sum() // 2)


def _resolve_schema(attrs, schema):
    if schema is None:
        from .graph import _infer_schema

        schema = _infer_schema({a: [str(v) for v in vs] for a, vs in attrs.items()})
    return schema


def simulate(model: ErgmModel, n: int, attrs: dict[str, list[str]],
             ctl: SimulationControl, schema: NodeAttributeSchema | None = None) -> AttributedNetwork:
    """One draw: run the uniform-dyad toggle chain for ``burn_in`` proposals
    from the empty graph and return the resulting network."""
    schema = _resolve_schema(attrs, schema)
    chain = _Chain(model, n, attrs, schema, ctl.rng_seed)
    chain.advance(ctl.burn_in)
    return chain.snapshot()


def simulate_many(model: ErgmModel, n: int, attrs: dict[str, list[str]],
                  ctl: SimulationControl, n_draws: int,
                  schema: NodeAttributeSchema | None = None) -> list[AttributedNetwork]:
    """Thinned draws from a single chain: burn in once, then snapshot every
    ``thin`` proposals."""
    schema = _resolve_schema(attrs, schema)
    chain = _Chain(model, n, attrs, schema, ctl.rng_seed)
    chain.advance(ctl.burn_in)
    out = []
    for _ in range(n_draws):
        chain.advance(ctl.thin)
        out.append(chain.snapshot())
    return out


def simulate_edge_counts(model: ErgmModel, n: int, attrs: dict[str, list[str]],
                         ctl: SimulationControl, n_draws: int,
                         schema: NodeAttributeSchema | None = None) -> np.ndarray:
    """Edge counts of thinned draws, without materialising the networks."""
    schema = _resolve_schema(attrs, schema)
    chain = _Chain(model, n, attrs, schema, ctl.rng_seed)
    chain.advance(ctl.burn_in)
    out = np.empty(n_draws, dtype=np.int64)
    for d in range(n_draws):
        chain.advance(ctl.thin)
        out[d] = chain.edge_count()
    return out


# -- moment-matching fit -----------------------------------------------------


@dataclass
class FitResult:
    model: ErgmModel
    converged: bool
    iterations: int
    mean_stats: np.ndarray
    target_stats: np.ndarray


def fit_moment_matching(target_stats, terms: list[ErgmTerm], n: int,
                        attrs: dict[str, list[str]], ctl: SimulationControl,
                        theta0=None, fixed_theta=None,
                        max_iter: int = 80, draws_per_iter: int = 20,
                        a0: float = 0.1, tau: float = 20.0,
                        tol_se: float = 0.5,
                        schema: NodeAttributeSchema | None = None) -> FitResult:
    """Robbins-Monro moment matching: step the free coefficients by
    a_t * (target - simulated mean) / simulated variance until every free
    statistic's simulated mean is within ``tol_se`` standard errors of its
    target.  Non-convergence is reported in the returned flag, not raised.
    """
    schema = _resolve_schema(attrs, schema)
    free = np.array([t.kind != "offset_edges" for t in terms])
    target_stats = np.asarray(target_stats, dtype=np.float64)
    if target_stats.shape != (int(free.sum()),):
        raise InputError("target_stats must match the number of non-offset terms")

    theta = np.zeros(len(terms), dtype=np.float64)
    if fixed_theta is not None:
        fixed_theta = np.asarray(fixed_theta, dtype=np.float64)
        theta[~free] = fixed_theta
    if theta0 is not None:
        theta[free] = np.asarray(theta0, dtype=np.float64)
    else:
        # crude warm start: put the target density on any edges term
        dyads = n * (n - 1) / 2.0
        for pos, t in enumerate(np.flatnonzero(free)):
            if terms[t].kind == "edges":
                p = min(max(target_stats[pos] / dyads, 1.0 / dyads), 1.0 - 1.0 / dyads)
                theta[t] = math.log(p / (1.0 - p))

    seed = ctl.rng_seed
    mean_stats = np.full_like(target_stats, np.nan)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        model = ErgmModel(list(terms), theta.copy(), fixed=~free)
        draws = simulate_many(model, n, attrs,
                              SimulationControl(ctl.burn_in, ctl.thin, seed + it),
                              draws_per_iter, schema=schema)
        stats = np.stack([sufficient_stats(g, list(terms))[free] for g in draws])
        mean_stats = stats.mean(axis=0)
        var = stats.var(axis=0, ddof=1)
        se = np.sqrt(np.maximum(var, 1e-12) / draws_per_iter)
        diff = target_stats - mean_stats
        if np.all(np.abs(diff) <= tol_se * np.maximum(se, 1e-9)):
            converged = True
            break
        a_t = a0 / (1.0 + it / tau)
        theta[free] = theta[free] + a_t * diff / np.maximum(var, 1.0)
    model = ErgmModel(list(terms), theta.copy(), fixed=~free)
    return FitResult(model, converged, it, mean_stats, target_stats)
