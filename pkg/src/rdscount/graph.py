"""Attributed undirected network with degree and group bookkeeping.

Node ids are dense integers 0..N-1.  Networks are immutable after
construction so they can be shared freely across parallel workers.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import InputError


class NodeAttributeSchema:
    """Declares categorical attributes: ordered levels plus a reference level.

    The reference level defaults to the first level of each attribute.
    """

    def __init__(self, levels: dict[str, list[str]], reference: dict[str, str] | None = None):
        self.levels: dict[str, tuple[str, ...]] = {}
        self.reference: dict[str, str] = {}
        reference = reference or {}
        for attr, lv in levels.items():
            lv = tuple(str(x) for x in lv)
            if len(set(lv)) != len(lv):
                raise InputError(f"duplicate levels for attribute {attr!r}: {lv}")
            if not lv:
                raise InputError(f"attribute {attr!r} has no levels")
            ref = reference.get(attr, lv[0])
            if ref not in lv:
                raise InputError(f"reference level {ref!r} not among levels of {attr!r}")
            self.levels[attr] = lv
            self.reference[attr] = ref

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.levels)

    def level_code(self, attr: str, level: str) -> int:
        self._check(attr)
        try:
            return self.levels[attr].index(level)
        except ValueError:
            raise InputError(f"unknown level {level!r} for attribute {attr!r}") from None

    def _check(self, attr: str) -> None:
        if attr not in self.levels:
            raise InputError(f"unknown attribute {attr!r}")

    def __eq__(self, other):
        return (
            isinstance(other, NodeAttributeSchema)
            and self.levels == other.levels
            and self.reference == other.reference
        )

    def __repr__(self):
        return f"NodeAttributeSchema({dict(self.levels)!r})"


def _infer_schema(attributes: dict[str, list[str]]) -> NodeAttributeSchema:
    # Levels in first-appearance order so round-trips are stable.
    levels = {}
    for attr, values in attributes.items():
        seen: dict[str, None] = {}
        for v in values:
            seen.setdefault(str(v), None)
        levels[attr] = list(seen)
    return NodeAttributeSchema(levels)


class AttributedNetwork:
    """Undirected simple graph with per-node categorical attributes.

    Edges are stored as a lexicographically sorted (E, 2) int array with
    i < j per row; a degree cache and CSR adjacency are built up front.
    """

    def __init__(
        self,
        node_count: int,
        edges,
        attributes: dict[str, list[str]] | None = None,
        schema: NodeAttributeSchema | None = None,
    ):
        if node_count < 0:
            raise InputError("node_count must be nonnegative")
        self.node_count = int(node_count)
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if e.size == 0:
            e = np.empty((0, 2), dtype=np.int64)
        if e.ndim != 2 or e.shape[1] != 2:
            raise InputError("edges must be pairs of node ids")
        if e.size and (e.min() < 0 or e.max() >= self.node_count):
            raise InputError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise InputError("self-loops are not allowed")
        e = np.sort(e, axis=1)
        order = np.lexsort((e[:, 1], e[:, 0]))
        e = e[order]
        if e.shape[0] > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise InputError("duplicate edges are not allowed")
        self._edges = e

        attributes = attributes or {}
        self.schema = schema if schema is not None else _infer_schema(attributes)
        self._codes: dict[str, np.ndarray] = {}
        for attr in self.schema.names:
            if attr not in attributes:
                raise InputError(f"attribute {attr!r} declared in schema but missing values")
            values = [str(v) for v in attributes[attr]]
            if len(values) != self.node_count:
                raise InputError(
                    f"attribute {attr!r} has {len(values)} values for {self.node_count} nodes"
                )
            lut = {lv: k for k, lv in enumerate(self.schema.levels[attr])}
            try:
                codes = np.array([lut[v] for v in values], dtype=np.int64)
            except KeyError as exc:
                raise InputError(f"value {exc.args[0]!r} not a level of attribute {attr!r}") from None
            codes.setflags(write=False)
            self._codes[attr] = codes
        for attr in attributes:
            if attr not in self.schema.names:
                raise InputError(f"attribute {attr!r} not declared in schema")

        deg = np.zeros(self.node_count, dtype=np.int64)
        if e.size:
            np.add.at(deg, e[:, 0], 1)
            np.add.at(deg, e[:, 1], 1)
        deg.setflags(write=False)
        self._degree = deg
        self._edges.setflags(write=False)

        # CSR adjacency
        nbr_count = deg.copy()
        offsets = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(nbr_count, out=offsets[1:])
        nbrs = np.empty(offsets[-1], dtype=np.int64)
        cursor = offsets[:-1].copy()
        for a, b in e:
            nbrs[cursor[a]] = b
            cursor[a] += 1
            nbrs[cursor[b]] = a
            cursor[b] += 1
        # sort each neighbor list for determinism
        for i in range(self.node_count):
            nbrs[offsets[i]:offsets[i + 1]].sort()
        nbrs.setflags(write=False)
        offsets.setflags(write=False)
        self._nbr_offsets = offsets
        self._nbrs = nbrs

    # -- basic accessors ---------------------------------------------------

    @property
    def edge_count(self) -> int:
        return self._edges.shape[0]

    @property
    def edges(self) -> np.ndarray:
        """Read-only (E, 2) array, each row i < j, lexicographically sorted."""
        return self._edges

    @property
    def degrees(self) -> np.ndarray:
        return self._degree

    def degree(self, i: int) -> int:
        self._check_node(i)
        return int(self._degree[i])

    def neighbors(self, i: int) -> np.ndarray:
        self._check_node(i)
        return self._nbrs[self._nbr_offsets[i]:self._nbr_offsets[i + 1]]

    def has_edge(self, i: int, j: int) -> bool:
        self._check_node(i)
        self._check_node(j)
        return bool(np.any(self.neighbors(i) == j))

    def attribute_codes(self, attr: str) -> np.ndarray:
        self.schema._check(attr)
        return self._codes[attr]

    def attribute_values(self, attr: str) -> list[str]:
        codes = self.attribute_codes(attr)
        levels = self.schema.levels[attr]
        return [levels[c] for c in codes]

    @property
    def isolates(self) -> np.ndarray:
        """Node ids with degree zero (unreachable by RDS)."""
        return np.flatnonzero(self._degree == 0)

    def _check_node(self, i) -> None:
        if not 0 <= int(i) < self.node_count:
            raise InputError(f"node id {i} out of range [0, {self.node_count})")

    # -- group bookkeeping -------------------------------------------------

    def subgroup_counts(self, attr: str) -> dict[str, int]:
        """Number of nodes at each level of ``attr``; counts sum to N."""
        codes = self.attribute_codes(attr)
        levels = self.schema.levels[attr]
        counts = np.bincount(codes, minlength=len(levels))
        return {lv: int(c) for lv, c in zip(levels, counts)}

    def cross_tie_total(self, attr: str = "group") -> int:
        """Number of edges whose endpoints carry different levels of ``attr``."""
        codes = self.attribute_codes(attr)
        if self.edge_count == 0:
            return 0
        return int(np.sum(codes[self._edges[:, 0]] != codes[self._edges[:, 1]]))

    # -- I/O -----------------------------------------------------------------

    def to_csv(self, edge_path, node_path) -> None:
        with open(edge_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["src", "dst"])
            for a, b in self._edges:
                w.writerow([int(a), int(b)])
        names = list(self.schema.names)
        with open(node_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["id"] + names)
            cols = [self.attribute_values(a) for a in names]
            for i in range(self.node_count):
                w.writerow([i] + [col[i] for col in cols])

    @classmethod
    def from_csv(cls, edge_path, node_path, schema: NodeAttributeSchema | None = None):
        with open(node_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "id" not in reader.fieldnames:
                raise InputError(f"{node_path}: node CSV needs an 'id' column")
            names = [c for c in reader.fieldnames if c != "id"]
            rows = list(reader)
        n = len(rows)
        ids = [int(r["id"]) for r in rows]
        if sorted(ids) != list(range(n)):
            raise InputError(f"{node_path}: node ids must be dense integers 0..N-1")
        by_id = sorted(rows, key=lambda r: int(r["id"]))
        attributes = {a: [r[a] for r in by_id] for a in names}
        edges = []
        with open(edge_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(reader.fieldnames) < {"src", "dst"}:
                raise InputError(f"{edge_path}: edge CSV needs 'src,dst' columns")
            for lineno, r in enumerate(reader, start=2):
                try:
                    edges.append((int(r["src"]), int(r["dst"])))
                except (TypeError, ValueError):
                    raise InputError(f"{edge_path}:{lineno}: non-integer edge endpoint") from None
        return cls(n, edges, attributes, schema=schema)

    def __repr__(self):
        return (
            f"AttributedNetwork(n={self.node_count}, edges={self.edge_count}, "
            f"attrs={list(self.schema.names)})"
        )
