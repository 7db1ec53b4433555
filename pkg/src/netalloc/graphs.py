"""Undirected graphs: CSR storage, random generators, file I/O, degree utilities.

Nodes are integers 0..n-1. Adjacency is stored once per direction in CSR form
(indptr/indices) with neighbor lists sorted ascending, so iteration order is
deterministic everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, InvalidParameterError, ParseError


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph without self-loops or parallel edges."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build a graph from (i, j) pairs; rejects self-loops and duplicates."""
        if n < 0:
            raise InvalidParameterError("node count must be non-negative")
        seen = set()
        for i, j in edges:
            if i == j:
                raise InvalidInputError(f"self-loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidInputError(f"edge ({i}, {j}) out of range for n={n}")
            key = (i, j) if i < j else (j, i)
            if key in seen:
                raise InvalidInputError(f"duplicate edge ({key[0]}, {key[1]})")
            seen.add(key)
        deg = np.zeros(n, dtype=np.int64)
        for i, j in seen:
            deg[i] += 1
            deg[j] += 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.zeros(indptr[-1], dtype=np.int64)
        cursor = indptr[:-1].copy()
        for i, j in sorted(seen):
            indices[cursor[i]] = j
            cursor[i] += 1
            indices[cursor[j]] = i
            cursor[j] += 1
        for v in range(n):
            row = indices[indptr[v]:indptr[v + 1]]
            row.sort()
        return cls(n=n, indptr=indptr, indices=indices)

    @property
    def edge_count(self) -> int:
        return self.indices.size // 2

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted neighbor indices of node i (a read-only view)."""
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.indptr)
        d.setflags(write=False)
        return d

    @cached_property
    def _row_ids(self) -> np.ndarray:
        r = np.repeat(np.arange(self.n), self.degrees)
        r.setflags(write=False)
        return r

    def neighbor_sum(self, values: np.ndarray) -> np.ndarray:
        """Per node, the sum of `values` over its neighbors (0 if isolated)."""
        values = np.asarray(values, dtype=float)
        gathered = values[self.indices]
        if values.ndim == 1:
            return np.bincount(self._row_ids, weights=gathered, minlength=self.n)
        cols = [
            np.bincount(self._row_ids, weights=gathered[:, c], minlength=self.n)
            for c in range(values.shape[1])
        ]
        return np.column_stack(cols) if cols else np.zeros((self.n, 0))

    def neighbor_mean(self, values: np.ndarray) -> np.ndarray:
        """Per node, the mean of `values` over its neighbors (0 if isolated)."""
        sums = self.neighbor_sum(values)
        safe = np.maximum(self.degrees, 1).astype(float)
        if sums.ndim == 1:
            return sums / safe
        return sums / safe[:, None]

    def edges(self):
        """Yield edges as (i, j) with i < j, in lexicographic order."""
        for i in range(self.n):
            for j in self.neighbors(i):
                if j > i:
                    yield i, int(j)

    def equals(self, other: "Graph") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )


def validate_graph(g: Graph) -> None:
    """Check structural invariants; raises InvalidInputError on violation."""
    if g.indptr.shape != (g.n + 1,) or g.indptr[0] != 0:
        raise InvalidInputError("malformed indptr")
    if g.indptr[-1] != g.indices.size:
        raise InvalidInputError("indptr does not span indices")
    if g.indices.size and (g.indices.min() < 0 or g.indices.max() >= g.n):
        raise InvalidInputError("neighbor index out of range")
    pairs = set()
    for i in range(g.n):
        row = g.neighbors(i)
        if np.any(row == i):
            raise InvalidInputError(f"self-loop at node {i}")
        if np.any(np.diff(row) <= 0):
            raise InvalidInputError(f"neighbor list of {i} not strictly sorted")
        for j in row:
            pairs.add((i, int(j)))
    for i, j in pairs:
        if (j, i) not in pairs:
            raise InvalidInputError(f"asymmetric adjacency: ({i}, {j})")
    if len(pairs) != 2 * g.edge_count:
        raise InvalidInputError("edge count inconsistent with adjacency")


def generate_barabasi_albert(n: int, m: int, rng: np.random.Generator) -> Graph:
    """Preferential-attachment graph.

    Starts from m isolated seed nodes; the first added node links to every
    seed, and each later node draws m distinct targets from an urn holding
    one ticket per existing edge endpoint (duplicates within a step are
    redrawn).

    Args:
        n: total node count, must exceed m.
        m: edges attached by each new node, at least 1.
        rng: numpy Generator; fixes the graph completely.
    """
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    if n <= m:
        raise InvalidParameterError(f"need n > m, got n={n}, m={m}")
    edges = []
    urn: list[int] = []
    targets = list(range(m))
    for new in range(m, n):
        for t in targets:
            edges.append((t, new))
        urn.extend(targets)
        urn.extend([new] * len(targets))
        if new + 1 < n:
            chosen: set[int] = set()
            while len(chosen) < m:
                chosen.add(urn[int(rng.integers(len(urn)))])
            targets = sorted(chosen)
    return Graph.from_edges(n, edges)


def generate_watts_strogatz(
    n: int, ring_degree: int, rewire_prob: float, rng: np.random.Generator
) -> Graph:
    """Small-world graph: ring lattice with random rewiring.

    Each node starts connected to its ring_degree nearest ring neighbors;
    every lattice edge is rewired with probability rewire_prob to a uniform
    target, skipping self-loops and duplicates. Edge count is conserved.

    Args:
        n: node count, must exceed ring_degree.
        ring_degree: even lattice degree, at least 2.
        rewire_prob: probability in [0, 1] of moving each edge's far end.
        rng: numpy Generator.
    """
    if ring_degree % 2 != 0:
        raise InvalidParameterError(f"ring_degree must be even, got {ring_degree}")
    if ring_degree < 2:
        raise InvalidParameterError("ring_degree must be >= 2")
    if n <= ring_degree:
        raise InvalidParameterError(f"need n > ring_degree, got n={n}")
    if not 0.0 <= rewire_prob <= 1.0:
        raise InvalidParameterError("rewire_prob must be in [0, 1]")
    adj: list[set[int]] = [set() for _ in range(n)]
    half = ring_degree // 2
    for offset in range(1, half + 1):
        for i in range(n):
            j = (i + offset) % n
            adj[i].add(j)
            adj[j].add(i)
    for offset in range(1, half + 1):
        for i in range(n):
            if rng.random() >= rewire_prob:
                continue
            j = (i + offset) % n
            if len(adj[i]) >= n - 1:
                continue  # saturated node, nothing to rewire to
            w = int(rng.integers(n))
            while w == i or w in adj[i]:
                w = int(rng.integers(n))
            adj[i].discard(j)
            adj[j].discard(i)
            adj[i].add(w)
            adj[w].add(i)
    edges = [(i, j) for i in range(n) for j in adj[i] if j > i]
    return Graph.from_edges(n, edges)


def degree_histogram(g: Graph) -> dict[int, int]:
    """Map degree -> node count; degrees absent from the map have count 0."""
    values, counts = np.unique(np.asarray(g.degrees), return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def load_edge_list(path) -> Graph:
    """Read a `n <count>` header plus one `i j` (i < j) pair per line."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(path, 1, "empty file, expected 'n <count>' header")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n":
        raise ParseError(path, 1, f"expected 'n <count>' header, got {lines[0]!r}")
    try:
        n = int(head[1])
    except ValueError:
        raise ParseError(path, 1, f"node count is not an integer: {head[1]!r}")
    if n < 0:
        raise ParseError(path, 1, f"negative node count {n}")
    edges = []
    seen = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 2:
            raise ParseError(path, lineno, f"expected 'i j', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(path, lineno, f"non-integer endpoint in {raw!r}")
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(path, lineno, f"edge ({i}, {j}) out of range for n={n}")
        if i >= j:
            raise ParseError(
                path, lineno, f"edge ({i}, {j}) violates i < j ordering"
            )
        if (i, j) in seen:
            raise ParseError(path, lineno, f"duplicate edge ({i}, {j})")
        seen.add((i, j))
        edges.append((i, j))
    return Graph.from_edges(n, edges)


def save_edge_list(g: Graph, path) -> None:
    """Write the canonical edge-list form; round-trips bit-exactly."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"n {g.n}\n")
        for i, j in g.edges():
            fh.write(f"{i} {j}\n")


def load_features(path) -> np.ndarray:
    """Read a headerless CSV of floats, one row per node."""
    path = Path(path)
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            parts = raw.strip().split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(
                    path, lineno, f"expected {width} columns, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ParseError(path, lineno, f"non-numeric value in {raw.strip()!r}")
    return np.asarray(rows, dtype=float)


def save_features(matrix: np.ndarray, path) -> None:
    """Write features as headerless CSV with full round-trip precision."""
    matrix = np.asarray(matrix, dtype=float)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in matrix:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
