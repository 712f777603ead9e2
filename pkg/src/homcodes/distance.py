"""Code distances and minimum-weight logical counts.

For codes on surfaces the Z-distance is the length of the shortest cycle of
the graph (V, E) that crosses some X-logical an odd number of times. It is
found by breadth-first search in a doubled graph: two copies of the graph in
which edges of the chosen X-logical switch copies, so that any path from a
vertex to its twin is a closed walk with odd overlap. The X-distance is the
same computation on the dual complex.

A brute-force search over small supports serves as an oracle for any code.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from . import gf2
from .complexes import dual
from .css import CssCode, from_complex

__all__ = [
    "DistanceResult",
    "edge_endpoints",
    "doubled_graph",
    "z_distance",
    "x_distance",
    "count_min_weight_logicals",
    "count_by_doubled_graph",
    "brute_force_distance",
    "EnumerationCapExceeded",
]

DEFAULT_CAP = 10**6


class EnumerationCapExceeded(RuntimeError):
    def __init__(self, message: str, partial: int):
        super().__init__(message)
        self.partial = partial


@dataclass
class DistanceResult:
    d: int
    witness: np.ndarray | None = None


def _require_surface(code: CssCode) -> None:
    if code.complex is None or code.complex.dimension != 2 or code.qubit_level != 1:
        raise ValueError("graph distances need a code with qubits on the edges of a 2-complex")


def edge_endpoints(code: CssCode) -> np.ndarray:
    """``(n, 2)`` array of the endpoints of every qubit edge."""
    csc = code.h_x.tocsc()
    if np.any(np.diff(csc.indptr) != 2):
        raise ValueError("every edge needs two distinct endpoints")
    return csc.indices.reshape(-1, 2).astype(np.int64)


def doubled_graph(ends: np.ndarray, n_vertices: int, cross: np.ndarray) -> sp.csr_array:
    """Adjacency of the doubled graph; edges with ``cross[e]`` switch copies."""
    u, w = ends[:, 0], ends[:, 1]
    shift = np.where(cross.astype(bool), n_vertices, 0)
    rows = np.concatenate([u, u + n_vertices, w, w + n_vertices])
    cols = np.concatenate([w + shift, w + n_vertices - shift, u + shift, u + n_vertices - shift])
    g = sp.coo_array((np.ones(rows.size), (rows, cols)), shape=(2 * n_vertices,) * 2).tocsr()
    g.data[:] = 1.0
    return g


def _walk_edges(path: list[int], ends: np.ndarray, nv: int, cross: np.ndarray) -> np.ndarray:
    """Map a doubled-graph path back to a chain on the original edges."""
    chain = np.zeros(len(ends), dtype=np.uint8)
    for x, y in zip(path[:-1], path[1:]):
        switch = (x >= nv) != (y >= nv)
        a, b = x % nv, y % nv
        hits = np.flatnonzero(
            (((ends[:, 0] == a) & (ends[:, 1] == b)) | ((ends[:, 0] == b) & (ends[:, 1] == a)))
            & (cross.astype(bool) == switch)
        )
        chain[hits[0]] ^= 1
    return chain


def _shortest_odd_cycle(ends, nv, cross, want_witness):
    """Shortest closed walk with odd overlap with ``cross``; returns (length, chain)."""
    sources = np.unique(ends[cross.astype(bool)])
    if sources.size == 0:
        return math.inf, None
    g = doubled_graph(ends, nv, cross)
    dist, pred = shortest_path(g, unweighted=True, indices=sources, return_predecessors=True)
    twin = dist[np.arange(sources.size), sources + nv]
    best = int(np.argmin(twin))
    length = twin[best]
    if not np.isfinite(length):
        return math.inf, None
    chain = None
    if want_witness:
        path = [int(sources[best] + nv)]
        while path[-1] != sources[best]:
            path.append(int(pred[best, path[-1]]))
        chain = _walk_edges(path[::-1], ends, nv, cross)
    return int(length), chain


def _distance(code: CssCode, want_witness: bool) -> DistanceResult:
    _require_surface(code)
    if code.k == 0:
        raise ValueError("trivial code: k = 0")
    ends = edge_endpoints(code)
    nv = code.h_x.shape[0]
    best, witness = math.inf, None
    for xbar in code.logicals.x:
        length, chain = _shortest_odd_cycle(ends, nv, xbar, want_witness)
        if length < best:
            best, witness = length, chain
    return DistanceResult(int(best), witness)


def z_distance(code: CssCode, want_witness: bool = False) -> DistanceResult:
    """Minimum weight of a Z-logical of a surface code."""
    return _distance(code, want_witness)


def _dual_code(code: CssCode) -> CssCode:
    _require_surface(code)
    return from_complex(dual(code.complex), 1)


def x_distance(code: CssCode, want_witness: bool = False) -> DistanceResult:
    """Minimum weight of an X-logical, computed on the dual complex."""
    return _distance(_dual_code(code), want_witness)


def _adjacency(ends: np.ndarray, nv: int) -> list[list[tuple[int, int]]]:
    adj: list[list[tuple[int, int]]] = [[] for _ in range(nv)]
    for e, (u, w) in enumerate(ends.tolist()):
        adj[u].append((w, e))
        adj[w].append((u, e))
    return adj


def _count_cycles(code: CssCode, d: int, cap: int) -> set[frozenset[int]]:
    """All simple cycles of length ``d`` that are nontrivial logicals.

    Each cycle is grown from its smallest vertex through larger vertices
    only; nontriviality is the XOR of per-edge bitmasks recording which
    X-logicals contain the edge.
    """
    ends = edge_endpoints(code)
    nv = code.h_x.shape[0]
    adj = _adjacency(ends, nv)
    xs = code.logicals.x
    masks = [0] * len(ends)
    for i, row in enumerate(xs):
        for e in np.flatnonzero(row):
            masks[e] |= 1 << i
    graph = sp.coo_array(
        (np.ones(2 * len(ends)), (np.r_[ends[:, 0], ends[:, 1]], np.r_[ends[:, 1], ends[:, 0]])),
        shape=(nv, nv),
    ).tocsr()
    found: set[frozenset[int]] = set()
    for v in range(nv):
        dist = shortest_path(graph, unweighted=True, indices=v)
        dist = np.where(np.isfinite(dist), dist, d + 1).astype(np.int64).tolist()
        on_path = [False] * nv
        on_path[v] = True
        edges: list[int] = []

        def grow(x: int, depth: int, mask: int) -> None:
            for y, e in adj[x]:
                if y == v:
                    if depth + 1 == d and mask ^ masks[e] and (len(edges) > 1 or edges[-1] != e):
                        found.add(frozenset(edges + [e]))
                        if len(found) > cap:
                            raise EnumerationCapExceeded("too many minimum-weight logicals", len(found))
                    continue
                if y < v or on_path[y] or depth + 1 + dist[y] > d:
                    continue
                on_path[y] = True
                edges.append(e)
                grow(y, depth + 1, mask ^ masks[e])
                edges.pop()
                on_path[y] = False

        grow(v, 0, 0)
    return found


def count_min_weight_logicals(code: CssCode, side: str = "Z", cap: int = DEFAULT_CAP) -> tuple[int, int]:
    """``(d, N_d)``: distance and number of distinct minimum-weight logicals of one type."""
    side = side.upper()
    target = code if side == "Z" else _dual_code(code)
    d = z_distance(target).d
    return d, len(_count_cycles(target, d, cap))


def count_by_doubled_graph(code: CssCode, side: str = "Z", cap: int = DEFAULT_CAP) -> tuple[int, int]:
    """Same count by expanding shortest-path DAGs of the doubled graph for
    every X-logical and every source vertex. Slower; used as a cross-check."""
    side = side.upper()
    target = code if side == "Z" else _dual_code(code)
    d = z_distance(target).d
    ends = edge_endpoints(target)
    nv = target.h_x.shape[0]
    found: set[frozenset[int]] = set()
    for xbar in target.logicals.x:
        g = doubled_graph(ends, nv, xbar)
        adj = [[] for _ in range(2 * nv)]
        for e, (u, w) in enumerate(ends.tolist()):
            sh = nv if xbar[e] else 0
            for a, b in ((u, w + sh), (u + nv, (w + nv - sh) % (2 * nv)), (w, u + sh), (w + nv, (u + nv - sh) % (2 * nv))):
                adj[a].append((b, e))
        dist_to = shortest_path(g, unweighted=True)
        for v in range(nv):
            if dist_to[v, v + nv] != d:
                continue
            target_node = v + nv
            edges: list[int] = []

            def walk(x: int, depth: int) -> None:
                if x == target_node:
                    if len(set(edges)) == d:
                        found.add(frozenset(edges))
                        if len(found) > cap:
                            raise EnumerationCapExceeded("too many minimum-weight logicals", len(found))
                    return
                for y, e in adj[x]:
                    if depth + 1 + dist_to[y, target_node] <= d:
                        edges.append(e)
                        walk(y, depth + 1)
                        edges.pop()

            walk(v, 0)
    return d, len(found)


def brute_force_distance(code: CssCode, side: str = "Z", w_max: int = 4, guard: int = 10**8) -> int | None:
    """Smallest weight ``w <= w_max`` of a nontrivial logical of type ``side``, by exhaustion."""
    total = sum(math.comb(code.n, w) for w in range(1, w_max + 1))
    if total > guard:
        raise ValueError(f"{total} supports exceed the enumeration guard {guard}")
    h = gf2.as_bits(code.checks(side))
    cols = np.packbits(h.T, axis=1)  # one packed syndrome per qubit
    n = code.n
    zero = np.zeros(cols.shape[1], dtype=np.uint8)
    for w in range(1, w_max + 1):
        for prefix in itertools.combinations(range(n), w - 1):
            start = prefix[-1] + 1 if prefix else 0
            if start >= n:
                continue
            acc = zero.copy()
            for q in prefix:
                acc ^= cols[q]
            last = np.arange(start, n)
            synd = cols[last] ^ acc
            hits = last[~synd.any(axis=1)]
            if hits.size == 0:
                continue
            supports = np.zeros((hits.size, n), dtype=np.uint8)
            supports[:, list(prefix)] = 1
            supports[np.arange(hits.size), hits] = 1
            if np.any(code.is_logical_failure(supports, side)):
                return w
    return None
