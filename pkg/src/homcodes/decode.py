"""Minimum-weight perfect matching decoders for codes on surfaces.

Checks of one type form the vertices of a graph whose edges are the qubits
(every qubit touches exactly two checks). A syndrome marks vertices; the
decoder pairs them up with minimum total path length and flips the paths.

Two implementations are provided. :class:`MatchingDecoder` wraps the sparse
blossom solver from ``pymatching`` and is used for Monte Carlo campaigns.
:func:`reference_mwpm` computes breadth-first distances between marked
vertices, solves the matching with the exact blossom algorithm from
``networkx`` and reconstructs lexicographically least shortest paths; it is
slow and serves as an independent check.

For repeated noisy measurements the marked vertices live in ``T + 1`` time
layers; vertical (measurement) and horizontal (qubit) edges all have weight
one, and the correction is the set of qubit edges used an odd number of
times, projected onto a single layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import networkx as nx
import numpy as np
import pymatching
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from . import gf2
from .css import CssCode

__all__ = [
    "Outcome",
    "DecodeOutcome",
    "InvalidSyndrome",
    "SpacetimeSyndrome",
    "MatchingDecoder",
    "NoisyMatchingDecoder",
    "mwpm_decode_2d",
    "mwpm_decode_noisy_2d",
    "reference_mwpm",
    "reference_mwpm_noisy",
    "check_graph",
]


class Outcome(str, Enum):
    SUCCESS = "success"
    LOGICAL_FAILURE = "logical_failure"
    STUCK_FAILURE = "stuck_failure"


@dataclass
class DecodeOutcome:
    outcome: Outcome
    correction: np.ndarray | None = None
    sweeps: int = 0


class InvalidSyndrome(ValueError):
    """A connected component holds an odd number of marked vertices."""


def check_graph(h: sp.csr_array) -> np.ndarray:
    """``(n, 2)`` endpoints of every qubit in the graph of the checks ``h``."""
    csc = sp.csc_array(h)
    if np.any(np.diff(csc.indptr) != 2):
        raise ValueError("every qubit must touch exactly two checks for matching")
    return csc.indices.reshape(-1, 2).astype(np.int64)


def _components(h: sp.csr_array) -> np.ndarray:
    ends = check_graph(h)
    m = h.shape[0]
    adj = sp.coo_array((np.ones(len(ends)), (ends[:, 0], ends[:, 1])), shape=(m, m))
    _, labels = connected_components(adj, directed=False)
    return labels


def _validate(labels: np.ndarray, marked: np.ndarray) -> None:
    counts = np.bincount(labels[marked], minlength=labels.max() + 1)
    if np.any(counts % 2):
        raise InvalidSyndrome("odd number of marked vertices in a connected component")


class MatchingDecoder:
    """Exact MWPM decoder for errors of type ``side`` on a surface code."""

    def __init__(self, code: CssCode, side: str = "Z"):
        self.side = side.upper()
        self.h = sp.csr_array(code.checks(self.side))
        check_graph(self.h)
        self._labels = _components(self.h)
        self._m = pymatching.Matching.from_check_matrix(sp.csc_matrix(self.h), weights=1.0)

    def decode(self, syndrome, validate: bool = True) -> np.ndarray:
        s = gf2.as_bits(syndrome).reshape(-1)
        if s.size != self.h.shape[0]:
            raise ValueError(f"syndrome has length {s.size}, expected {self.h.shape[0]}")
        if validate:
            _validate(self._labels, np.flatnonzero(s))
        if not s.any():
            return np.zeros(self.h.shape[1], dtype=np.uint8)
        return self._m.decode(s).astype(np.uint8)

    def decode_batch(self, syndromes: np.ndarray) -> np.ndarray:
        s = gf2.as_bits(syndromes)
        if s.shape[0] == 0:
            return np.zeros((0, self.h.shape[1]), dtype=np.uint8)
        return self._m.decode_batch(s).astype(np.uint8)

    def weight(self, syndrome) -> int:
        s = gf2.as_bits(syndrome).reshape(-1)
        if not s.any():
            return 0
        _, w = self._m.decode(s, return_weight=True)
        return int(round(w))


@dataclass
class SpacetimeSyndrome:
    """Measured check values over ``T`` noisy rounds plus a final perfect round.

    ``rounds`` has shape ``(T + 2, m)``: row 0 is the fictitious all-zero
    round, rows ``1..T`` are measured and row ``T + 1`` is the true syndrome
    of the accumulated error.
    """

    rounds: np.ndarray

    def __post_init__(self):
        self.rounds = gf2.as_bits(self.rounds)
        if self.rounds.ndim != 2 or self.rounds.shape[0] < 3:
            raise ValueError("need at least one measured round between the perfect ones")
        if self.rounds[0].any():
            raise ValueError("round 0 must be all zero")

    @property
    def T(self) -> int:
        return self.rounds.shape[0] - 2

    def events(self) -> np.ndarray:
        """Marked vertices, shape ``(m, T + 1)``: entry ``[i, t]`` differs between rounds ``t`` and ``t + 1``."""
        return (self.rounds[1:] ^ self.rounds[:-1]).T.copy()


class NoisyMatchingDecoder:
    """MWPM in the ``(T + 1)``-layer space-time graph with unit weights."""

    def __init__(self, code: CssCode, T: int, side: str = "Z"):
        if T < 1:
            raise ValueError("T must be at least 1")
        self.side = side.upper()
        self.T = T
        self.h = sp.csr_array(code.checks(self.side))
        check_graph(self.h)
        self._m = pymatching.Matching.from_check_matrix(
            sp.csc_matrix(self.h), weights=1.0, repetitions=T + 1, timelike_weights=1.0
        )

    def decode_events(self, events: np.ndarray) -> np.ndarray:
        ev = gf2.as_bits(events)
        if ev.shape != (self.h.shape[0], self.T + 1):
            raise ValueError(f"events must have shape {(self.h.shape[0], self.T + 1)}")
        if not ev.any():
            return np.zeros(self.h.shape[1], dtype=np.uint8)
        return self._m.decode(ev).astype(np.uint8)

    def decode_events_batch(self, events: np.ndarray) -> np.ndarray:
        """Batch of event arrays, shape ``(B, m, T + 1)``."""
        ev = gf2.as_bits(events)
        if ev.shape[0] == 0:
            return np.zeros((0, self.h.shape[1]), dtype=np.uint8)
        # pymatching orders detectors time-major: index = t * m + i
        flat = ev.transpose(0, 2, 1).reshape(ev.shape[0], -1)
        return self._m.decode_batch(flat).astype(np.uint8)

    def decode(self, st: SpacetimeSyndrome) -> np.ndarray:
        if st.T != self.T:
            raise ValueError(f"syndrome has {st.T} rounds, decoder expects {self.T}")
        return self.decode_events(st.events())


def _decoder_cache(code: CssCode) -> dict:
    cache = code.__dict__.setdefault("_decoders", {})
    return cache


def mwpm_decode_2d(code: CssCode, syndrome, side: str = "Z") -> np.ndarray:
    """Minimum-weight correction with the given syndrome (errors of type ``side``)."""
    cache = _decoder_cache(code)
    key = ("perfect", side.upper())
    if key not in cache:
        cache[key] = MatchingDecoder(code, side)
    return cache[key].decode(syndrome)


def mwpm_decode_noisy_2d(
    code: CssCode, spacetime: SpacetimeSyndrome, side: str = "Z", error=None
) -> tuple[np.ndarray, DecodeOutcome | None]:
    """Decode a space-time syndrome; with the true accumulated ``error`` also classify the result."""
    cache = _decoder_cache(code)
    key = ("noisy", side.upper(), spacetime.T)
    if key not in cache:
        cache[key] = NoisyMatchingDecoder(code, spacetime.T, side)
    corr = cache[key].decode(spacetime)
    if error is None:
        return corr, None
    residual = gf2.as_bits(error) ^ corr
    failed = code.is_logical_failure(residual, side)
    return corr, DecodeOutcome(Outcome.LOGICAL_FAILURE if failed else Outcome.SUCCESS, corr)


# --- reference implementation ------------------------------------------------


def _bfs_all(ends: np.ndarray, m: int, sources: np.ndarray) -> np.ndarray:
    adj = sp.coo_array(
        (np.ones(2 * len(ends)), (np.r_[ends[:, 0], ends[:, 1]], np.r_[ends[:, 1], ends[:, 0]])),
        shape=(m, m),
    ).tocsr()
    return shortest_path(adj, unweighted=True, indices=sources)


def _least_path(u: int, v: int, dist_to_v: np.ndarray, incident: list[list[tuple[int, int]]]) -> list[int]:
    """Shortest path from u to v choosing the smallest edge index at every step."""
    path = []
    x = u
    while x != v:
        for e, y in incident[x]:
            if dist_to_v[y] == dist_to_v[x] - 1:
                path.append(e)
                x = y
                break
    return path


def _incidence_lists(ends: np.ndarray, m: int) -> list[list[tuple[int, int]]]:
    inc: list[list[tuple[int, int]]] = [[] for _ in range(m)]
    for e, (a, b) in enumerate(ends.tolist()):
        inc[a].append((e, b))
        inc[b].append((e, a))
    for lst in inc:
        lst.sort()
    return inc


def _min_weight_pairs(weights: np.ndarray) -> list[tuple[int, int]]:
    """Exact minimum-weight perfect matching on a complete graph (networkx blossom)."""
    k = weights.shape[0]
    g = nx.Graph()
    g.add_nodes_from(range(k))
    top = float(weights.max()) + 1.0
    for i in range(k):
        for j in range(i + 1, k):
            g.add_edge(i, j, weight=top - float(weights[i, j]))
    mate = nx.max_weight_matching(g, maxcardinality=True)
    pairs = sorted(tuple(sorted(p)) for p in mate)
    if 2 * len(pairs) != k:
        raise InvalidSyndrome("no perfect matching of the marked vertices")
    return pairs


def reference_mwpm(code: CssCode, syndrome, side: str = "Z") -> tuple[np.ndarray, int]:
    """Correction and matching weight from BFS distances and an exact blossom."""
    h = sp.csr_array(code.checks(side))
    ends = check_graph(h)
    m = h.shape[0]
    s = gf2.as_bits(syndrome).reshape(-1)
    marked = np.flatnonzero(s)
    corr = np.zeros(h.shape[1], dtype=np.uint8)
    if marked.size == 0:
        return corr, 0
    _validate(_components(h), marked)
    dist = _bfs_all(ends, m, marked)
    pairs = _min_weight_pairs(dist[:, marked])
    inc = _incidence_lists(ends, m)
    total = 0
    for i, j in pairs:
        u, v = int(marked[i]), int(marked[j])
        for e in _least_path(u, v, dist[j], inc):
            corr[e] ^= 1
        total += int(dist[i, v])
    return corr, total


def reference_mwpm_noisy(code: CssCode, events: np.ndarray, side: str = "Z") -> tuple[np.ndarray, int]:
    """Space-time matching with distance ``d_G(u, v) + |t - t'|`` (reference version)."""
    h = sp.csr_array(code.checks(side))
    ends = check_graph(h)
    m = h.shape[0]
    ev = gf2.as_bits(events)
    verts, times = np.nonzero(ev)
    corr = np.zeros(h.shape[1], dtype=np.uint8)
    if verts.size == 0:
        return corr, 0
    uniq, inv = np.unique(verts, return_inverse=True)
    dist_g = _bfs_all(ends, m, uniq)
    w = dist_g[inv][:, verts] + np.abs(times[:, None] - times[None, :])
    pairs = _min_weight_pairs(w)
    inc = _incidence_lists(ends, m)
    total = 0
    for i, j in pairs:
        u, v = int(verts[i]), int(verts[j])
        for e in _least_path(u, v, dist_g[inv[j]], inc):
            corr[e] ^= 1
        total += int(w[i, j])
    return corr, total
