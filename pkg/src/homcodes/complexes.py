"""Cellulations as GF(2) chain complexes.

A :class:`ChainComplex` stores the cell counts of every level and the
boundary maps between consecutive levels as sparse 0/1 matrices:
``boundary(i)`` maps i-chains to (i-1)-chains and has shape
``(size(i-1), size(i))``.

Builders in this module cover the hypercubic families (2D and 4D tori, the
tesseract box with relative boundary), the rotated toric tessellation, the
semi-hyperbolic subdivision of square-faced surfaces, and dualization.
Surfaces from reflection groups live in :mod:`homcodes.coxeter`.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.sparse as sp

from . import gf2

__all__ = [
    "ChainComplex",
    "toric_2d",
    "rotated_toric",
    "toric_4d",
    "tesseract",
    "cubical_complex",
    "tetrahedron",
    "semi_hyperbolic",
    "dual",
    "hasse_graph",
]


def _incidence(rows: int, cols: int, pairs) -> sp.csr_array:
    """Sparse 0/1 matrix from (row, col) pairs; repeated pairs cancel mod 2."""
    pairs = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
    m = sp.coo_array(
        (np.ones(len(pairs), dtype=np.int64), (pairs[:, 0], pairs[:, 1])), shape=(rows, cols)
    ).tocsr()
    m.sum_duplicates()
    m.data %= 2
    m.eliminate_zeros()
    return m.astype(np.uint8)


@dataclass(frozen=True, eq=False)
class ChainComplex:
    """Levels ``0..D`` of cells and the boundary maps between them.

    ``boundaries[i - 1]`` is the boundary map of level ``i``. ``labels`` may
    hold one integer array per level describing each cell (lattice
    coordinates for the hypercubic families).
    """

    sizes: tuple[int, ...]
    boundaries: tuple[sp.csr_array, ...]
    labels: tuple[np.ndarray | None, ...] | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.boundaries) != len(self.sizes) - 1:
            raise ValueError("need exactly one boundary map per level above 0")
        for i, b in enumerate(self.boundaries, start=1):
            if b.shape != (self.sizes[i - 1], self.sizes[i]):
                raise ValueError(
                    f"boundary of level {i} has shape {b.shape}, "
                    f"expected {(self.sizes[i - 1], self.sizes[i])}"
                )

    @property
    def dimension(self) -> int:
        return len(self.sizes) - 1

    def size(self, i: int) -> int:
        return self.sizes[i]

    def boundary(self, i: int) -> sp.csr_array:
        """Boundary map of level ``i`` (``1 <= i <= D``)."""
        if not 1 <= i <= self.dimension:
            raise ValueError(f"no boundary map at level {i}")
        return self.boundaries[i - 1]

    def coboundary(self, i: int) -> sp.csr_array:
        """Coboundary from level ``i`` to ``i + 1``, the transpose of ``boundary(i + 1)``."""
        return self.boundary(i + 1).T.tocsr()

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * n for i, n in enumerate(self.sizes))

    def betti(self, i: int) -> int:
        """dim H_i = dim ker(boundary i) - rank(boundary i+1)."""
        n = self.sizes[i]
        r_in = gf2.rank(self.boundary(i)) if i >= 1 else 0
        r_out = gf2.rank(self.boundary(i + 1)) if i < self.dimension else 0
        return n - r_in - r_out

    def check(self, strict: bool = True) -> None:
        """Raise ``ValueError`` unless boundary-of-boundary vanishes.

        With ``strict`` every diamond of the Hasse diagram must also hold
        exactly zero or two middle cells; otherwise any even count passes
        (tiny tori where one face meets a vertex through several edges).
        """
        for i in range(1, self.dimension):
            prod = (self.boundary(i).astype(np.int64) @ self.boundary(i + 1).astype(np.int64)).tocoo()
            bad = prod.data % 2 == 1
            if strict:
                bad |= (prod.data != 0) & (prod.data != 2)
            if bad.any():
                raise ValueError(
                    f"levels {i + 1}->{i - 1}: a cell pair shares {int(prod.data[bad][0])} middle cells"
                )

    def to_dict(self, qubit_level: int | None = None) -> dict:
        out: dict[str, Any] = {
            "dimension": self.dimension,
            "levels": [int(n) for n in self.sizes],
            "boundaries": [_pairs(b) for b in self.boundaries],
        }
        if qubit_level is not None:
            out["qubit_level"] = int(qubit_level)
        out["meta"] = self.meta
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ChainComplex":
        try:
            sizes = tuple(int(n) for n in data["levels"])
            bds = data["boundaries"]
            if int(data["dimension"]) != len(sizes) - 1 or len(bds) != len(sizes) - 1:
                raise ValueError("dimension does not match the number of levels")
            boundaries = tuple(
                _incidence(sizes[i], sizes[i + 1], pairs) for i, pairs in enumerate(bds)
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed complex artifact: {exc}") from exc
        return cls(sizes, boundaries, None, dict(data.get("meta", {})))

    def to_json(self, qubit_level: int | None = None) -> str:
        return json.dumps(self.to_dict(qubit_level), separators=(",", ":"))

    def relabeled(self, perms: Sequence[np.ndarray]) -> "ChainComplex":
        """Complex with cells of level ``i`` renumbered: old cell ``j`` becomes ``perms[i][j]``."""
        inv = [np.argsort(p) for p in perms]
        bds = tuple(
            b[inv[i - 1]][:, inv[i]].tocsr() for i, b in enumerate(self.boundaries, start=1)
        )
        return ChainComplex(self.sizes, bds, None, dict(self.meta))


def _pairs(b: sp.csr_array) -> list[list[int]]:
    coo = b.tocoo()
    order = np.lexsort((coo.col, coo.row))
    return [[int(r), int(c)] for r, c in zip(coo.row[order], coo.col[order])]


# --- hypercubic complexes ---------------------------------------------------

# axis kinds: a periodic axis of length L has vertices and edges 0..L-1;
# an open axis of length L has vertices 0..L and edges 0..L-1; a relative
# axis of length L is an open axis with its two end vertices removed
_KINDS = ("periodic", "open", "relative")


def _axis_positions(kind: str, length: int):
    if kind == "periodic":
        return list(range(length)), list(range(length))
    if kind == "open":
        return list(range(length + 1)), list(range(length))
    if kind == "relative":
        return list(range(1, length)), list(range(length))
    raise ValueError(f"unknown axis kind {kind!r}")


def cubical_complex(axes: Sequence[tuple[str, int]], meta: dict | None = None) -> ChainComplex:
    """Product cellulation of one-dimensional axes.

    Each axis is ``(kind, length)`` with kind ``periodic``, ``open`` or
    ``relative``. A cell is a base coordinate plus the set of axes along
    which it extends. Cells of each level are numbered lexicographically by
    (coordinates, directions). Labels store ``coords + [direction bitmask]``.
    """
    D = len(axes)
    verts, edges = zip(*(_axis_positions(k, L) for k, L in axes))
    vert_sets = [set(v) for v in verts]

    def endpoints(a: int, j: int):
        kind, L = axes[a]
        ends = (j, (j + 1) % L) if kind == "periodic" else (j, j + 1)
        return [e for e in ends if e in vert_sets[a]]

    cells: list[list[tuple]] = []
    for level in range(D + 1):
        level_cells = []
        for dirs in itertools.combinations(range(D), level):
            mask = sum(1 << a for a in dirs)
            ranges = [edges[a] if a in dirs else verts[a] for a in range(D)]
            for coord in itertools.product(*ranges):
                level_cells.append((coord, mask))
        level_cells.sort()
        cells.append(level_cells)

    index = [{c: n for n, c in enumerate(level_cells)} for level_cells in cells]
    boundaries = []
    for level in range(1, D + 1):
        pairs = []
        for col, (coord, mask) in enumerate(cells[level]):
            for a in range(D):
                if not mask >> a & 1:
                    continue
                for end in endpoints(a, coord[a]):
                    face = (coord[:a] + (end,) + coord[a + 1:], mask & ~(1 << a))
                    pairs.append((index[level - 1][face], col))
        boundaries.append(_incidence(len(cells[level - 1]), len(cells[level]), pairs))
    labels = tuple(
        np.array([list(c) + [m] for c, m in level_cells], dtype=np.int64).reshape(-1, D + 1)
        for level_cells in cells
    )
    return ChainComplex(
        tuple(len(c) for c in cells), tuple(boundaries), labels, dict(meta or {})
    )


def toric_2d(L: int) -> ChainComplex:
    """Square tessellation of the torus with ``L x L`` vertices."""
    if L < 2:
        raise ValueError("toric_2d needs L >= 2")
    return cubical_complex([("periodic", L)] * 2, {"family": "toric2d", "parameters": {"L": L}})


def toric_4d(L: int) -> ChainComplex:
    """Hypercubic tessellation of the 4-torus; level i has C(4,i) L^4 cells."""
    if L < 2:
        raise ValueError("toric_4d needs L >= 2")
    return cubical_complex([("periodic", L)] * 4, {"family": "toric4d", "parameters": {"L": L}})


def tesseract(L: int) -> ChainComplex:
    """Hypercubic ``L x L x (L-1) x (L-1)`` box relative to its x- and y-boundary hyperplanes.

    Cells lying in ``x in {0, L}`` or ``y in {0, L}`` are dropped, so the
    complex computes relative homology: dim H_2 = 1 and dim H_1 = 0.
    """
    if L < 2:
        raise ValueError("tesseract needs L >= 2")
    axes = [("relative", L), ("relative", L), ("open", L - 1), ("open", L - 1)]
    return cubical_complex(axes, {"family": "tesseract", "parameters": {"L": L}})


def rotated_toric(L: int) -> ChainComplex:
    """Square tessellation of the ``L x L`` torus rotated by 45 degrees.

    Vertices sit at ``(i, j)`` with ``i + j`` even and faces at ``i + j`` odd;
    edges join diagonal neighbours. There are ``L**2`` edges and the shortest
    essential cycle has length ``L``.
    """
    if L < 2 or L % 2:
        raise ValueError("rotated_toric needs an even L >= 2")
    vpos = [(i, j) for i in range(L) for j in range(L) if (i + j) % 2 == 0]
    fpos = [(i, j) for i in range(L) for j in range(L) if (i + j) % 2 == 1]
    vidx = {v: n for n, v in enumerate(vpos)}
    # edge (i, j, d) runs from vertex (i, j) to (i + 1, j + d), d = +1 (0) or -1 (1)
    epos = [(i, j, d) for (i, j) in vpos for d in (0, 1)]
    eidx = {e: n for n, e in enumerate(epos)}

    def edge(i, j, d):
        return eidx[(i % L, j % L, d)]

    d1 = []
    for n, (i, j, d) in enumerate(epos):
        step = 1 if d == 0 else -1
        d1.append((vidx[(i, j)], n))
        d1.append((vidx[((i + 1) % L, (j + step) % L)], n))
    d2 = []
    for n, (i, j) in enumerate(fpos):
        # corners W=(i-1, j), N=(i, j+1), E=(i+1, j), S=(i, j-1)
        for e in (edge(i - 1, j, 0), edge(i - 1, j, 1), edge(i, j - 1, 0), edge(i, j + 1, 1)):
            d2.append((e, n))
    sizes = (len(vpos), len(epos), len(fpos))
    labels = (
        np.array(vpos, dtype=np.int64),
        np.array(epos, dtype=np.int64),
        np.array(fpos, dtype=np.int64),
    )
    return ChainComplex(
        sizes,
        (_incidence(sizes[0], sizes[1], d1), _incidence(sizes[1], sizes[2], d2)),
        labels,
        {"family": "rotated", "parameters": {"L": L}},
    )


def tetrahedron() -> ChainComplex:
    """Boundary of a tetrahedron: a 2-sphere with 4 vertices, 6 edges, 4 faces."""
    edges = list(itertools.combinations(range(4), 2))
    faces = list(itertools.combinations(range(4), 3))
    d1 = [(v, n) for n, e in enumerate(edges) for v in e]
    d2 = [
        (edges.index(pair), n)
        for n, f in enumerate(faces)
        for pair in itertools.combinations(f, 2)
    ]
    return ChainComplex(
        (4, 6, 4),
        (_incidence(4, 6, d1), _incidence(6, 4, d2)),
        None,
        {"family": "tetrahedron", "parameters": {}},
    )


def dual(c: ChainComplex) -> ChainComplex:
    """Dual complex: level ``i`` becomes level ``D - i`` and boundaries are transposed."""
    D = c.dimension
    sizes = tuple(reversed(c.sizes))
    bds = tuple(c.boundary(D - i + 1).T.tocsr() for i in range(1, D + 1))
    labels = tuple(reversed(c.labels)) if c.labels is not None else None
    meta = dict(c.meta)
    meta["dual"] = not meta.get("dual", False)
    return ChainComplex(sizes, bds, labels, meta)


# --- semi-hyperbolic subdivision -------------------------------------------


def _edge_ends(d1: sp.csr_array) -> np.ndarray:
    csc = d1.tocsc()
    ends = np.zeros((d1.shape[1], 2), dtype=np.int64)
    for e in range(d1.shape[1]):
        vs = csc.indices[csc.indptr[e]:csc.indptr[e + 1]]
        if vs.size != 2:
            raise ValueError(f"edge {e} does not have two distinct endpoints")
        ends[e] = np.sort(vs)
    return ends


def _square_cycle(face_edges, ends) -> tuple[list[int], list[int]]:
    """Corners v0..v3 and edges e01, e12, e23, e30 of a square face, in cyclic order."""
    first = face_edges[0]
    corners = [int(ends[first][0]), int(ends[first][1])]
    order = [first]
    remaining = list(face_edges[1:])
    while remaining:
        cur = corners[-1]
        nxt = [e for e in remaining if cur in ends[e]]
        if len(nxt) != 1 and len(remaining) > 1:
            raise ValueError("face boundary is not a simple 4-cycle")
        e = nxt[0]
        remaining.remove(e)
        order.append(e)
        a, b = ends[e]
        corners.append(int(b if a == cur else a))
    if corners[-1] != corners[0] or len(set(corners[:4])) != 4:
        raise ValueError("face boundary is not a simple 4-cycle")
    return corners[:4], order


def semi_hyperbolic(base: ChainComplex, l: int) -> ChainComplex:
    """Replace every square face of a 2-complex by an ``l x l`` grid of squares.

    Edge and face counts grow by ``l**2``; the vertex count becomes
    ``|V| + |F| (l**2 - 1)`` so the Euler characteristic, and with it the
    homology, is unchanged.
    """
    if base.dimension != 2:
        raise ValueError("semi_hyperbolic needs a 2-dimensional complex")
    if l < 1:
        raise ValueError("subdivision l must be >= 1")
    d2 = base.boundary(2).tocsc()
    face_edges = [d2.indices[d2.indptr[f]:d2.indptr[f + 1]].tolist() for f in range(base.sizes[2])]
    if any(len(fe) != 4 for fe in face_edges):
        raise ValueError("every face of the base complex must have exactly 4 edges")
    meta = dict(base.meta)
    meta["semi_hyperbolic"] = {"l": l, "base": base.meta}
    if l == 1:
        return ChainComplex(base.sizes, base.boundaries, base.labels, meta)

    nV, nE, nF = base.sizes
    ends = _edge_ends(base.boundary(1))

    # vertices: originals, then l-1 per edge, then (l-1)^2 per face
    def edge_vertex(e, t):  # t-th interior point of edge e counted from its lower endpoint
        return nV + e * (l - 1) + (t - 1)

    def face_vertex(f, u, w):
        return nV + nE * (l - 1) + f * (l - 1) ** 2 + (w - 1) * (l - 1) + (u - 1)

    n_vertices = nV + nE * (l - 1) + nF * (l - 1) ** 2
    # edges: l segments per original edge, then 2 l (l-1) interior edges per face
    n_interior = 2 * l * (l - 1)

    def segment(e, s):  # segment s of edge e counted from its lower endpoint
        return e * l + s

    def interior_edge(f, j):
        return nE * l + f * n_interior + j

    n_edges = nE * l + nF * n_interior
    n_faces = nF * l * l

    d1_pairs = []
    for e in range(nE):
        p, q = ends[e]
        pts = [p] + [edge_vertex(e, t) for t in range(1, l)] + [q]
        for s in range(l):
            d1_pairs.append((pts[s], segment(e, s)))
            d1_pairs.append((pts[s + 1], segment(e, s)))

    d2_pairs = []
    for f in range(nF):
        (v0, v1, v2, v3), (e01, e12, e23, e30) = _square_cycle(face_edges[f], ends)
        # sides as (edge, start corner); positions measured from the start corner
        sides = {"bottom": (e01, v0), "right": (e12, v1), "top": (e23, v3), "left": (e30, v0)}

        def along(side, a):
            e, start = sides[side]
            return a if ends[e][0] == start else l - a

        def point(u, w):
            if (u, w) == (0, 0):
                return v0
            if (u, w) == (l, 0):
                return v1
            if (u, w) == (l, l):
                return v2
            if (u, w) == (0, l):
                return v3
            if w == 0:
                return edge_vertex(sides["bottom"][0], along("bottom", u))
            if w == l:
                return edge_vertex(sides["top"][0], along("top", u))
            if u == 0:
                return edge_vertex(sides["left"][0], along("left", w))
            if u == l:
                return edge_vertex(sides["right"][0], along("right", w))
            return face_vertex(f, u, w)

        def seg_on(side, a):  # boundary segment between positions a and a+1 from the start corner
            e, start = sides[side]
            return segment(e, a if ends[e][0] == start else l - 1 - a)

        hid = {}
        vid = {}
        j = 0
        for w in range(1, l):
            for u in range(l):
                hid[(u, w)] = interior_edge(f, j)
                j += 1
        for u in range(1, l):
            for w in range(l):
                vid[(u, w)] = interior_edge(f, j)
                j += 1
        for w in range(1, l):
            for u in range(l):
                e = hid[(u, w)]
                d1_pairs.append((point(u, w), e))
                d1_pairs.append((point(u + 1, w), e))
        for u in range(1, l):
            for w in range(l):
                e = vid[(u, w)]
                d1_pairs.append((point(u, w), e))
                d1_pairs.append((point(u, w + 1), e))

        def horizontal(u, w):
            if w == 0:
                return seg_on("bottom", u)
            if w == l:
                return seg_on("top", u)
            return hid[(u, w)]

        def vertical(u, w):
            if u == 0:
                return seg_on("left", w)
            if u == l:
                return seg_on("right", w)
            return vid[(u, w)]

        for w in range(l):
            for u in range(l):
                sq = f * l * l + w * l + u
                for e in (horizontal(u, w), horizontal(u, w + 1), vertical(u, w), vertical(u + 1, w)):
                    d2_pairs.append((e, sq))

    return ChainComplex(
        (n_vertices, n_edges, n_faces),
        (
            _incidence(n_vertices, n_edges, d1_pairs),
            _incidence(n_edges, n_faces, d2_pairs),
        ),
        None,
        meta,
    )


def hasse_graph(c: ChainComplex):
    """Hasse diagram as a networkx graph; nodes are ``(level, index)`` with a ``level`` attribute."""
    import networkx as nx

    g = nx.Graph()
    for i, n in enumerate(c.sizes):
        g.add_nodes_from(((i, j) for j in range(n)), level=i)
    for i in range(1, c.dimension + 1):
        coo = c.boundary(i).tocoo()
        g.add_edges_from(((i - 1, int(r)), (i, int(col))) for r, col in zip(coo.row, coo.col))
    return g
