"""Reflection groups, coset enumeration and quotient surfaces.

The triangle group ``G_{r,s} = <a, b, c | a^2, b^2, c^2, (ab)^r, (bc)^s, (ac)^2>``
acts on the {r,s} tessellation of the hyperbolic plane. Adding relators that
generate a normal subgroup N and enumerating cosets of the trivial subgroup
gives the regular permutation representation of G/N; faces, edges and
vertices of the quotient surface are the orbits of the dihedral subgroups
<a,b>, <a,c> and <b,c>.

Relators can be written with ``r``/``R`` for the face rotation ``ab`` and its
inverse ``ba``, and ``s``/``S`` for the vertex rotation ``bc`` and ``cb``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complexes import ChainComplex, _incidence

__all__ = [
    "GroupPresentation",
    "CosetTable",
    "CosetOverflow",
    "parse_relators",
    "parse_word",
    "to_reflections",
    "to_rotations",
    "triangle_group",
    "rotation_group",
    "enumerate_cosets",
    "enumerate_quotient",
    "enumerate_rotation_quotient",
    "uses_reflections",
    "check_fixed_point_free",
    "build_surface_complex",
    "surface_from_relators",
    "appendix_a_presentation",
    "build_appendix_a_surface",
    "TABLE_RELATORS",
]

DEFAULT_MAX_COSETS = 10**6


class CosetOverflow(RuntimeError):
    """Coset enumeration hit its cap before closing; the quotient may be infinite."""


# --- words -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<letter>[abcrRsS])|(?P<open>\()|(?P<close>\))(?:\^(?P<exp>-?\d+))?|(?P<pow>\^-?\d+))")


def _invert(word: str) -> str:
    swap = {"r": "R", "R": "r", "s": "S", "S": "s"}
    return "".join(swap.get(x, x) for x in reversed(word))


def parse_word(text: str) -> str:
    """Expand one relator into a flat string over ``a b c r R s S``.

    Parenthesized groups take an optional exponent ``^k``; a negative ``k``
    repeats the inverse. A bare letter may also carry an exponent (``r^3``).
    Whitespace is ignored.
    """
    stack: list[list[str]] = [[]]
    pos = 0
    text = text.strip()
    if not text:
        raise ValueError("empty relator")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse relator {text!r} at position {pos}")
        pos = m.end()
        if m["letter"]:
            stack[-1].append(m["letter"])
        elif m["open"]:
            stack.append([])
        elif m["close"]:
            if len(stack) == 1:
                raise ValueError(f"unbalanced ')' in {text!r}")
            group = "".join(stack.pop())
            k = int(m["exp"]) if m["exp"] is not None else 1
            stack[-1].append(group * k if k >= 0 else _invert(group) * -k)
        else:
            if not stack[-1]:
                raise ValueError(f"exponent without a base in {text!r}")
            k = int(m["pow"][1:])
            last = stack[-1].pop()
            stack[-1].append(last * k if k >= 0 else _invert(last) * -k)
    if len(stack) != 1:
        raise ValueError(f"unbalanced '(' in {text!r}")
    word = "".join(stack[0])
    if not word:
        raise ValueError(f"relator {text!r} is empty")
    return word


def parse_relators(text: str) -> list[str]:
    """Split a comma-separated relator list and expand each word."""
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("no relators given")
    return [parse_word(p) for p in parts]


def to_reflections(word: str) -> str:
    """Rewrite a word over ``a b c r R s S`` into the reflections ``a b c``."""
    table = {"a": "a", "b": "b", "c": "c", "r": "ab", "R": "ba", "s": "bc", "S": "cb"}
    return "".join(table[x] for x in word)


def to_rotations(word: str) -> str:
    """Rewrite an even-length reflection word into ``r R s S``.

    Consecutive letter pairs are replaced by rotations: ``ab = r``,
    ``bc = s``, ``ac = rs``, and the reverses by inverses. Odd words
    (glide reflections) are not orientation preserving and raise.
    """
    w = to_reflections(word)
    if len(w) % 2:
        raise ValueError("word is not orientation preserving")
    pairs = {"ab": "r", "ba": "R", "bc": "s", "cb": "S", "ac": "rs", "ca": "SR", "aa": "", "bb": "", "cc": ""}
    return "".join(pairs[w[i:i + 2]] for i in range(0, len(w), 2))


# --- presentations and enumeration ------------------------------------------


@dataclass(frozen=True)
class GroupPresentation:
    """Generators with inverse names and relators as words over generator names.

    ``inverses[g]`` is the name of the inverse of ``g``; an involution is
    its own inverse. Every relator is a non-empty sequence of names.
    """

    generators: tuple[str, ...]
    inverses: dict
    relators: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        for w in self.relators:
            if not w:
                raise ValueError("relators must be non-empty")
            for x in w:
                if x not in self.inverses:
                    raise ValueError(f"unknown generator {x!r} in relator")


def triangle_group(r: int, s: int) -> GroupPresentation:
    gens = ("a", "b", "c")
    rels = (("a", "a"), ("b", "b"), ("c", "c"), ("a", "b") * r, ("b", "c") * s, ("a", "c") * 2)
    return GroupPresentation(gens, {g: g for g in gens}, rels)


def rotation_group(r: int, s: int) -> GroupPresentation:
    """Orientation-preserving subgroup ``<r, s | r^r, s^s, (rs)^2>``."""
    gens = ("r", "s")
    inv = {"r": "R", "R": "r", "s": "S", "S": "s"}
    rels = (("r",) * r, ("s",) * s, ("r", "s") * 2)
    return GroupPresentation(gens, inv, rels)


@dataclass(frozen=True, eq=False)
class CosetTable:
    """Permutation action of the generators on the cosets (right multiplication).

    ``perms[j][x]`` is the coset ``x * generators[j]``. Coset 0 is the
    identity coset.
    """

    generators: tuple[str, ...]
    perms: np.ndarray
    inverses: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(self.perms.shape[1])

    def gen_index(self, name: str) -> int:
        return self.generators.index(name)

    def _perm(self, name: str) -> np.ndarray:
        if name in self.generators:
            return self.perms[self.generators.index(name)]
        for g, inv in self.inverses.items():
            if inv == name:
                return np.argsort(self.perms[self.generators.index(g)])
        raise KeyError(f"unknown generator {name!r}")

    def act(self, coset: int, word: Sequence[str]) -> int:
        for x in word:
            coset = int(self._perm(x)[coset])
        return coset

    def permutation(self, word: Sequence[str]) -> np.ndarray:
        p = np.arange(self.size)
        for x in word:
            p = self._perm(x)[p]
        return p

    def is_identity(self, word: Sequence[str]) -> bool:
        return bool(np.array_equal(self.permutation(word), np.arange(self.size)))


def enumerate_cosets(
    pres: GroupPresentation,
    extra_relators: Sequence[Sequence[str]] = (),
    max_cosets: int = DEFAULT_MAX_COSETS,
) -> CosetTable:
    """Todd-Coxeter enumeration of the cosets of the trivial subgroup.

    Relator-table (HLT) filling: each live coset in ascending order is
    scanned through every relator in input order, defining new cosets as
    needed; coincidences are merged towards the smaller label. The result is
    compacted and renumbered in ascending order.
    """
    if max_cosets < 1:
        raise ValueError("max_cosets must be >= 1")
    names = list(pres.generators)
    for g in pres.generators:
        inv = pres.inverses[g]
        if inv != g and inv not in names:
            names.append(inv)
    col = {x: i for i, x in enumerate(names)}
    inv = [col[pres.inverses[x]] for x in names]
    ncols = len(names)
    rels = []
    for w in list(pres.relators) + [tuple(w) for w in extra_relators]:
        if not w:
            raise ValueError("relators must be non-empty")
        try:
            rels.append([col[x] for x in w])
        except KeyError as exc:
            raise ValueError(f"unknown generator {exc.args[0]!r} in relator") from None

    table: list[list[int]] = [[-1] * ncols]
    parent = [0]

    def define(c: int, x: int) -> None:
        d = len(table)
        if d >= max_cosets:
            raise CosetOverflow(
                f"more than {max_cosets} cosets defined; the quotient may be infinite"
            )
        table.append([-1] * ncols)
        parent.append(d)
        table[c][x] = d
        table[d][inv[x]] = c

    def rep(c: int) -> int:
        root = c
        while parent[root] != root:
            root = parent[root]
        while parent[c] != root:
            parent[c], c = root, parent[c]
        return root

    def merge(k: int, l: int, queue: list[int]) -> None:
        k, l = rep(k), rep(l)
        if k != l:
            lo, hi = (k, l) if k < l else (l, k)
            parent[hi] = lo
            queue.append(hi)

    def coincidence(a: int, b: int) -> None:
        queue: list[int] = []
        merge(a, b, queue)
        i = 0
        while i < len(queue):
            e = queue[i]
            i += 1
            row = table[e]
            for x in range(ncols):
                f = row[x]
                if f < 0:
                    continue
                table[f][inv[x]] = -1
                e1, f1 = rep(e), rep(f)
                if table[e1][x] >= 0:
                    merge(f1, table[e1][x], queue)
                elif table[f1][inv[x]] >= 0:
                    merge(e1, table[f1][inv[x]], queue)
                else:
                    table[e1][x] = f1
                    table[f1][inv[x]] = e1

    def scan_and_fill(c: int, w: list[int]) -> None:
        f = b = c
        i, j = 0, len(w) - 1
        while True:
            while i <= j and table[f][w[i]] >= 0:
                f = table[f][w[i]]
                i += 1
            if i > j:
                if f != b:
                    coincidence(f, b)
                return
            while j >= i and table[b][inv[w[j]]] >= 0:
                b = table[b][inv[w[j]]]
                j -= 1
            if j < i:
                coincidence(f, b)
                return
            if i == j:
                table[f][w[i]] = b
                table[b][inv[w[i]]] = f
                return
            define(f, w[i])

    c = 0
    while c < len(table):
        if parent[c] == c:
            for w in rels:
                scan_and_fill(c, w)
                if parent[c] != c:
                    break
            if parent[c] == c:
                for x in range(ncols):
                    if table[c][x] < 0:
                        define(c, x)
        c += 1

    live = [k for k in range(len(table)) if parent[k] == k]
    new = {k: n for n, k in enumerate(live)}
    gens = pres.generators
    perms = np.array(
        [[new[rep(table[k][col[g]])] for k in live] for g in gens], dtype=np.int64
    ).reshape(len(gens), len(live))
    return CosetTable(tuple(gens), perms, {g: pres.inverses[g] for g in gens})


def enumerate_quotient(
    r: int,
    s: int,
    extra_relators: Sequence[str] | str,
    max_cosets: int = DEFAULT_MAX_COSETS,
) -> CosetTable:
    """Regular representation of ``G_{r,s}`` modulo the normal closure of the relators.

    ``extra_relators`` is a relator string (see :func:`parse_relators`) or a
    list of words over ``a b c r R s S``.
    """
    words = parse_relators(extra_relators) if isinstance(extra_relators, str) else list(extra_relators)
    return enumerate_cosets(
        triangle_group(r, s), [tuple(to_reflections(w)) for w in words], max_cosets
    )


def enumerate_rotation_quotient(
    r: int,
    s: int,
    extra_relators: Sequence[str] | str,
    max_cosets: int = DEFAULT_MAX_COSETS,
) -> CosetTable:
    """Regular representation of the rotation subgroup ``G+_{r,s}`` modulo the
    normal closure (in ``G+``) of orientation-preserving relators."""
    words = parse_relators(extra_relators) if isinstance(extra_relators, str) else list(extra_relators)
    return enumerate_cosets(
        rotation_group(r, s), [tuple(to_rotations(w)) for w in words], max_cosets
    )


def _is_rotation_table(table: CosetTable) -> bool:
    return table.generators == ("r", "s")


def _cell_words(table: CosetTable, a: str, b: str, c: str):
    """Generating words of the face, edge and vertex stabilizers."""
    if _is_rotation_table(table):
        return [("r",)], [("r", "s")], [("s",)]
    return [(a,), (b,)], [(a,), (c,)], [(b,), (c,)]


def check_fixed_point_free(table: CosetTable, r: int, s: int, a: str = "a", b: str = "b", c: str = "c") -> bool:
    """True when no cell stabilizer element collapses to the identity.

    For reflection tables the elements are ``a, b, c, (ab)^i (0<i<r)`` and
    ``(bc)^j (0<j<s)``; for rotation tables ``r^i``, ``s^j`` and ``rs``.
    The table is a regular representation, so an element is trivial exactly
    when it fixes the identity coset.
    """
    if _is_rotation_table(table):
        words = [("r", "s")]
        words += [("r",) * i for i in range(1, r)]
        words += [("s",) * j for j in range(1, s)]
    else:
        words = [(a,), (b,), (c,)]
        words += [(a, b) * i for i in range(1, r)]
        words += [(b, c) * j for j in range(1, s)]
    return all(table.act(0, w) != 0 for w in words)


def _orbits(table: CosetTable, words) -> np.ndarray:
    """Orbit label of every coset under the subgroup generated by ``words``;
    labels ascend with the smallest member."""
    n = table.size
    label = np.full(n, -1, dtype=np.int64)
    perms = [table.permutation(w) for w in words]
    count = 0
    for start in range(n):
        if label[start] >= 0:
            continue
        label[start] = count
        stack = [start]
        while stack:
            x = stack.pop()
            for p in perms:
                y = int(p[x])
                if label[y] < 0:
                    label[y] = count
                    stack.append(y)
        count += 1
    return label


def build_surface_complex(
    table: CosetTable,
    r: int,
    s: int,
    a: str = "a",
    b: str = "b",
    c: str = "c",
    meta: dict | None = None,
) -> ChainComplex:
    """2-complex of the quotient surface.

    Faces, edges and vertices are the orbits of ``<a,b>``, ``<a,c>`` and
    ``<b,c>`` (``<r>``, ``<rs>``, ``<s>`` for rotation tables); cells are
    incident when their orbits intersect.
    """
    if not check_fixed_point_free(table, r, s, a, b, c):
        raise ValueError("quotient acts with fixed points; cells would be degenerate")
    fw, ew, vw = _cell_words(table, a, b, c)
    face, edge, vert = _orbits(table, fw), _orbits(table, ew), _orbits(table, vw)
    nF, nE, nV = face.max() + 1, edge.max() + 1, vert.max() + 1
    d1 = sorted(set(zip(vert.tolist(), edge.tolist())))
    d2 = sorted(set(zip(edge.tolist(), face.tolist())))
    m = {"family": "coxeter", "parameters": {"r": r, "s": s, "order": table.size}}
    m.update(meta or {})
    return ChainComplex(
        (int(nV), int(nE), int(nF)),
        (_incidence(nV, nE, d1), _incidence(nE, nF, d2)),
        None,
        m,
    )


def uses_reflections(relators: Sequence[str] | str) -> bool:
    """Relators written with ``a``, ``b`` or ``c`` may contain glide reflections."""
    words = parse_relators(relators) if isinstance(relators, str) else list(relators)
    return any(ch in "abc" for w in words for ch in w)


def surface_from_relators(
    r: int, s: int, relators: Sequence[str] | str, max_cosets: int = DEFAULT_MAX_COSETS
) -> ChainComplex:
    """Build the quotient surface of the {r,s} tessellation.

    Relators written purely in rotations are closed under conjugation by
    ``G+`` and enumerated there (orientable surface); anything mentioning
    a reflection is closed in the full group ``G``.
    """
    if uses_reflections(relators):
        table = enumerate_quotient(r, s, relators, max_cosets)
    else:
        table = enumerate_rotation_quotient(r, s, relators, max_cosets)
    text = relators if isinstance(relators, str) else ",".join(relators)
    return build_surface_complex(table, r, s, meta={"relators": text})


# --- constant-distance family -----------------------------------------------


def appendix_a_presentation(r: int, L: int) -> GroupPresentation:
    """Involutions ``x, y, g1..gr`` generating a {4,r} tessellation with short translations.

    ``(g_i g_{i+r/2})^L`` and ``(g_i g_j)^2`` otherwise; ``x`` and ``y``
    generate a dihedral group of order ``2r`` permuting the ``g_i``.
    """
    if r % 2 or r < 6:
        raise ValueError("r must be even and at least 6")
    if L < 2:
        raise ValueError("L must be at least 2")
    g = [f"g{i}" for i in range(1, r + 1)]
    gens = ("x", "y", *g)
    h = r // 2
    rels: list[tuple[str, ...]] = [(x, x) for x in gens]
    for i in range(r):
        for j in range(i + 1, r):
            power = L if j - i == h else 2
            rels.append((g[i], g[j]) * power)
    rels.append(("x", "y") * r)
    for i in range(1, r + 1):
        rels.append(("x", g[i - 1], "x", g[r - i]))  # x g_i x = g_{r-i+1}
    rels.append(("y", g[0], "y", g[0]))
    rels.append(("y", g[h], "y", g[h]))
    for i in range(2, h + 1):
        rels.append(("y", g[i - 1], "y", g[r - i + 1]))  # y g_i y = g_{r-i+2}
    return GroupPresentation(gens, {x: x for x in gens}, tuple(rels))


def build_appendix_a_surface(r: int, L: int, max_cosets: int = DEFAULT_MAX_COSETS) -> ChainComplex:
    """Square-faced surface with vertex degree ``r`` and ``(r/2)(2L)^(r/2)`` edges."""
    table = enumerate_cosets(appendix_a_presentation(r, L), (), max_cosets)
    return build_surface_complex(
        table, 4, r, a="g1", b="x", c="y",
        meta={"family": "appendix_a", "parameters": {"r": r, "L": L, "order": table.size}},
    )


# Relators of the quotient surfaces used throughout the tests and demos,
# keyed by (r, s, n).
TABLE_RELATORS: dict[tuple[int, int, int], str] = {
    (5, 4, 30): "abcba(cb)^2abcb, (bac)^6, (bacba)^4",
    (5, 4, 160): "s r^2 (rS)^-2 R S^2 R^2 s R",
    (5, 4, 360): "(s r^2 s)^2 (R S^2 R)^2",
    (5, 4, 1800): "(rS)^-10, s r^2 s^2 R s (r^2 S)^2 (rS)^2 S R^2 s R",
    (5, 5, 15): "(bcba)^3, (bc(bca)^2)^2, (bc(ab)^2ca)^2",
    (5, 5, 40): "s r^2 s R S^2 R",
    (5, 5, 80): "s (rS)^2 S R^2 s R",
    (5, 5, 150): "s r^2 s^2 r S R^2 S^2 R, s (rS)^3 (Rs)^2 R",
    (5, 5, 900): "s (r^2 S^2)^2 R s R^2 s^2 R",
    (7, 7, 28): "r^3 S^2 r S",
}
