"""Local cellular-automaton decoders for the 4D toric code.

Qubits are the faces of the periodic hypercubic lattice and checks are its
edges. A face is a base vertex ``v`` plus a plane ``(i, j)``; its edges are
``(v, i)``, ``(v, j)``, ``(v + e_j, i)`` and ``(v + e_i, j)``.

Many independent trials are simulated at once: every lattice array carries
a trailing axis of ``uint64`` words and bit ``b`` of word ``w`` belongs to
trial ``64 w + b``. All rules are written with bitwise operations so a sweep
advances every trial in lockstep.

Both rules process the six plane groups in the order xy, xz, xw, yz, yw, zw.
Toom's rule flips a face when its north edge ``(v + e_j, i)`` and east edge
``(v + e_i, j)`` are violated. The DKLP rule flips a face when more than two
of its four edges are violated, and with probability 1/2 when exactly two
are; within a group it updates one colour class at a time so no two
simultaneously updated faces share an edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numba import njit

from . import gf2
from .complexes import ChainComplex
from .decode import Outcome

__all__ = [
    "PLANES",
    "CaGrid4D",
    "face_index_map",
    "edge_index_map",
    "syndrome",
    "toom_sweep",
    "dklp_sweep",
    "plane_colouring",
    "logical_parity",
    "syndrome_weight",
    "verify_correctable",
    "inject",
    "repair_syndrome_4d",
    "VerifyResult",
    "Engine",
    "neighbour_table",
    "face_colours",
]

PLANES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
_ONE = np.uint64(1)


def _roll(a: np.ndarray, shift: int, direction: int) -> np.ndarray:
    return np.roll(a, shift, axis=direction)


def syndrome(faces: np.ndarray) -> np.ndarray:
    """Edge syndrome of packed face errors: shape ``(6, L, L, L, L, W) -> (4, L, L, L, L, W)``."""
    out = np.zeros((4,) + faces.shape[1:], dtype=np.uint64)
    for p, (i, j) in enumerate(PLANES):
        f = faces[p]
        out[i] ^= f ^ _roll(f, 1, j)
        out[j] ^= f ^ _roll(f, 1, i)
    return out


def _apply_flip(faces, synd, p, flip):
    i, j = PLANES[p]
    faces[p] ^= flip
    synd[i] ^= flip ^ _roll(flip, 1, j)
    synd[j] ^= flip ^ _roll(flip, 1, i)


def toom_group(faces: np.ndarray, synd: np.ndarray, p: int) -> None:
    """Toom's rule on every face of plane group ``p`` in parallel; updates ``synd`` in place."""
    i, j = PLANES[p]
    flip = _roll(synd[i], -1, j) & _roll(synd[j], -1, i)
    _apply_flip(faces, synd, p, flip)


def toom_sweep(faces: np.ndarray, synd: np.ndarray) -> None:
    for p in range(6):
        toom_group(faces, synd, p)


def plane_colouring(L: int) -> tuple[np.ndarray, int]:
    """Colour of each ``(x_i, x_j)`` position so faces sharing an edge differ.

    Even ``L`` uses the checkerboard. Odd ``L`` colours each axis
    ``0, 1, 0, 1, ..., 2`` and adds the two colours mod 3.
    """
    if L % 2 == 0:
        c = np.arange(L) % 2
        return (c[:, None] + c[None, :]) % 2, 2
    c = np.arange(L) % 2
    c[-1] = 2
    return (c[:, None] + c[None, :]) % 3, 3


def _colour_masks(L: int, W: int) -> list[list[np.ndarray]]:
    """Word masks per plane and colour, broadcastable against ``(L, L, L, L, W)``."""
    col, ncol = plane_colouring(L)
    full = np.uint64(0xFFFFFFFFFFFFFFFF)
    masks = []
    for i, j in PLANES:
        per = []
        for k in range(ncol):
            shape = [1, 1, 1, 1, 1]
            shape[i] = L
            shape[j] = L
            m = np.where(col == k, full, np.uint64(0)).astype(np.uint64)
            per.append(m.reshape(shape))
        masks.append(per)
    return masks


def dklp_group(faces, synd, p, coins, masks) -> None:
    """DKLP majority rule on plane group ``p``.

    ``coins(shape)`` returns fresh uniformly random ``uint64`` words; each
    colour class draws its own.
    """
    i, j = PLANES[p]
    for mask in masks[p]:
        a = synd[i]
        b = synd[j]
        c = _roll(synd[i], -1, j)
        d = _roll(synd[j], -1, i)
        ge3 = (a & b & (c | d)) | (c & d & (a | b))
        ge2 = (a & b) | (a & c) | (a & d) | (b & c) | (b & d) | (c & d)
        eq2 = ge2 & ~ge3
        flip = (ge3 | (eq2 & coins(a.shape))) & mask
        _apply_flip(faces, synd, p, flip)


def dklp_sweep(faces, synd, coins, masks=None) -> None:
    if masks is None:
        masks = _colour_masks(faces.shape[1], faces.shape[-1])
    for p in range(6):
        dklp_group(faces, synd, p, coins, masks)


def syndrome_weight(synd: np.ndarray) -> np.ndarray:
    """Number of violated edges per trial (length ``64 W``)."""
    W = synd.shape[-1]
    bits = np.unpackbits(synd.reshape(-1, W).view(np.uint8), axis=1, bitorder="little")
    return bits.sum(axis=0, dtype=np.int64)


def logical_parity(faces: np.ndarray) -> np.ndarray:
    """Per-word bitmask of trials whose residual cycle is homologically nontrivial.

    The X-logical paired with the ij sheet is the set of ij-faces with
    ``x_i = 0`` and ``x_j = 0``; a residual fails when any of the six
    overlaps is odd.
    """
    out = np.zeros(faces.shape[-1], dtype=np.uint64)
    for p, (i, j) in enumerate(PLANES):
        idx = [slice(None)] * 5
        idx[i] = 0
        idx[j] = 0
        sl = faces[p][tuple(idx)]
        out |= np.bitwise_xor.reduce(sl.reshape(-1, faces.shape[-1]), axis=0)
    return out


def _word_bits(words: np.ndarray) -> np.ndarray:
    return np.unpackbits(words.view(np.uint8), bitorder="little").astype(bool)


# --- compiled kernels ----------------------------------------------------------
#
# Same rules on arrays viewed as ``(6, V, W)`` faces and ``(4, V, W)`` edges
# with ``V = L^4`` sites in C order; ``nbr[d, v]`` is the site ``v + e_d``.
# The numpy functions above are the reference they are tested against.

_PI = np.array([i for i, _ in PLANES], dtype=np.int64)
_PJ = np.array([j for _, j in PLANES], dtype=np.int64)


def neighbour_table(L: int) -> np.ndarray:
    grid = np.arange(L**4).reshape(L, L, L, L)
    return np.stack([np.roll(grid, -1, axis=d).reshape(-1) for d in range(4)])


def face_colours(L: int) -> tuple[np.ndarray, int]:
    """Colour class of each face ``(p, v)`` under :func:`plane_colouring`."""
    col, ncol = plane_colouring(L)
    x = np.indices((L, L, L, L)).reshape(4, -1)
    return np.stack([col[x[i], x[j]] for i, j in PLANES]).astype(np.int64), ncol


@njit(cache=True)
def _nb_syndrome(faces, nbr):
    _, V, W = faces.shape
    out = np.zeros((4, V, W), dtype=np.uint64)
    for p in range(6):
        i = _PI[p]
        j = _PJ[p]
        for v in range(V):
            vi = nbr[i, v]
            vj = nbr[j, v]
            for w in range(W):
                f = faces[p, v, w]
                if f:
                    out[i, v, w] ^= f
                    out[i, vj, w] ^= f
                    out[j, v, w] ^= f
                    out[j, vi, w] ^= f
    return out


@njit(cache=True)
def _nb_flip(faces, synd, nbr, p, flip):
    i = _PI[p]
    j = _PJ[p]
    V, W = flip.shape
    for v in range(V):
        vi = nbr[i, v]
        vj = nbr[j, v]
        for w in range(W):
            f = flip[v, w]
            if f:
                faces[p, v, w] ^= f
                synd[i, v, w] ^= f
                synd[i, vj, w] ^= f
                synd[j, v, w] ^= f
                synd[j, vi, w] ^= f


@njit(cache=True)
def _nb_toom_sweep(faces, synd, nbr, buf):
    _, V, W = faces.shape
    for p in range(6):
        i = _PI[p]
        j = _PJ[p]
        for v in range(V):
            vi = nbr[i, v]
            vj = nbr[j, v]
            for w in range(W):
                buf[v, w] = synd[i, vj, w] & synd[j, vi, w]
        _nb_flip(faces, synd, nbr, p, buf)


@njit(cache=True)
def _nb_dklp_sweep(faces, synd, nbr, colours, ncol, coins, buf):
    """``coins`` has shape ``(6, ncol, V, W)``: one fresh word per face and class."""
    _, V, W = faces.shape
    for p in range(6):
        i = _PI[p]
        j = _PJ[p]
        for k in range(ncol):
            for v in range(V):
                if colours[p, v] != k:
                    for w in range(W):
                        buf[v, w] = 0
                    continue
                vi = nbr[i, v]
                vj = nbr[j, v]
                for w in range(W):
                    a = synd[i, v, w]
                    b = synd[j, v, w]
                    c = synd[i, vj, w]
                    d = synd[j, vi, w]
                    ge3 = (a & b & (c | d)) | (c & d & (a | b))
                    ge2 = (a & b) | (a & c) | (a & d) | (b & c) | (b & d) | (c & d)
                    buf[v, w] = ge3 | (ge2 & ~ge3 & coins[p, k, v, w])
            _nb_flip(faces, synd, nbr, p, buf)


_DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
_DEBRUIJN_TABLE = np.zeros(64, dtype=np.int64)
for _b in range(64):
    _DEBRUIJN_TABLE[((1 << _b) * 0x03F79D71B4CB0A89 % 2**64) >> 58] = _b


@njit(cache=True)
def _nb_weights(synd, out):
    """Per-trial popcount: ``out[64 w + b]`` counts bit ``b`` over all words ``w``."""
    W = synd.shape[-1]
    flat = synd.reshape(-1, W)
    out[:] = 0
    for r in range(flat.shape[0]):
        for w in range(W):
            x = flat[r, w]
            base = 64 * w
            while x:
                low = x & (~x + np.uint64(1))
                out[base + _DEBRUIJN_TABLE[(low * _DEBRUIJN) >> np.uint64(58)]] += 1
                x ^= low


@njit(cache=True)
def _nb_count(S, cnt):
    cnt[:] = 0
    for r in range(S.shape[0]):
        for v in range(S.shape[1]):
            x = S[r, v]
            while x:
                low = x & (~x + np.uint64(1))
                cnt[_DEBRUIJN_TABLE[(low * _DEBRUIJN) >> np.uint64(58)]] += 1
                x ^= low


@njit(cache=True)
def _nb_flip1(F, S, nbr, p, B):
    i = _PI[p]
    j = _PJ[p]
    for v in range(B.shape[0]):
        f = B[v]
        if f:
            F[p, v] ^= f
            S[i, v] ^= f
            S[i, nbr[j, v]] ^= f
            S[j, v] ^= f
            S[j, nbr[i, v]] ^= f


@njit(cache=True)
def _nb_random_word():
    hi = np.uint64(np.random.randint(0, 2**32))
    lo = np.uint64(np.random.randint(0, 2**32))
    return (hi << np.uint64(32)) | lo


@njit(cache=True)
def _nb_verify(faces, nbr, colours, ncol, dklp, v_max, active, logical_sites, seed):
    """Word-by-word perfect-syndrome relaxation; see :func:`verify_correctable`."""
    _, V, W = faces.shape
    if dklp:
        np.random.seed(seed)
    succ = np.zeros(W, dtype=np.uint64)
    logi = np.zeros(W, dtype=np.uint64)
    stk = np.zeros(W, dtype=np.uint64)
    F = np.empty((6, V), dtype=np.uint64)
    S = np.empty((4, V), dtype=np.uint64)
    prev = np.empty((4, V), dtype=np.uint64)
    B = np.empty(V, dtype=np.uint64)
    cnt = np.zeros(64, dtype=np.int64)
    best = np.zeros(64, dtype=np.int64)
    since = np.zeros(64, dtype=np.int64)
    most = 0
    one = np.uint64(1)
    for w in range(W):
        S[:] = 0
        for p in range(6):
            i = _PI[p]
            j = _PJ[p]
            for v in range(V):
                f = faces[p, v, w]
                F[p, v] = f
                if f:
                    S[i, v] ^= f
                    S[i, nbr[j, v]] ^= f
                    S[j, v] ^= f
                    S[j, nbr[i, v]] ^= f
        _nb_count(S, cnt)
        clean = np.uint64(0)
        for b in range(64):
            best[b] = cnt[b]
            since[b] = 0
            if cnt[b] == 0:
                clean |= one << np.uint64(b)
        stuck = np.uint64(0)
        running = active[w] & ~clean
        sweeps = 0
        while running:
            if dklp:
                for p in range(6):
                    i = _PI[p]
                    j = _PJ[p]
                    for k in range(ncol):
                        for v in range(V):
                            B[v] = 0
                            if colours[p, v] != k:
                                continue
                            a = S[i, v]
                            b_ = S[j, v]
                            c = S[i, nbr[j, v]]
                            d = S[j, nbr[i, v]]
                            ge3 = (a & b_ & (c | d)) | (c & d & (a | b_))
                            ge2 = (a & b_) | (a & c) | (a & d) | (b_ & c) | (b_ & d) | (c & d)
                            eq2 = ge2 & ~ge3
                            if eq2:
                                eq2 &= _nb_random_word()
                            B[v] = ge3 | eq2
                        _nb_flip1(F, S, nbr, p, B)
            else:
                prev[:] = S
                for p in range(6):
                    i = _PI[p]
                    j = _PJ[p]
                    for v in range(V):
                        B[v] = S[i, nbr[j, v]] & S[j, nbr[i, v]]
                    _nb_flip1(F, S, nbr, p, B)
            sweeps += 1
            _nb_count(S, cnt)
            moved = np.uint64(0)
            if not dklp:
                for r in range(4):
                    for v in range(V):
                        moved |= S[r, v] ^ prev[r, v]
            for b in range(64):
                bit = one << np.uint64(b)
                if not (running & bit):
                    continue
                if cnt[b] < best[b]:
                    best[b] = cnt[b]
                    since[b] = 0
                else:
                    since[b] += 1
                if cnt[b] == 0:
                    clean |= bit
                elif since[b] >= v_max or (not dklp and not (moved & bit)):
                    stuck |= bit
            running = active[w] & ~clean & ~stuck
        if sweeps > most:
            most = sweeps
        par = np.uint64(0)
        for p in range(6):
            x = np.uint64(0)
            for v in logical_sites[p]:
                x ^= F[p, v]
            par |= x
        logi[w] = par & clean
        succ[w] = clean & ~par
        stk[w] = ~clean
    return succ, logi, stk, most


class Engine:
    """Compiled sweeps for one lattice size.

    ``faces`` and ``synd`` arrays keep their ``(6|4, L, L, L, L, W)`` shapes
    (any ``W``); kernels work on flat views.
    """

    def __init__(self, L: int, words: int = 1):
        self.L = L
        self.V = L**4
        self.nbr = neighbour_table(L)
        self.colours, self.ncol = face_colours(L)
        self._bufs: dict[int, np.ndarray] = {}
        x = np.indices((L, L, L, L)).reshape(4, -1)
        self.logical_sites = np.stack(
            [np.flatnonzero((x[i] == 0) & (x[j] == 0)) for i, j in PLANES]
        ).astype(np.int64)

    def _buf(self, W: int) -> np.ndarray:
        if W not in self._bufs:
            self._bufs[W] = np.zeros((self.V, W), dtype=np.uint64)
        return self._bufs[W]

    def _flat(self, a):
        return a.reshape(a.shape[0], self.V, a.shape[-1])

    def syndrome(self, faces):
        s = _nb_syndrome(self._flat(faces), self.nbr)
        return s.reshape((4,) + faces.shape[1:])

    def toom_sweep(self, faces, synd):
        _nb_toom_sweep(self._flat(faces), self._flat(synd), self.nbr, self._buf(faces.shape[-1]))

    def dklp_sweep(self, faces, synd, coins):
        W = faces.shape[-1]
        draw = coins((6, self.ncol, self.V, W))
        _nb_dklp_sweep(self._flat(faces), self._flat(synd), self.nbr, self.colours,
                       self.ncol, draw, self._buf(W))

    def sweep(self, rule, faces, synd, coins=None):
        if rule == "toom":
            self.toom_sweep(faces, synd)
        elif rule == "dklp":
            self.dklp_sweep(faces, synd, coins)
        else:
            raise ValueError(f"unknown rule {rule!r}")

    def verify(self, faces, rule, v_max, active_words, seed=0):
        succ, logi, stk, most = _nb_verify(
            self._flat(faces), self.nbr, self.colours, self.ncol, rule == "dklp",
            v_max, active_words, self.logical_sites, seed,
        )
        return VerifyResult(_word_bits(succ), _word_bits(logi), _word_bits(stk), int(most))

    def weights(self, synd):
        out = np.zeros(64 * synd.shape[-1], dtype=np.int64)
        _nb_weights(synd, out)
        return out


@dataclass
class VerifyResult:
    success: np.ndarray  # bool per trial
    logical: np.ndarray
    stuck: np.ndarray
    sweeps: int


def verify_correctable(
    faces: np.ndarray,
    rule: str,
    v_max: int,
    coins=None,
    active: np.ndarray | None = None,
    max_sweeps: int | None = None,
    engine: "Engine | None" = None,
    seed: int = 0,
) -> VerifyResult:
    """Run the rule with perfect syndromes on a copy until every trial is clean or stuck.

    A trial is stuck once its syndrome weight has not dropped for ``v_max``
    consecutive sweeps (trials outside ``active`` are reported in no class);
    under Toom's rule a sweep that leaves a nonzero syndrome unchanged
    already settles it. Clean trials are classified by :func:`logical_parity`.
    With an :class:`Engine` a compiled kernel relaxes one 64-trial word at a
    time; its DKLP coins come from a generator seeded with ``seed`` and
    ``sweeps`` reports the largest count over words.
    """
    if v_max < 1:
        raise ValueError("v_max must be at least 1")
    if rule not in ("toom", "dklp"):
        raise ValueError(f"unknown rule {rule!r}")
    if engine is not None:
        act = np.ones(64 * faces.shape[-1], dtype=bool) if active is None else active
        words = np.packbits(act, bitorder="little").view(np.uint64)
        res = engine.verify(faces, rule, v_max, words, seed)
        return VerifyResult(res.success & act, res.logical & act, res.stuck & act, res.sweeps)
    full = faces.copy()
    W = full.shape[-1]
    ntr = 64 * W
    f = full
    s = syndrome(f)
    cols = np.arange(W)
    active = np.ones(ntr, dtype=bool) if active is None else active.copy()
    w = syndrome_weight(s)
    best = w.copy()
    since = np.zeros(ntr, dtype=np.int64)
    stuck = np.zeros(ntr, dtype=bool)
    masks = _colour_masks(f.shape[1], 1) if rule == "dklp" else None
    sweeps = 0
    while True:
        running = active & (w > 0) & ~stuck
        if not running.any() or (max_sweeps is not None and sweeps >= max_sweeps):
            break
        # settled trials never run again, so words without a running trial are dropped
        need = np.flatnonzero(running.reshape(W, 64).any(axis=1))
        if need.size < cols.size:
            full[..., cols] = f
            sel = np.searchsorted(cols, need)
            f = np.ascontiguousarray(f[..., sel])
            s = np.ascontiguousarray(s[..., sel])
            cols = need
        idx = (cols[:, None] * 64 + np.arange(64)).reshape(-1)
        if rule == "toom":
            before = s.copy()
        if rule == "toom":
            toom_sweep(f, s)
        else:
            dklp_sweep(f, s, coins, masks)
        sweeps += 1
        wi = syndrome_weight(s)
        w[idx] = wi
        improved = wi < best[idx]
        best[idx] = np.where(improved, wi, best[idx])
        since[idx] = np.where(improved, 0, since[idx] + 1)
        run = running[idx]
        newly = run & (since[idx] >= v_max) & (wi > 0)
        if rule == "toom":
            # a deterministic rule that changed nothing will never change anything
            moved = np.bitwise_or.reduce((s ^ before).reshape(-1, s.shape[-1]), axis=0)
            newly |= run & ~_word_bits(moved) & (wi > 0)
        stuck[idx] |= newly
    full[..., cols] = f
    clean = w == 0
    logical = _word_bits(logical_parity(full)) & clean
    logical &= active
    success = clean & ~logical & active
    return VerifyResult(success, logical, ~clean & active, sweeps)


def inject(rng: np.random.Generator, shape: tuple[int, ...], p: float) -> np.ndarray:
    """Packed Bernoulli(p) bits of the given word-array shape (each bit independent)."""
    out = np.zeros(shape, dtype=np.uint64)
    if p <= 0:
        return out
    nbits = out.size * 64
    if p >= 1:
        out[...] = np.uint64(0xFFFFFFFFFFFFFFFF)
        return out
    flat = out.reshape(-1)
    pos = -1
    while pos < nbits:
        gaps = rng.geometric(p, size=max(16, int(1.2 * p * nbits) + 16))
        pos = _nb_scatter(flat, gaps, pos)
    return out


@njit(cache=True)
def _nb_scatter(flat, gaps, pos):
    """Set the bits at ``pos + cumsum(gaps)`` that fall inside ``flat``; return the last position."""
    nbits = flat.size * 64
    for g in gaps:
        pos += g
        if pos >= nbits:
            return pos
        flat[pos >> 6] |= np.uint64(1) << np.uint64(pos & 63)
    return pos


# --- interface with the generic complex -------------------------------------


def face_index_map(c: ChainComplex) -> np.ndarray:
    """``idx[p, x, y, z, w]`` = index of that face in level 2 of a ``toric_4d`` complex."""
    return _index_map(c, 2)


def edge_index_map(c: ChainComplex) -> np.ndarray:
    """``idx[i, x, y, z, w]`` = index of that edge in level 1 of a ``toric_4d`` complex."""
    return _index_map(c, 1)


def _index_map(c: ChainComplex, level: int) -> np.ndarray:
    if c.meta.get("family") != "toric4d" or c.labels is None:
        raise ValueError("index maps exist for toric_4d complexes only")
    L = c.meta["parameters"]["L"]
    orient = PLANES if level == 2 else tuple((i,) for i in range(4))
    mask_of = {sum(1 << a for a in o): k for k, o in enumerate(orient)}
    idx = np.zeros((len(orient), L, L, L, L), dtype=np.int64)
    for n, lab in enumerate(c.labels[level]):
        idx[(mask_of[int(lab[4])],) + tuple(int(x) for x in lab[:4])] = n
    return idx


class CaGrid4D:
    """Packed face errors of ``64 W`` trials on the ``L^4`` torus."""

    def __init__(self, L: int, words: int = 1):
        self.L = L
        self.faces = np.zeros((6, L, L, L, L, words), dtype=np.uint64)

    @property
    def trials(self) -> int:
        return 64 * self.faces.shape[-1]

    def set_trial(self, t: int, face_vector, index_map: np.ndarray) -> None:
        """Load a face-indexed error vector (complex ordering) into trial ``t``."""
        v = gf2.as_bits(face_vector)
        w, b = divmod(t, 64)
        bit = _ONE << np.uint64(b)
        layer = self.faces[..., w]
        layer &= ~bit
        layer |= np.where(v[index_map] == 1, bit, np.uint64(0))

    def get_trial(self, t: int, index_map: np.ndarray) -> np.ndarray:
        """Face-indexed error vector of trial ``t`` in complex ordering."""
        w, b = divmod(t, 64)
        bits = ((self.faces[..., w] >> np.uint64(b)) & _ONE).astype(np.uint8)
        out = np.zeros(bits.size, dtype=np.uint8)
        out[index_map.reshape(-1)] = bits.reshape(-1)
        return out

    def syndrome(self) -> np.ndarray:
        return syndrome(self.faces)


def repair_syndrome_4d(complex_: ChainComplex, measured) -> np.ndarray:
    """Closest 1-cycle to a measured edge syndrome.

    Broken strings end at vertices with odd parity; pairing those endpoints
    by minimum-weight matching on the edge graph and adding the paths
    returns a syndrome with zero boundary. On the tesseract every cycle is
    a valid syndrome; on the 4D torus the repaired cycle may still be
    homologically nontrivial.
    """
    import pymatching

    m = gf2.as_bits(measured).reshape(-1)
    d1 = sp.csc_matrix(complex_.boundary(1))
    if m.size != d1.shape[1]:
        raise ValueError(f"measured syndrome has length {m.size}, expected {d1.shape[1]}")
    ends = gf2.matmul(d1, m)
    if not ends.any():
        return m.copy()
    matcher = pymatching.Matching.from_check_matrix(d1, weights=1.0)
    return m ^ matcher.decode(ends).astype(np.uint8)
