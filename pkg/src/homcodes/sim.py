"""Seeded Monte Carlo campaigns, confidence intervals and threshold fits.

Randomness is reproducible independent of the number of worker processes:

* 2D campaigns seed one stream per trial from ``(seed, trial)``.
* 4D memory campaigns run fixed-size batches of trials through
  ``64 * words`` bit-parallel lanes and seed one stream per batch from
  ``(seed, batch)``; batch boundaries never depend on the worker count.

Work is split into fixed chunks that may run in a process pool; tallies are
integer sums, so any schedule gives identical results.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize, stats

from . import automata as ca
from . import gf2
from .css import CssCode
from .decode import MatchingDecoder, NoisyMatchingDecoder

__all__ = [
    "SimResult",
    "MemoryTimeResult",
    "FitResult",
    "trial_rng",
    "wilson_interval",
    "run_2d_perfect",
    "run_2d_noisy",
    "run_4d_memory",
    "fit_threshold",
    "scaling_model",
    "crossings",
    "write_csv",
    "read_csv",
    "SIM_COLUMNS",
    "MEMORY_COLUMNS",
]

SIM_COLUMNS = [
    "family", "n", "k", "d", "p", "q", "T_rounds", "trials",
    "failures_logical", "failures_stuck", "p_bar", "ci_lo", "ci_hi", "seed",
]
MEMORY_COLUMNS = SIM_COLUMNS + ["mean_T", "stderr", "censored"]


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one trial (or one packed batch)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= failures <= trials:
        raise ValueError("need 0 <= failures <= trials and trials >= 1")
    z = stats.norm.ppf(0.5 + confidence / 2)
    ph = failures / trials
    denom = 1 + z * z / trials
    centre = (ph + z * z / (2 * trials)) / denom
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    if failures == 0:
        lo = 0.0
    if failures == trials:
        hi = 1.0
    return lo, hi


@dataclass
class SimResult:
    trials: int
    failures_logical: int
    failures_stuck: int = 0
    seed: int = 0
    config: dict = field(default_factory=dict)
    confidence: float = 0.95

    @property
    def failures(self) -> int:
        return self.failures_logical + self.failures_stuck

    @property
    def p_bar(self) -> float:
        return self.failures / self.trials

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials, self.confidence)


@dataclass
class MemoryTimeResult:
    times: np.ndarray
    logical: int
    stuck: int
    censored: int
    max_cycles: int
    seed: int = 0
    config: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return int(self.times.size)

    @property
    def mean(self) -> float:
        return float(self.times.mean())

    @property
    def stderr(self) -> float:
        if self.times.size < 2:
            return math.nan
        return float(self.times.std(ddof=1) / math.sqrt(self.times.size))


# --- parallel plumbing -------------------------------------------------------


def _run_chunks(fn: Callable, args: Sequence, workers: int) -> list:
    if workers <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args))


def _chunks(trials: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, trials)) for s in range(0, trials, size)]


# --- 2D campaigns ------------------------------------------------------------


def _failures(code: CssCode, residual: np.ndarray, side: str) -> np.ndarray:
    """Per-row logical failure of syndrome-free residuals (overlap with the opposite logicals)."""
    other = code.logicals.of("X" if side == "Z" else "Z")
    return gf2.matmul(residual, other.T).any(axis=1)


def _perfect_chunk(args) -> int:
    code, p, seed, start, stop, sides = args
    dec = {s: MatchingDecoder(code, s) for s in sides}
    n = code.n
    count = stop - start
    errs = {s: np.zeros((count, n), dtype=np.uint8) for s in sides}
    for t in range(start, stop):
        rng = trial_rng(seed, t)
        # Z is always drawn first, so a Z-only run sees the same Z errors
        for side in ("Z", "X"):
            if side in errs:
                errs[side][t - start] = rng.random(n) < p
    failed = np.zeros(count, dtype=bool)
    for side in sides:
        e = errs[side]
        synd = code.syndrome(e, side)
        busy = np.flatnonzero(synd.any(axis=1) | e.any(axis=1))
        if busy.size == 0:
            continue
        corr = dec[side].decode_batch(synd[busy])
        failed[busy] |= _failures(code, e[busy] ^ corr, side)
    return int(failed.sum())


def run_2d_perfect(
    code: CssCode,
    p: float,
    trials: int,
    seed: int,
    workers: int = 1,
    chunk: int = 2048,
    sides: str = "ZX",
) -> SimResult:
    """Independent X and Z errors at rate ``p``, decoded by matching on each side.

    A trial fails when either residual is a nontrivial logical. ``sides="Z"``
    simulates Z errors alone.
    """
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    sides = "".join(sorted(set(sides.upper()), reverse=True))
    if sides not in ("ZX", "Z", "X"):
        raise ValueError("sides must be made of 'Z' and 'X'")
    jobs = [(code, p, seed, a, b, sides) for a, b in _chunks(trials, chunk)]
    fails = sum(_run_chunks(_perfect_chunk, jobs, workers))
    return SimResult(trials, fails, 0, seed, {"mode": "2d-perfect", "p": p, "sides": sides})


def _noisy_chunk(args) -> int:
    code, p, q, T, seed, start, stop = args
    n = code.n
    count = stop - start
    failed = np.zeros(count, dtype=bool)
    draws = {}
    for side in ("Z", "X"):
        m = code.checks(side).shape[0]
        draws[side] = (
            np.zeros((count, T, n), dtype=np.uint8),
            np.zeros((count, T, m), dtype=np.uint8),
        )
    for t in range(start, stop):
        rng = trial_rng(seed, t)
        for side in ("Z", "X"):
            qe, me = draws[side]
            m = me.shape[2]
            qe[t - start] = rng.random((T, n)) < p
            me[t - start] = rng.random((T, m)) < q
    for side in ("Z", "X"):
        qe, me = draws[side]
        dec = NoisyMatchingDecoder(code, T, side)
        cum = np.bitwise_xor.accumulate(qe, axis=1)  # error after each round
        h = code.checks(side)
        true = gf2.matmul(h, cum.reshape(-1, n).T).T.reshape(count, T, -1)
        measured = true ^ me
        final = true[:, -1]
        rounds = np.concatenate(
            [np.zeros_like(final)[:, None], measured, final[:, None]], axis=1
        )
        events = (rounds[:, 1:] ^ rounds[:, :-1]).transpose(0, 2, 1)
        busy = np.flatnonzero(events.any(axis=(1, 2)) | cum[:, -1].any(axis=1))
        if busy.size == 0:
            continue
        corr = dec.decode_events_batch(events[busy])
        failed[busy] |= _failures(code, cum[busy, -1] ^ corr, side)
    return int(failed.sum())


def run_2d_noisy(
    code: CssCode,
    p: float,
    T: int,
    trials: int,
    seed: int,
    q: float | None = None,
    workers: int = 1,
    chunk: int = 512,
) -> SimResult:
    """``T`` rounds of qubit errors (rate ``p``) and measurement flips (rate ``q``,
    default ``p``) followed by one perfect round, decoded in space-time."""
    q = p if q is None else q
    if T < 1:
        raise ValueError("T must be at least 1")
    jobs = [(code, p, q, T, seed, a, b) for a, b in _chunks(trials, chunk)]
    fails = sum(_run_chunks(_noisy_chunk, jobs, workers))
    return SimResult(trials, fails, 0, seed, {"mode": "2d-noisy", "p": p, "q": q, "T": T})


# --- 4D memory ---------------------------------------------------------------


@dataclass
class MemoryConfig:
    L: int
    rule: str
    p: float
    q: float = 0.0
    m: int = 1
    max_cycles: int = 1000
    v_max: int | None = None
    fresh_measurement_per_sweep: bool = True

    def __post_init__(self):
        if self.rule not in ("toom", "dklp"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.v_max is None:
            self.v_max = 10 * self.L


def _memory_batch(args):
    """Run ``count`` trials through ``64 * words`` bit lanes.

    A lane whose trial fails (or reaches ``max_cycles``) is cleared and
    starts the next trial of the batch, so lanes never idle while trials
    remain. Which trial runs in which lane depends only on the batch's
    random stream.
    """
    cfg, seed, batch, words, count = args
    cfg = MemoryConfig(**cfg)
    rng = trial_rng(seed, batch)
    L = cfg.L
    shape = (6, L, L, L, L, words)
    eshape = (4, L, L, L, L, words)
    lanes = 64 * words
    faces = np.zeros(shape, dtype=np.uint64)
    times = np.full(count, cfg.max_cycles, dtype=np.int64)
    kind = np.zeros(count, dtype=np.int8)  # 0 censored, 1 logical, 2 stuck
    trial = np.full(lanes, -1, dtype=np.int64)
    start = min(lanes, count)
    trial[:start] = np.arange(start)
    upcoming = start
    age = np.zeros(lanes, dtype=np.int64)

    def coins(sh):
        return rng.integers(0, np.iinfo(np.uint64).max, size=sh, dtype=np.uint64, endpoint=True)

    eng = ca.Engine(L, words)
    while True:
        alive = trial >= 0
        if not alive.any():
            break
        faces ^= ca.inject(rng, shape, cfg.p)
        measured = None
        for _ in range(cfg.m):
            if measured is None or cfg.fresh_measurement_per_sweep:
                measured = eng.syndrome(faces)
                if cfg.q > 0:
                    measured ^= ca.inject(rng, eshape, cfg.q)
            eng.sweep(cfg.rule, faces, measured, coins)
        age[alive] += 1
        res = ca.verify_correctable(
            faces, cfg.rule, cfg.v_max, active=alive, engine=eng,
            seed=int(rng.integers(2**32)) if cfg.rule == "dklp" else 0,
        )
        died = alive & ~res.success
        t = trial[died]
        times[t] = age[died]
        kind[t] = np.where(res.logical[died], 1, 2)
        done = died | (alive & (age >= cfg.max_cycles))
        if done.any():
            lanes_done = np.flatnonzero(done)
            faces &= ~np.packbits(done, bitorder="little").view(np.uint64)
            age[lanes_done] = 0
            k = min(lanes_done.size, count - upcoming)
            trial[lanes_done[:k]] = np.arange(upcoming, upcoming + k)
            trial[lanes_done[k:]] = -1
            upcoming += k
    return times, kind


def run_4d_memory(
    L: int,
    rule: str,
    p: float,
    trials: int,
    seed: int,
    q: float = 0.0,
    m: int = 1,
    max_cycles: int = 1000,
    v_max: int | None = None,
    words: int = 4,
    batch_trials: int | None = None,
    workers: int = 1,
    fresh_measurement_per_sweep: bool = True,
) -> MemoryTimeResult:
    """Memory time of the 4D toric code under a cellular-automaton decoder.

    Each cycle adds face errors at rate ``p``, measures the syndrome with
    flips at rate ``q``, applies ``m`` sweeps and then checks on a copy
    whether perfect-syndrome sweeps return to the code space without a
    logical error. The survival time is the first cycle at which that check
    fails; trials still alive after ``max_cycles`` are censored there.

    Trials are split into batches of ``batch_trials`` (default ``1024 * words``)
    run through ``64 * words`` bit lanes; results depend on these two
    numbers and the seed, never on ``workers``.
    """
    cfg = asdict(MemoryConfig(L, rule, p, q, m, max_cycles, v_max, fresh_measurement_per_sweep))
    per = batch_trials or 1024 * words
    jobs = [(cfg, seed, b, words, min(per, trials - b * per)) for b in range(-(-trials // per))]
    outs = _run_chunks(_memory_batch, jobs, workers)
    times = np.concatenate([o[0] for o in outs])
    kind = np.concatenate([o[1] for o in outs])
    return MemoryTimeResult(
        times,
        int((kind == 1).sum()),
        int((kind == 2).sum()),
        int((kind == 0).sum()),
        max_cycles,
        seed,
        {"mode": "4d-memory", **cfg, "words": words, "batch_trials": per},
    )


# --- crossings and fits ------------------------------------------------------


def crossings(curves: dict, increasing: bool | None = None) -> list[tuple]:
    """Crossing points between curves of adjacent sizes by linear interpolation.

    ``curves`` maps a size to ``(ps, ys)`` sampled at common ``ps``. Returns
    ``(size_a, size_b, p_cross)`` for every sign change of ``y_b - y_a``.
    """
    sizes = sorted(curves)
    out = []
    for a, b in zip(sizes[:-1], sizes[1:]):
        pa, ya = map(np.asarray, curves[a])
        pb, yb = map(np.asarray, curves[b])
        if not np.allclose(pa, pb):
            raise ValueError("curves must share their p values")
        diff = yb - ya
        for k in range(len(pa) - 1):
            d0, d1 = diff[k], diff[k + 1]
            if d0 == 0:
                out.append((a, b, float(pa[k])))
            elif d0 * d1 < 0:
                t = d0 / (d0 - d1)
                out.append((a, b, float(pa[k] + t * (pa[k + 1] - pa[k]))))
        if diff[-1] == 0:
            out.append((a, b, float(pa[-1])))
    return out


def scaling_model(p, L, p_c, nu, coeffs):
    x = (np.asarray(p) - p_c) * np.asarray(L, dtype=float) ** (1.0 / nu)
    return coeffs[0] + coeffs[1] * x + coeffs[2] * x * x


@dataclass
class FitResult:
    p_c: float
    nu: float
    coeffs: np.ndarray
    residual: float
    cov: np.ndarray | None
    model: str

    def predict(self, p, L):
        return scaling_model(p, L, self.p_c, self.nu, self.coeffs)


def _inner(p, L, y, w, p_c, nu):
    x = (p - p_c) * L ** (1.0 / nu)
    design = np.stack([np.ones_like(x), x, x * x], axis=1) * w[:, None]
    coeffs, *_ = np.linalg.lstsq(design, y * w, rcond=None)
    r = design @ coeffs - y * w
    return float(r @ r), coeffs


def fit_threshold(data: Iterable[Sequence[float]], model: str = "memory") -> FitResult:
    """Least-squares fit of ``y = A + B x + C x^2`` with ``x = (p - p_c) L^(1/nu)``.

    ``data`` rows are ``(p, L, y, sigma)``; ``sigma <= 0`` means unweighted.
    An outer grid over ``(p_c, nu)`` with inner linear least squares for the
    coefficients is followed by a Nelder-Mead refinement from the best grid
    point. A p_c that leaves the sampled p range is rejected: the data then
    hold no crossing to fit.
    """
    if model not in ("memory", "logical"):
        raise ValueError("model must be 'memory' or 'logical'")
    arr = np.asarray(list(data), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError("data rows must be (p, L, y, sigma)")
    p, L, y, sig = arr.T
    if np.unique(L).size < 2:
        raise ValueError("need at least two distinct sizes L")
    if np.unique(p).size < 3:
        raise ValueError("need at least three distinct p values")
    w = np.where(sig > 0, 1.0 / np.where(sig > 0, sig, 1.0), 1.0)
    lo, hi = p.min(), p.max()
    best = (math.inf, None, None)
    for p_c in np.linspace(lo, hi, 61):
        for log_nu in np.linspace(math.log(0.2), math.log(5.0), 61):
            res, _ = _inner(p, L, y, w, p_c, math.exp(log_nu))
            if res < best[0]:
                best = (res, p_c, log_nu)
    span = hi - lo

    def objective(z):
        return _inner(p, L, y, w, z[0] * span + lo, math.exp(z[1]))[0]

    z0 = np.array([(best[1] - lo) / span, best[2]])
    sol = optimize.minimize(
        objective, z0, method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-18, "maxiter": 20000, "maxfev": 40000},
    )
    p_c, nu = sol.x[0] * span + lo, math.exp(sol.x[1])
    if not lo <= p_c <= hi:
        raise ValueError(f"fitted p_c={p_c:.4g} lies outside the sampled range [{lo:g}, {hi:g}]")
    resid, coeffs = _inner(p, L, y, w, p_c, nu)
    cov = _covariance(p, L, y, w, p_c, nu, coeffs, resid)
    return FitResult(float(p_c), float(nu), coeffs, resid, cov, model)


def _covariance(p, L, y, w, p_c, nu, coeffs, resid):
    theta = np.r_[p_c, nu, coeffs]

    def f(th):
        return scaling_model(p, L, th[0], th[1], th[2:]) * w

    J = np.zeros((p.size, theta.size))
    for i in range(theta.size):
        h = 1e-7 * max(1.0, abs(theta[i]))
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        J[:, i] = (f(up) - f(dn)) / (2 * h)
    dof = max(1, p.size - theta.size)
    try:
        return np.linalg.inv(J.T @ J) * (resid / dof)
    except np.linalg.LinAlgError:
        return None


# --- CSV ---------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def write_csv(rows: list[dict], columns: list[str], config: dict, out=None) -> str:
    """CSV text with a ``# config:`` header line; also written to ``out`` when given."""
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(text: str) -> tuple[dict, list[dict]]:
    lines = text.splitlines()
    config = {}
    body = []
    for line in lines:
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif not line.startswith("#"):
            body.append(line)
    if not body:
        raise ValueError("CSV has no header row")
    rows = list(csv.DictReader(body))
    return config, rows
