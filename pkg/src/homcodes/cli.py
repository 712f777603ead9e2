"""Command line front end: ``homcodes <subcommand> ...``.

Subcommands
  build      construct a code and write its JSON artifact
  params     print n, k, check weights and qubit degrees (``--distance``, ``--count``)
  distance   shorthand for ``params --distance``
  simulate   Monte Carlo sweep written as CSV
  crossings  pairwise crossing points of the curves in a CSV
  fit        finite-size scaling fit of CSV data
  bounds     threshold lower bounds of an {r,s} family
  approx     leading-order failure estimate and p_max
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import metadata

import numpy as np

from . import analytic, complexes, coxeter, css, distance, sim

PROG = "homcodes"


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _floats(text: str) -> list[float]:
    vals = [float(t) for t in text.replace(",", " ").split()]
    if not vals:
        raise ValueError("empty list")
    return vals


def _ints(text: str) -> list[int]:
    return [int(v) for v in _floats(text)]


def _p_list(args) -> list[float]:
    if args.p:
        return _floats(args.p)
    if args.p_range:
        lo, hi, step = _floats(args.p_range)
        k = int(round((hi - lo) / step))
        return [round(lo + i * step, 12) for i in range(k + 1)]
    raise ValueError("no p values given (use --p or --p-range)")


def _run_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",) and v is not None}
    cfg["tool"] = PROG
    cfg["version"] = _version()
    return cfg


def _load_code(path: str) -> css.CssCode:
    try:
        with open(path) as fh:
            data = json.load(fh)
        return css.load_artifact(data)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read code artifact {path}: {exc}") from exc


def _load_complex(path: str):
    with open(path) as fh:
        data = json.load(fh)
    if data.get("boundaries") is None:
        raise ValueError(f"{path} holds no chain complex")
    return complexes.ChainComplex.from_dict(data), data.get("qubit_level")


# --- build -------------------------------------------------------------------


def _build_complex(args):
    fam = args.family
    if fam in ("toric2d", "rotated", "toric4d", "tesseract"):
        if args.L is None:
            raise ValueError(f"{fam} needs --L")
        builder = {
            "toric2d": complexes.toric_2d,
            "rotated": complexes.rotated_toric,
            "toric4d": complexes.toric_4d,
            "tesseract": complexes.tesseract,
        }[fam]
        c = builder(args.L)
        level = 2 if fam in ("toric4d", "tesseract") else 1
        return c, level
    if fam == "hyperbolic":
        if args.r is None or args.s is None or not args.relators:
            raise ValueError("hyperbolic needs --r, --s and --relators")
        return coxeter.surface_from_relators(args.r, args.s, args.relators), 1
    if fam == "appendix-a":
        if args.r is None or args.L is None:
            raise ValueError("appendix-a needs --r and --L")
        return coxeter.build_appendix_a_surface(args.r, args.L), 1
    if fam in ("semihyperbolic", "dual"):
        if not args.input:
            raise ValueError(f"{fam} needs --in")
        base, level = _load_complex(args.input)
        if fam == "dual":
            return complexes.dual(base), (base.dimension - level if level else 1)
        if args.l is None:
            raise ValueError("semihyperbolic needs --l")
        return complexes.semi_hyperbolic(base, args.l), 1
    raise ValueError(f"unknown family {fam!r}")


def cmd_build(args) -> int:
    c, level = _build_complex(args)
    c.check(strict=args.family != "rotated" or (args.L or 0) > 2)
    if args.qubit_level is not None:
        level = args.qubit_level
    code = css.from_complex(c, level)
    data = code.to_dict(include_logicals=not args.no_logicals)
    data["meta"] = {**data.get("meta", {}), "run_config": _run_config(args)}
    text = json.dumps(data, separators=(",", ":"), sort_keys=True)
    _emit(text, args.out)
    print(f"n={code.n} k={code.k}", file=sys.stderr)
    return 0


def _emit(text: str, out: str | None) -> None:
    if out:
        tmp = out + ".partial"
        with open(tmp, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
        os.replace(tmp, out)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# --- params / distance -------------------------------------------------------


def _weights(h) -> str:
    rows = np.diff(h.indptr)
    vals, counts = np.unique(rows, return_counts=True)
    return ",".join(f"{v}x{c}" for v, c in zip(vals.tolist(), counts.tolist()))


def _degrees(code) -> str:
    deg = np.zeros(code.n, dtype=np.int64)
    for h in (code.h_x, code.h_z):
        deg += np.bincount(h.indices, minlength=code.n)
    vals, counts = np.unique(deg, return_counts=True)
    return ",".join(f"{v}x{c}" for v, c in zip(vals.tolist(), counts.tolist()))


def _params(code, want_distance: bool, want_count: bool) -> dict:
    out = {"n": code.n, "k": code.k,
           "x_check_weights": _weights(code.h_x), "z_check_weights": _weights(code.h_z),
           "qubit_degrees": _degrees(code)}
    if want_distance or want_count:
        if want_count:
            dz, nz = distance.count_min_weight_logicals(code, "Z")
            dx, nx_ = distance.count_min_weight_logicals(code, "X")
            out.update(d_Z=dz, N_Z=nz, d_X=dx, N_X=nx_)
        else:
            out.update(d_Z=distance.z_distance(code).d, d_X=distance.x_distance(code).d)
    return out


def _surface_or_brute(code, args) -> dict:
    try:
        return _params(code, args.distance, args.count)
    except ValueError:
        if args.count:
            raise
        out = _params(code, False, False)
        for side, key in (("Z", "d_Z"), ("X", "d_X")):
            d = distance.brute_force_distance(code, side, w_max=args.w_max)
            out[key] = d if d is not None else f">{args.w_max}"
        return out


def cmd_params(args) -> int:
    code = _load_code(args.file)
    rep = _surface_or_brute(code, args)
    if args.json:
        print(json.dumps(rep, sort_keys=True))
    else:
        keys = ["n", "k", "d_Z", "N_Z", "d_X", "N_X"]
        print(" ".join(f"{k}={rep[k]}" for k in keys if k in rep))
        print(f"x_check_weights={rep['x_check_weights']} z_check_weights={rep['z_check_weights']}")
        print(f"qubit_degrees={rep['qubit_degrees']}")
    return 0


def cmd_distance(args) -> int:
    args.distance = True
    return cmd_params(args)


# --- simulate ----------------------------------------------------------------


def _family(code) -> str:
    meta = code.complex.meta if code.complex is not None else {}
    fam = meta.get("family", "custom")
    prm = meta.get("parameters", {})
    if fam == "coxeter":
        return f"{{{prm.get('r')},{prm.get('s')}}}"
    return fam


def cmd_simulate(args) -> int:
    ps = _p_list(args)
    workers = args.workers or os.cpu_count() or 1
    cfg = _run_config(args)
    rows = []
    if args.mode in ("2d-perfect", "2d-noisy"):
        if not args.code:
            raise ValueError(f"{args.mode} needs --code")
        for path in args.code:
            code = _load_code(path)
            if code.complex is not None and code.complex.dimension != 2:
                raise ValueError(f"{args.mode} needs a 2D code, {path} is not one")
            dz, dx = distance.z_distance(code).d, distance.x_distance(code).d
            d = min(dz, dx)
            T = args.T if args.T is not None else d
            for p in ps:
                if args.mode == "2d-perfect":
                    res = sim.run_2d_perfect(code, p, args.trials, args.seed, workers=workers)
                    q, t_rounds = 0.0, 1
                else:
                    q = p if args.q is None else args.q
                    res = sim.run_2d_noisy(code, p, T, args.trials, args.seed, q=q, workers=workers)
                    t_rounds = T
                lo, hi = res.interval
                rows.append({
                    "family": _family(code), "n": code.n, "k": code.k, "d": d, "p": p,
                    "q": q, "T_rounds": t_rounds, "trials": res.trials,
                    "failures_logical": res.failures_logical, "failures_stuck": 0,
                    "p_bar": res.p_bar, "ci_lo": lo, "ci_hi": hi, "seed": args.seed,
                })
        cols = sim.SIM_COLUMNS
    elif args.mode == "4d-memory":
        sizes = _ints(args.L) if args.L else []
        if args.code:
            for path in args.code:
                c = _load_code(path).complex
                if c is None or c.meta.get("family") != "toric4d":
                    raise ValueError("4d-memory supports toric4d codes only")
                sizes.append(int(c.meta["parameters"]["L"]))
        if not sizes:
            raise ValueError("4d-memory needs --L or --code")
        for L in sizes:
            for p in ps:
                q = (p if args.q is None else args.q) if args.noisy else 0.0
                res = sim.run_4d_memory(
                    L, args.rule, p, args.trials, args.seed, q=q, m=args.m,
                    max_cycles=args.max_cycles, words=args.words, workers=workers,
                )
                fails = res.logical + res.stuck
                lo, hi = sim.wilson_interval(fails, res.trials)
                rows.append({
                    "family": "toric4d", "n": 6 * L**4, "k": 6, "d": L * L, "p": p, "q": q,
                    "T_rounds": args.m, "trials": res.trials, "failures_logical": res.logical,
                    "failures_stuck": res.stuck, "p_bar": fails / res.trials, "ci_lo": lo,
                    "ci_hi": hi, "seed": args.seed, "mean_T": res.mean, "stderr": res.stderr,
                    "censored": res.censored,
                })
        cols = sim.MEMORY_COLUMNS
    else:
        raise ValueError(f"unknown mode {args.mode!r}")
    _emit(sim.write_csv(rows, cols, cfg), args.out)
    return 0


# --- crossings / fit ---------------------------------------------------------


def _read_rows(paths) -> list[dict]:
    rows = []
    for path in paths:
        with open(path) as fh:
            _, rs = sim.read_csv(fh.read())
        if not rs:
            raise ValueError(f"{path} has no data rows")
        rows.extend(rs)
    return rows


def _series(rows, quantity: str, size_col: str):
    out: dict = {}
    try:
        for r in rows:
            L = float(r[size_col])
            p = float(r["p"])
            if quantity == "mean_T":
                y, s = float(r["mean_T"]), float(r["stderr"])
            elif quantity == "p_round":
                t = int(r["T_rounds"])
                y = analytic.p_round(float(r["p_bar"]), t)
                s = 0.0
            else:
                y = float(r["p_bar"])
                s = (y * (1 - y) / int(r["trials"])) ** 0.5
            out.setdefault(L, []).append((p, y, s))
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed CSV: {exc}") from exc
    return {L: sorted(v) for L, v in out.items()}


def cmd_crossings(args) -> int:
    series = _series(_read_rows(args.input), args.quantity, args.size_column)
    curves = {L: ([v[0] for v in vs], [v[1] for v in vs]) for L, vs in series.items()}
    cr = sim.crossings(curves)
    for a, b, p in cr:
        print(f"{args.size_column}={a:g} vs {b:g}: p_cross={p:.6g}")
    if cr:
        ps = [c[2] for c in cr]
        print(f"hull [{min(ps):.6g}, {max(ps):.6g}]")
    else:
        print("no crossing")
    return 0


def cmd_fit(args) -> int:
    quantity = {"memory": "mean_T", "logical": "p_bar"}[args.model]
    series = _series(_read_rows(args.input), quantity, args.size_column)
    data = [(p, L, y, s) for L, vs in series.items() for p, y, s in vs]
    res = sim.fit_threshold(data, args.model)
    print(f"p_c={res.p_c:.10g} nu={res.nu:.10g} "
          f"coeffs={' '.join(f'{c:.10g}' for c in res.coeffs)} residual={res.residual:.6g}")
    return 0


# --- analytic ----------------------------------------------------------------


def _pct(x: float) -> str:
    return f"{100 * x:#.2g}%"


def cmd_bounds(args) -> int:
    tp = analytic.TessellationParams(args.r, args.s, args.n or 1, args.c)
    perfect = analytic.threshold_lower_bound(tp, noisy=False)
    noisy = analytic.threshold_lower_bound(tp, noisy=True)
    print(f"perfect {_pct(perfect)} noisy {_pct(noisy)}")
    if args.n:
        rate = analytic.encoding_rate(tp)
        line = f"rate {rate} ({float(rate):.6g})"
        if tp.hyperbolic:
            line += f" distance_bound {analytic.distance_upper_bound(tp):.6g}"
        print(line)
    return 0


def cmd_approx(args) -> int:
    if args.p is not None:
        print(f"{analytic.low_p_failure_approx(args.nd, args.d, args.p, args.T):.10g}")
    if args.target is not None:
        print(f"p_max={analytic.p_max(args.nd, args.d, args.T, args.target):.10g}")
    if args.p is None and args.target is None:
        raise ValueError("give --p and/or --target")
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a code artifact")
    b.add_argument("family", choices=["toric2d", "rotated", "toric4d", "tesseract", "hyperbolic",
                                      "semihyperbolic", "appendix-a", "dual"])
    b.add_argument("--L", type=int)
    b.add_argument("--r", type=int)
    b.add_argument("--s", type=int)
    b.add_argument("--l", type=int)
    b.add_argument("--relators")
    b.add_argument("--in", dest="input")
    b.add_argument("--qubit-level", type=int)
    b.add_argument("--no-logicals", action="store_true")
    b.add_argument("--out", "-o")
    b.set_defaults(func=cmd_build)

    for name, fn, text in (("params", cmd_params, "n and k, optionally distances"),
                           ("distance", cmd_distance, "minimum-weight logicals on each side")):
        p = sub.add_parser(name, help=text)
        p.add_argument("file")
        p.add_argument("--distance", action="store_true")
        p.add_argument("--count", action="store_true", help="also count minimum-weight logicals")
        p.add_argument("--w-max", type=int, default=4, help="brute-force weight limit off surfaces")
        p.add_argument("--json", action="store_true")
        p.set_defaults(func=fn)

    s = sub.add_parser("simulate", help="Monte Carlo sweep to CSV")
    s.add_argument("--mode", required=True, choices=["2d-perfect", "2d-noisy", "4d-memory"])
    s.add_argument("--code", action="append", help="code artifact (repeatable)")
    s.add_argument("--L", help="4D lattice sizes, comma separated")
    s.add_argument("--p", help="comma separated error rates")
    s.add_argument("--p-range", help="'lo,hi,step'")
    s.add_argument("--q", type=float, help="measurement flip rate (default p in noisy modes)")
    s.add_argument("--T", type=int, help="noisy rounds (default: code distance)")
    s.add_argument("--rule", choices=["toom", "dklp"], default="toom")
    s.add_argument("--noisy", action="store_true", help="4D: noisy syndrome measurement")
    s.add_argument("--m", type=int, default=1, help="4D: sweeps per cycle")
    s.add_argument("--max-cycles", type=int, default=10000)
    s.add_argument("--words", type=int, default=4, help="4D: 64-trial words per batch")
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int)
    s.add_argument("--out", "-o")
    s.set_defaults(func=cmd_simulate)

    for name, fn, text in (("crossings", cmd_crossings, "crossing points of adjacent sizes"),
                           ("fit", cmd_fit, "finite-size scaling fit")):
        c = sub.add_parser(name, help=text)
        c.add_argument("input", nargs="+")
        c.add_argument("--size-column", default="n")
        if name == "crossings":
            c.add_argument("--quantity", choices=["p_bar", "p_round", "mean_T"], default="p_bar")
        else:
            c.add_argument("--model", choices=["memory", "logical"], default="logical")
        c.set_defaults(func=fn)

    bd = sub.add_parser("bounds", help="threshold lower bounds")
    bd.add_argument("--r", type=int, required=True)
    bd.add_argument("--s", type=int, required=True)
    bd.add_argument("--c", type=float, required=True)
    bd.add_argument("--n", type=int)
    bd.set_defaults(func=cmd_bounds)

    a = sub.add_parser("approx", help="low-p failure estimate")
    a.add_argument("--nd", type=int, required=True)
    a.add_argument("--d", type=int, required=True)
    a.add_argument("--p", type=float)
    a.add_argument("--T", type=int, default=1)
    a.add_argument("--target", type=float)
    a.set_defaults(func=cmd_approx)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, coxeter.CosetOverflow) as exc:
        print(f"{PROG} {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
