"""Command-line front end.

Every subcommand writes one JSON document ``{"config": ..., ...}`` to stdout
or ``--out``. ``--csv`` writes tables as CSV instead, and ``--raw`` writes a
config line followed by one JSON line per replicate.
The echoed config holds everything that determines the output; the worker
count is left out because it never changes results.

Exit codes: 0 success, 2 usage/config error, 3 domain error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .analytics import (
    LOG2,
    GBlockQuery,
    compute_b,
    dominance_survival,
    escape_prob,
    log_pG,
    mean_bound,
    pk_upper_bound,
    ratio_bound_check,
)
from .errors import ConfigError, DomainError, NumericError
from .montecarlo import Experiment, RunConfig, default_workers, dominance_check, run_replicated, summarize
from .quadrature import QuadratureSpec

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC = 0, 2, 3, 4


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        return _clean(value.item())
    return value


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, allow_nan=False)


def _weights(text):
    if text == "uniform":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("weights must be 'uniform' or a number in (0, 1)")


def _add_run_flags(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--workers", type=int, default=None, help=f"default: $RAINSTICK_WORKERS or 1")
    sp.add_argument("--site-cap", type=int, default=10**8)
    sp.add_argument("--drop-cap", type=int, default=2**62)
    sp.add_argument("--step-cap", type=int, default=10**8)
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--summary", dest="raw", action="store_false", help="one JSON summary (default)")
    mode.add_argument("--raw", dest="raw", action="store_true", help="config line, then one JSON line per replicate")
    sp.set_defaults(raw=False)
    sp.add_argument("--bootstrap", type=int, default=0, help="bootstrap resamples for the mean CI")


def _add_out(sp):
    sp.add_argument("--out", default=None, help="output file (default stdout)")
    sp.add_argument("--csv", action="store_true", help="emit the table as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rainstick", description="First-block experiments for p-biased permutations.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("block", help="clock sampler for K and log eta")
    sp.add_argument("--dist", choices=["geo", "stretched", "sieve"], default="geo")
    sp.add_argument("--p", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--weights", type=_weights, default="uniform")
    _add_run_flags(sp)
    _add_out(sp)

    sp = sub.add_parser("block-discrete", help="drop-by-drop sampler for K and N")
    sp.add_argument("--dist", choices=["geo", "stretched", "sieve"], default="geo")
    sp.add_argument("--p", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--weights", type=_weights, default="uniform")
    sp.add_argument("--method", choices=["jump", "drops"], default="jump")
    _add_run_flags(sp)
    _add_out(sp)

    for name, helptext in [("forgetful", "forgetful-process maximum"), ("paintstick", "paintstick block size K'")]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--p", type=float, required=True)
        _add_run_flags(sp)
        _add_out(sp)

    sp = sub.add_parser("stretched", help="clock sampler under the stretched-exponential law")
    sp.add_argument("--alpha", type=float, required=True)
    _add_run_flags(sp)
    _add_out(sp)

    sp = sub.add_parser("sieve", help="clock sampler under a Bernoulli sieve")
    sp.add_argument("--weights", type=_weights, default="uniform")
    _add_run_flags(sp)
    _add_out(sp)

    sp = sub.add_parser("constant-b", help="the constant b")
    sp.add_argument("--tol", type=float, default=1e-10)
    _add_out(sp)

    sp = sub.add_parser("escape-prob", help="forgetful fill probability vs exp(-b/p)")
    sp.add_argument("--p", type=float, nargs="+", required=True)
    sp.add_argument("--tol", type=float, default=1e-11)
    _add_out(sp)

    sp = sub.add_parser("gblock", help="log P[G_{j,t}] table")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--t", type=float, nargs="+", required=True)
    sp.add_argument("--j", type=int, nargs="+", default=None, help="default: 0..j-max")
    sp.add_argument("--j-max", type=int, default=None, help="default: 2k")
    _add_out(sp)

    sp = sub.add_parser("bound-pk", help="upper bound on P[K = k]")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--k-max", type=int, default=30)
    sp.add_argument("--tol", type=float, default=1e-11)
    _add_out(sp)

    sp = sub.add_parser("ratio-check", help="P[G_k]/P[G_j(t)] against t^-n")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--k", type=int, default=100)
    sp.add_argument("--t", type=float, nargs="+", default=[3 * LOG2, 5.0, 10.0, 50.0])
    sp.add_argument("--n", type=float, default=2.0)
    _add_out(sp)

    sp = sub.add_parser("dominance", help="K against the dominating geometric law")
    sp.add_argument("--p", type=float, nargs="+", default=[0.5, 0.3, 0.2])
    sp.add_argument("--slack", type=float, default=3.0)
    _add_run_flags(sp)
    _add_out(sp)

    sp = sub.add_parser("trend", help="medians of p log K and p log log eta over p")
    sp.add_argument("--p", type=float, nargs="+", default=[0.4, 0.3, 0.2, 0.1])
    _add_run_flags(sp)
    _add_out(sp)
    return parser


def _config_echo(args) -> dict:
    echo = {k: v for k, v in vars(args).items() if k not in ("workers", "out", "csv")}
    echo["version"] = __version__
    return echo


def _run_config(args) -> RunConfig:
    workers = args.workers if args.workers is not None else default_workers()
    return RunConfig(
        master_seed=args.seed,
        reps=args.reps,
        workers=workers,
        site_cap=args.site_cap,
        drop_cap=args.drop_cap,
        step_cap=args.step_cap,
    )


def _law_params(args) -> dict:
    params = {"dist": args.dist}
    if args.dist == "geo":
        if args.p is None:
            raise ConfigError("--p is required for --dist geo")
        params["p"] = args.p
    elif args.dist == "stretched":
        if args.alpha is None:
            raise ConfigError("--alpha is required for --dist stretched")
        params["alpha"] = args.alpha
    else:
        params["weights"] = args.weights
    return params


def _experiment(args) -> Experiment:
    cmd = args.command
    if cmd == "block":
        return Experiment("block", _law_params(args))
    if cmd == "block-discrete":
        return Experiment("block-discrete", {**_law_params(args), "method": args.method})
    if cmd in ("forgetful", "paintstick"):
        return Experiment(cmd, {"p": args.p})
    if cmd == "stretched":
        return Experiment(cmd, {"alpha": args.alpha})
    return Experiment("sieve", {"weights": args.weights})


def _sampling(args):
    samples = run_replicated(_experiment(args), _run_config(args))
    if args.raw:
        return "raw", (_config_echo(args), samples)
    doc = {"config": _config_echo(args)}
    if len(samples) == 0:
        doc["summary"] = None
        doc["error"] = "no replicates"
        return "doc", doc
    complete = samples.complete
    if complete.any():
        doc["summary"] = summarize(samples.k, samples.capped, bootstrap=args.bootstrap, seed=args.seed).to_dict()
    else:
        doc["summary"] = {"n": 0, "capped_fraction": 1.0}
    le = samples.log_eta[complete]
    if le.size and np.all(np.isfinite(le)):
        doc["log_eta"] = summarize(le).to_dict()
    n = samples.n[complete]
    if n.size and np.all(n >= 0):
        doc["n_drops"] = summarize(n).to_dict()
    return "doc", doc


def _cmd_constant_b(args):
    spec = QuadratureSpec(abs_tol=args.tol, rel_tol=args.tol)
    return {"config": _config_echo(args), "b": compute_b(spec)}


def _cmd_escape(args):
    spec = QuadratureSpec(rel_tol=args.tol)
    b = compute_b()
    rows = []
    for p in args.p:
        q = escape_prob(p, spec)
        lower = math.exp(-b / p)
        rows.append({"p": p, "escape_prob": q, "lower_bound": lower, "holds": q >= lower})
    return {"config": _config_echo(args), "rows": rows}


def _cmd_gblock(args):
    js = args.j if args.j is not None else list(range(0, (args.j_max if args.j_max is not None else 2 * args.k) + 1))
    rows = [
        {"t": t, "j": j, "log_pG": log_pG(GBlockQuery(j, args.k, t, args.p))} for t in args.t for j in js
    ]
    return {"config": _config_echo(args), "rows": rows}


def _cmd_bound_pk(args):
    spec = QuadratureSpec(rel_tol=args.tol)
    rows = [{"k": k, "bound": pk_upper_bound(k, args.p, spec)} for k in range(1, args.k_max + 1)]
    return {"config": _config_echo(args), "rows": rows}


def _cmd_ratio(args):
    rows = []
    for t in args.t:
        r = ratio_bound_check(args.k, args.p, t, args.n)
        rows.append({"t": t, "ratio": r.ratio, "log_ratio": r.log_ratio, "bound": r.bound, "holds": r.holds})
    return {"config": _config_echo(args), "rows": rows}


def _cmd_dominance(args):
    rows = []
    config = _run_config(args)
    for p in args.p:
        samples = run_replicated(Experiment("block", {"dist": "geo", "p": p}), config)
        if not samples.complete.all():
            raise NumericError(f"capped replicates at p={p}; raise --site-cap")
        res = dominance_check(samples.k, dominance_survival(p), args.slack)
        s = summarize(samples.k)
        half99 = 2.5758293035489004 * math.sqrt(s.variance / s.n)
        rows.append({
            "p": p,
            "holds": res.holds,
            "worst_x": res.worst_x,
            "worst_gap": res.worst_gap,
            "mean": s.mean,
            "mean_plus_ci99": s.mean + half99,
            "mean_bound": mean_bound(p),
            "mean_bound_holds": s.mean + half99 <= mean_bound(p),
        })
    return {"config": _config_echo(args), "rows": rows}


def _cmd_trend(args):
    rows = []
    config = _run_config(args)
    for p in args.p:
        samples = run_replicated(Experiment("block", {"dist": "geo", "p": p}), config)
        ok = samples.complete
        k = samples.k[ok].astype(float)
        le = samples.log_eta[ok]
        # eta <= 1 ranks below every eta > 1 under log log; kept as -inf for the median
        with np.errstate(divide="ignore", invalid="ignore"):
            lle = np.where(le > 0, np.log(np.where(le > 0, le, 1.0)), -np.inf)
        rows.append({
            "p": p,
            "median_p_log_k": float(np.median(p * np.log(k))) if k.size else None,
            "median_p_loglog_eta": float(np.median(p * lle)) if lle.size else None,
            "capped_fraction": float(1.0 - ok.mean()),
        })
    return {"config": _config_echo(args), "rows": rows}


_TABLES = {
    "constant-b": _cmd_constant_b,
    "escape-prob": _cmd_escape,
    "gblock": _cmd_gblock,
    "bound-pk": _cmd_bound_pk,
    "ratio-check": _cmd_ratio,
    "dominance": _cmd_dominance,
    "trend": _cmd_trend,
}


def _flatten(d, prefix=""):
    out = {}
    for key, value in d.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def _render(kind, payload, as_csv) -> str:
    if kind == "raw":
        config, samples = payload
        head = _dumps({"config": config}) + "\n"
        return head + "".join(_dumps(rec) + "\n" for rec in samples.records())
    if as_csv:
        rows = payload.get("rows")
        if rows is None:
            rows = [_flatten({k: v for k, v in payload.items() if k != "config"})]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(_clean(row))
        return buf.getvalue()
    return _dumps(payload) + "\n"


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        if args.command in _TABLES:
            kind, payload = "doc", _TABLES[args.command](args)
        else:
            kind, payload = _sampling(args)
        text = _render(kind, payload, getattr(args, "csv", False))
    except ConfigError as exc:
        print(f"rainstick: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"rainstick: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericError as exc:
        print(f"rainstick: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
