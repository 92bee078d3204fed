"""Command-line front end.

Subcommands: distance, deficit, talagrand, verify, sweep, pl-check. Densities
are given inline (gauss:mean,variance or mix:[w,m,v;...]) or from files
(file:payload.json for mixtures and products, file:samples.csv for gridded
densities). Reports are JSON or CSV, written atomically when --out is given,
and byte-identical for a fixed seed regardless of --jobs.

Exit codes: 0 all verifications pass, 1 parse or validation error, 2 any
failure (or case error), 3 inconclusive results only.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .corpus import (DEFAULT_TOL, compatible, run_case, suite_cases,
                     suite_theorems, SUITES)
from .deficits import GFun, lambda_limit_diagnostics
from .density1d import Density1D, GaussianMixture1D, load_grid_csv
from .densitynd import GaussianMixtureND, ProductFunction, mixture_from_json
from .errors import BfstabError, ParseError
from .transport1d import bf_distance_full

_REPORT_COLUMNS = ("case_id", "theorem", "deficit", "lower_bound", "margin",
                   "error_estimate", "status", "method")

_EXIT_BY_STATUS = {"pass": 0, "fail": 2, "inconclusive": 3, "error": 2}


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on bad flags; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# input parsing


def _parse_floats(text: str, what: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ParseError(f"{what}: {exc}") from None


def parse_density_spec(text: str):
    """gauss:m,v | mix:[w,m,v;...] | file:path -> density object."""
    kind, sep, payload = text.partition(":")
    if not sep:
        raise ParseError(f"density spec {text!r} needs a kind prefix "
                         "(gauss:, mix:, file:)")
    if kind == "gauss":
        vals = _parse_floats(payload, "gauss spec")
        if len(vals) != 2:
            raise ParseError(f"gauss spec needs mean,variance, got {payload!r}")
        m, v = vals
        if v <= 0:
            raise ParseError(f"gauss spec variance must be positive, got {v}")
        return GaussianMixture1D([1.0], [m], [np.sqrt(v)])
    if kind == "mix":
        body = payload.strip()
        if body.startswith("[") and body.endswith("]"):
            body = body[1:-1]
        rows = [r for r in body.split(";") if r.strip()]
        if not rows:
            raise ParseError("mix spec has no components")
        w, m, s = [], [], []
        for i, row in enumerate(rows):
            vals = _parse_floats(row, f"mix component {i}")
            if len(vals) != 3:
                raise ParseError(
                    f"mix component {i} needs weight,mean,variance, got {row!r}")
            if vals[0] <= 0 or vals[2] <= 0:
                raise ParseError(
                    f"mix component {i}: weight and variance must be positive")
            w.append(vals[0])
            m.append(vals[1])
            s.append(np.sqrt(vals[2]))
        w = np.asarray(w)
        return GaussianMixture1D(w / w.sum(), m, s)
    if kind == "file":
        return _load_density_file(payload)
    raise ParseError(f"unknown density spec kind {kind!r} "
                     "(expected gauss:, mix:, file:)")


def _load_density_file(path: str):
    if not os.path.exists(path):
        raise ParseError(f"density file not found: {path}")
    if path.endswith(".csv"):
        return load_grid_csv(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if isinstance(payload, dict) and "factors" in payload:
        factors = []
        for i, spec in enumerate(payload["factors"]):
            try:
                factors.append(GaussianMixture1D(
                    spec["weights"], spec["means"], spec["stds"]))
            except (KeyError, TypeError, ValueError, BfstabError) as exc:
                raise ParseError(f"{path}: factor {i}: {exc}") from None
        return ProductFunction(factors)
    mix = mixture_from_json(payload)
    if mix.dim == 1:
        return GaussianMixture1D(mix.weights, mix.means[:, 0],
                                 np.sqrt(mix.covs[:, 0, 0]))
    return mix


def parse_g_spec(text: str) -> GFun:
    """zero | const:b | linear:a[,b] | quad:k[,a[,b]] | bump."""
    from .corpus import _sin_bump

    kind, _, payload = text.partition(":")
    if kind == "zero":
        return GFun.const(0.0)
    if kind == "bump":
        return GFun.from_callable(_sin_bump)
    vals = _parse_floats(payload, f"g spec {kind}") if payload else []
    if kind == "const":
        return GFun.const(*(vals or [0.0]))
    if kind == "linear":
        if not 1 <= len(vals) <= 2:
            raise ParseError("linear g spec needs slope[,offset]")
        return GFun.linear(*vals)
    if kind == "quad":
        if not 1 <= len(vals) <= 3:
            raise ParseError("quad g spec needs curvature[,slope[,offset]]")
        return GFun.quadratic(*vals)
    raise ParseError(f"unknown g spec {text!r} "
                     "(expected zero, const:, linear:, quad:, bump)")


# ---------------------------------------------------------------------------
# output


def _emit(text: str, out_path):
    if out_path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out_path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bfstab-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _reports_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_REPORT_COLUMNS)
    for rep in reports:
        row = rep.to_json_dict()
        writer.writerow([repr(row[c]) if isinstance(row[c], float)
                         else row[c] for c in _REPORT_COLUMNS])
    return buf.getvalue()


def _payload_json(command: str, config: dict, body: dict) -> str:
    payload = {"command": command, "version": __version__, "config": config}
    payload.update(body)
    return json.dumps(payload, indent=2) + "\n"


def _emit_reports(args, config: dict, reports) -> int:
    counts = {}
    for rep in reports:
        counts[rep.status] = counts.get(rep.status, 0) + 1
    if args.format == "csv":
        text = _reports_csv(reports)
    else:
        text = _payload_json(args.command, config, {
            "summary": {k: counts.get(k, 0)
                        for k in ("pass", "fail", "inconclusive", "error")},
            "reports": [r.to_json_dict() for r in reports]})
    _emit(text, args.out)
    if counts.get("fail", 0) or counts.get("error", 0):
        return 2
    if counts.get("inconclusive", 0):
        return 3
    return 0


# ---------------------------------------------------------------------------
# task plumbing


def _budget_kwargs(args) -> dict:
    kw = {"seed": args.seed, "mc_budget": args.mc_budget,
          "directions": args.directions}
    if getattr(args, "tol", None) is not None:
        kw["tol"] = args.tol
    if hasattr(args, "m_samples"):
        kw["m_samples"] = args.m_samples
        kw["repeats"] = args.repeats
    return kw


def _run_task(task):
    case_id, obj, theorem, kw = task
    return run_case(case_id, obj, theorem, **kw)


def _run_tasks(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks))


def _science_config(args, for_theorems, **extra) -> dict:
    """Resolved settings that affect report values (never --jobs or --out)."""
    if args.tol is not None:
        tol = args.tol
    else:
        resolved = {t: DEFAULT_TOL[t] for t in for_theorems}
        tol = resolved if len(resolved) > 1 else next(iter(resolved.values()))
    cfg = {"seed": args.seed, "mc_budget": args.mc_budget,
           "directions": args.directions, "tol": tol}
    if hasattr(args, "m_samples"):
        cfg["m_samples"] = args.m_samples
        cfg["repeats"] = args.repeats
    cfg.update(extra)
    return cfg


# ---------------------------------------------------------------------------
# subcommands


def _cmd_distance(args) -> int:
    u = parse_density_spec(args.u)
    v = parse_density_spec(args.v)
    for name, d in (("--u", u), ("--v", v)):
        if not isinstance(d, Density1D):
            raise ParseError(f"{name}: the distance command works on 1-D "
                             "densities; use 'deficit --theorem main' for d_n")
    tol = 1e-9 if args.tol is None else args.tol
    value, err = bf_distance_full(u, v, tol=tol)
    config = {"u": args.u, "v": args.v, "tol": tol}
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["value", "error_estimate"])
        writer.writerow([repr(value), repr(err)])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_payload_json("distance", config,
                            {"value": value, "error_estimate": err}), args.out)
    return 0


def _single_report_cmd(args, obj, theorem) -> int:
    kw = _budget_kwargs(args)
    rep = run_case(args.case_id, obj, theorem, **kw)
    exit_code = _EXIT_BY_STATUS[rep.status]
    config = _science_config(args, [theorem], theorem=theorem)
    if args.format == "csv":
        _emit(_reports_csv([rep]), args.out)
    else:
        _emit(_payload_json(args.command, config,
                            {"report": rep.to_json_dict()}), args.out)
    return exit_code


def _cmd_deficit(args) -> int:
    if args.theorem == "pl":
        if args.g is None:
            raise ParseError("--theorem pl needs --g and --lam")
        return _single_report_cmd(args, (parse_g_spec(args.g), args.lam),
                                  "pl")
    if args.measure is None:
        raise ParseError("--measure is required")
    return _single_report_cmd(args, parse_density_spec(args.measure),
                              args.theorem)


def _cmd_talagrand(args) -> int:
    obj = parse_density_spec(args.measure)
    if args.mode != "auto":
        from .deficits import verify_talagrand
        kw = _budget_kwargs(args)
        kw.pop("directions", None)
        kw.pop("mc_budget", None)
        tol = kw.pop("tol", DEFAULT_TOL["talagrand"])
        try:
            rep = verify_talagrand(obj, args.mode, case_id=args.case_id,
                                   tol=tol, **kw)
        except BfstabError as exc:
            raise ParseError(f"--mode {args.mode}: {exc}") from None
        config = _science_config(args, ["talagrand"], mode=args.mode)
        if args.format == "csv":
            _emit(_reports_csv([rep]), args.out)
        else:
            _emit(_payload_json("talagrand", config,
                                {"report": rep.to_json_dict()}), args.out)
        return _EXIT_BY_STATUS[rep.status]
    return _single_report_cmd(args, obj, "talagrand")


def _cmd_verify(args) -> int:
    cases = suite_cases(args.suite)
    theorems = suite_theorems(args.suite, args.theorem)
    kw = _budget_kwargs(args)
    tasks = [(cid, obj, thm, kw)
             for thm in theorems
             for cid, obj in cases if compatible(obj, thm)]
    reports = _run_tasks(tasks, args.jobs)
    config = _science_config(args, theorems, suite=args.suite,
                             theorems=theorems)
    return _emit_reports(args, config, reports)


def _cmd_sweep(args) -> int:
    values = _parse_floats(args.values, "--values")
    if not values:
        raise ParseError("--values must contain at least one number")
    kw = _budget_kwargs(args)
    tasks = []
    if args.kind == "sigma":
        theorem = args.theorem or "main"
        for v in values:
            if v <= 0:
                raise ParseError("sigma values must be positive")
            mix = GaussianMixture1D([1.0], [0.0], [v])
            tasks.append((f"sigma-{v:g}", mix, theorem, kw))
    elif args.kind == "tilt":
        theorem = args.theorem or "main"
        for a in values:
            mix = GaussianMixture1D([1.0], [a], [1.0])
            tasks.append((f"tilt-{a:g}", mix, theorem, kw))
    elif args.kind == "lambda":
        theorem = "pl"
        g = parse_g_spec(args.g or "quad:0.5")
        for lam in values:
            if not 0.0 < lam < 1.0:
                raise ParseError("lambda values must lie in (0, 1)")
            tasks.append((f"lambda-{lam:g}", (g, lam), "pl", kw))
    else:  # pragma: no cover - argparse restricts choices
        raise ParseError(f"unknown sweep kind {args.kind!r}")
    reports = _run_tasks(tasks, args.jobs)
    config = _science_config(args, [theorem], kind=args.kind, values=values,
                             theorem=theorem)
    return _emit_reports(args, config, reports)


def _cmd_pl_check(args) -> int:
    g = parse_g_spec(args.g)
    kw = _budget_kwargs(args)
    rep = run_case(args.case_id, (g, args.lam), "pl", **kw)
    config = _science_config(args, ["pl"], g=args.g, lam=args.lam)
    body = {"report": rep.to_json_dict()}
    if args.diagnostics:
        rows = lambda_limit_diagnostics(g)
        body["diagnostics"] = [vars(r) for r in rows]
    if args.format == "csv":
        _emit(_reports_csv([rep]), args.out)
    else:
        _emit(_payload_json("pl-check", config, body), args.out)
    return _EXIT_BY_STATUS[rep.status]


# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--seed", type=int, default=0,
                   help="seed for all stochastic stages (default 0)")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel case workers (default 1)")
    p.add_argument("--tol", type=float, default=None,
                   help="pass tolerance override")
    p.add_argument("--mc-budget", dest="mc_budget", type=int, default=10 ** 6,
                   help="Monte Carlo budget for high-dimensional stages")
    p.add_argument("--directions", type=int, default=None,
                   help="coarse sphere-lattice size override")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="output path (atomic write)")
    p.add_argument("--case-id", dest="case_id", default="cli",
                   help="identifier stamped into single-case reports")


def build_parser() -> _Parser:
    top = _Parser(prog="bfstab", description=__doc__,
                  formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True,
                             parser_class=_Parser)

    p = sub.add_parser("distance", help="transport distance between two "
                                        "1-D densities")
    p.add_argument("--u", required=True, help="first density spec")
    p.add_argument("--v", required=True, help="second density spec")
    _add_common(p)
    p.set_defaults(fn=_cmd_distance)

    p = sub.add_parser("deficit", help="verify one inequality on one measure")
    p.add_argument("--measure", default=None, help="density spec")
    p.add_argument("--theorem", choices=("main", "corollary", "talagrand",
                                         "pl"), default="main")
    p.add_argument("--g", default=None, help="g spec for --theorem pl")
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--m-samples", dest="m_samples", type=int, default=2048)
    p.add_argument("--repeats", type=int, default=16)
    _add_common(p)
    p.set_defaults(fn=_cmd_deficit)

    p = sub.add_parser("talagrand", help="Talagrand deficit bound")
    p.add_argument("--measure", required=True)
    p.add_argument("--mode", choices=("auto", "1d", "product", "sampled-nd"),
                   default="auto")
    p.add_argument("--m-samples", dest="m_samples", type=int, default=2048)
    p.add_argument("--repeats", type=int, default=16)
    _add_common(p)
    p.set_defaults(fn=_cmd_talagrand)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--theorem", choices=("main", "corollary", "talagrand",
                                         "pl"), default=None)
    p.add_argument("--m-samples", dest="m_samples", type=int, default=2048)
    p.add_argument("--repeats", type=int, default=16)
    _add_common(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("sweep", help="parameter sweep, one report row per "
                                     "grid point")
    p.add_argument("--kind", required=True, choices=("sigma", "tilt",
                                                     "lambda"))
    p.add_argument("--values", required=True,
                   help="comma-separated parameter values")
    p.add_argument("--theorem", choices=("main", "corollary", "talagrand"),
                   default=None)
    p.add_argument("--g", default=None, help="g spec for lambda sweeps")
    _add_common(p)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("pl-check", help="quantitative Prekopa-Leindler check")
    p.add_argument("--g", required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--diagnostics", action="store_true",
                   help="append the lambda-limit expansion table")
    _add_common(p)
    p.set_defaults(fn=_cmd_pl_check)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"bfstab: error: {exc}", file=sys.stderr)
        return 1
    except BfstabError as exc:
        print(f"bfstab: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"bfstab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
