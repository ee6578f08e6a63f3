"""``meanlab`` command-line interface.

Exit codes: 0 pass, 1 violation, 2 usage error, 3 indeterminate under
``--strict``, 4 confirmed counterexample to the nested-L conjecture.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import catalog, explorer, operator_means as om, scalar_means as sm
from .errors import MeanlabError
from .quadrature import QuadratureRule
from .report import ReportEnvelope, RunConfig, format_number, load_config

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INDETERMINATE, EXIT_CONJECTURE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _count(text: str) -> int:
    """Integer count that also accepts ``1e6`` style input."""
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x) or x != int(x):
        raise argparse.ArgumentTypeError(f"not an integer count: {text!r}")
    return int(x)


def _int_list(text: str) -> list:
    try:
        out = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return out


def _float_list(text: str) -> list:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run options")
    g.add_argument("--config", help="flat key=value configuration file; flags override it")
    g.add_argument("--format", choices=("json", "csv"), default=None)
    g.add_argument("--output", help="write the report here instead of stdout")
    g.add_argument("--threads", type=int, default=None, help="worker threads (fallback: MEANLAB_THREADS)")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--digits", type=int, default=None, help="digits for high-precision adjudication (>= 30)")
    g.add_argument("--precision", choices=("double", "escalate"), default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="meanlab", description="Scalar and operator mean inequality laboratory.")
    sub = parser.add_subparsers(dest="group", required=True)

    means = sub.add_parser("means").add_subparsers(dest="action", required=True)
    ev = means.add_parser("eval", parents=[common], help="evaluate one mean")
    ev.add_argument("--kind", required=True,
                    help="A, G, H, L, Hz, P3, I, C, LNR (r-log of a/b) or RYF (refined Young factor)")
    ev.add_argument("--a", type=float, required=True)
    ev.add_argument("--b", type=float, default=1.0)
    ev.add_argument("--v", type=float, default=None)
    ev.add_argument("--r", type=float, default=None)

    ineq = sub.add_parser("ineq").add_subparsers(dest="action", required=True)
    ck = ineq.add_parser("check", parents=[common], help="check a registered inequality")
    ck.add_argument("--case", required=True, help="case id or 'all'")
    for name in ("a", "b", "v", "r", "p"):
        ck.add_argument(f"--{name}", default=None, help="point coordinate (decimal or p/q)")
    ck.add_argument("--random", type=_count, default=None, metavar="N", help="check N seeded random points")
    ck.add_argument("--tol", type=float, default=None)
    ck.add_argument("--strict", action="store_true", help="exit 3 if any verdict stays indeterminate")

    op = sub.add_parser("operator").add_subparsers(dest="action", required=True)
    ov = op.add_parser("verify", parents=[common], help="verify operator inequalities on random SPD pairs")
    ov.add_argument("--case", default="all")
    ov.add_argument("--dims", type=_int_list, default=[2, 3, 5, 8])
    ov.add_argument("--pairs", type=_count, default=None)
    ov.add_argument("--nodes", type=int, default=None)
    ov.add_argument("--tol", type=float, default=None)
    ov.add_argument("--cond", type=float, default=1e4, help="condition number of generated matrices")
    ov.add_argument("--r", type=_float_list, default=[0.5, -0.5, 1.0, -1.0])
    ov.add_argument("--v", type=float, default=None, help="fixed weight (default: random per pair)")
    ov.add_argument("--ordered-pairs", action="store_true",
                    help="generate pairs meeting the Tsallis order precondition instead of skipping")
    ov.add_argument("--manifest", help="JSON file of explicit matrix pairs")
    ov.add_argument("--strict", action="store_true")

    se = sub.add_parser("search").add_subparsers(dest="action", required=True)
    ce = se.add_parser("counterexample", parents=[common], help="grid scan plus refinement for a violation")
    ce.add_argument("--case", required=True)
    _search_flags(ce, grid=64)
    ce.add_argument("--witness-file", help="append violated witnesses as JSON lines")
    opt = se.add_parser("optimal-p", parents=[common], help="bisect the optimal mixing weight p")
    _search_flags(opt, grid=32)
    opt.add_argument("--width", type=float, default=1e-4)

    cj = sub.add_parser("conjecture").add_subparsers(dest="action", required=True)
    pr = cj.add_parser("probe", parents=[common], help="random probe of the nested-L conjecture")
    pr.add_argument("--samples", type=_count, default=None)
    _search_flags(pr, grid=64)
    pr.add_argument("--witness-file")
    return parser


def _search_flags(p, grid):
    p.add_argument("--grid", type=int, default=grid, help="grid points per axis")
    p.add_argument("--budget", type=int, default=400, help="simplex iterations per refinement")
    p.add_argument("--delta", type=float, default=1e-6, help="weights range over [delta, 1 - delta]")
    p.add_argument("--log-range", type=float, default=math.log(1e6), help="|ln a|, |ln b| bound")
    p.add_argument("--candidates", type=int, default=8)


def _run_config(args, extra) -> RunConfig:
    overrides = {
        "seed": args.seed, "digits": args.digits, "precision": args.precision,
        "format": args.format, "output": args.output, "threads": args.threads,
        "tol": getattr(args, "tol", None) if args.group == "ineq" else None,
        "loewner_tol": getattr(args, "tol", None) if args.group == "operator" else None,
        "nodes": getattr(args, "nodes", None),
        "samples": getattr(args, "samples", None) or getattr(args, "random", None),
    }
    return load_config(args.config, overrides, extra)


# -- commands -------------------------------------------------------------------------------

def cmd_means_eval(args, out) -> int:
    pair = sm.ScalarPair(args.a, args.b)
    w = sm.WeightSplit(0.5 if args.v is None else args.v)
    d = None if args.r is None else sm.Deformation(args.r)
    kind = args.kind
    if kind == "LNR":
        if d is None:
            raise UsageError("--kind LNR needs --r")
        value = sm.r_log(pair.ratio, d)
    elif kind == "RYF":
        value = sm.refined_young_factor(pair, w, d)
    elif kind == "I":
        value = sm.identric(pair)
    elif kind == "C":
        value = sm.contraharmonic(pair)
    else:
        value = sm.mean_of_kind(sm.MeanKind.parse(kind), pair, w)
    out.write(format_number(value) + "\n")
    return EXIT_OK


def _point_args(args, case):
    pt = {}
    for k in case.params:
        val = getattr(args, k)
        if val is None:
            raise UsageError(f"case {case.id!r} needs --{k} (or use --random N)")
        pt[k] = val
    return pt


def _escalate(case_id, point, rep, cfg):
    digits = cfg.escalation_digits
    if rep.verdict == catalog.INDETERMINATE and digits is not None:
        return catalog.evaluate_gap(case_id, point, precision=digits)
    return rep


def _random_record(case_id, cfg, n, rng):
    pts = catalog.sample_domain(case_id, n, rng)
    batch = catalog.evaluate_batch(case_id, pts, cfg.tol)
    verdicts = batch.verdict.copy()
    case = catalog.get_case(case_id)
    if cfg.escalation_digits is not None:
        for i in np.flatnonzero(verdicts == catalog.INDETERMINATE):
            pt = {k: float(pts[k][i]) for k in case.params}
            verdicts[i] = catalog.evaluate_gap(case_id, pt, cfg.escalation_digits).verdict
    counts = {k: int(np.count_nonzero(verdicts == k)) for k in (catalog.HOLDS, catalog.VIOLATED, catalog.INDETERMINATE)}
    bad = np.flatnonzero(verdicts == catalog.VIOLATED)
    if bad.size == 0:
        bad = np.flatnonzero(verdicts == catalog.INDETERMINATE)
    pool = bad if bad.size else np.arange(len(batch))
    i = int(pool[np.argmin(batch.relative_gap[pool])])
    pt = {k: float(pts[k][i]) for k in case.params}
    rec = catalog.evaluate_gap(case_id, pt, "double", cfg.tol).to_record()
    if verdicts[i] != rec["verdict"]:
        rep = catalog.evaluate_gap(case_id, pt, cfg.escalation_digits)
        rec = rep.to_record()
    worst = (catalog.VIOLATED if counts[catalog.VIOLATED] else
             catalog.INDETERMINATE if counts[catalog.INDETERMINATE] else catalog.HOLDS)
    rec["verdict"] = worst
    return rec, {"points": n, **counts}


def cmd_ineq_check(args, cfg):
    ids = [c.id for c in catalog.list_cases()] if args.case == "all" else [args.case]
    for cid in ids:
        catalog.get_case(cid)
    records, findings = [], {}
    if args.random is not None:
        if args.random < 1:
            raise UsageError("--random needs a positive count")
        for k, cid in enumerate(ids):
            rng = np.random.default_rng([cfg.seed, k])
            rec, tally = _random_record(cid, cfg, args.random, rng)
            records.append(rec)
            findings[cid] = tally
    else:
        for cid in ids:
            case = catalog.get_case(cid)
            pt = _point_args(args, case)
            rep = catalog.evaluate_gap(cid, pt, "double", cfg.tol)
            records.append(_escalate(cid, pt, rep, cfg).to_record())
    verdicts = [r["verdict"] for r in records]
    code = EXIT_OK
    if catalog.VIOLATED in verdicts:
        code = EXIT_VIOLATION
    elif args.strict and catalog.INDETERMINATE in verdicts:
        code = EXIT_INDETERMINATE
    return ReportEnvelope(cfg.echo(), records, exit=code, findings={"random": findings} if findings else None)


def cmd_operator_verify(args, cfg):
    rule = QuadratureRule(cfg.nodes)
    ids = list(om.OPERATOR_CASES) if args.case == "all" else [args.case]
    for cid in ids:
        if cid not in om.OPERATOR_CASES:
            raise MeanlabError(f"unknown operator case {cid!r}")
    if args.manifest:
        try:
            with open(args.manifest, encoding="utf-8") as fh:
                entries = om.load_manifest(json.load(fh))
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad manifest: {exc}") from None
        records, skipped = [], 0
        for i, (A, B, v, r) in enumerate(entries):
            for cid in ids:
                rs = [r] if r is not None else (args.r if cid == "op_zj_tsallis" else [None])
                for rr in rs:
                    d = None if rr is None else sm.Deformation(rr)
                    try:
                        rep = om.check_operator_case(cid, A, B, v, d, rule, cfg.loewner_tol)
                    except om.PreconditionError:
                        skipped += 1
                        continue
                    rec = rep.to_record()
                    rec["point"]["pair"] = i
                    records.append(rec)
    else:
        pairs = 200 if args.pairs is None else args.pairs
        if pairs < 1:
            raise UsageError("--pairs must be positive")
        res = om.verify_ensemble(ids, args.dims, pairs, cfg.seed, condition=args.cond, r_values=args.r,
                                 v=args.v, ordered=args.ordered_pairs, rule=rule, tol=cfg.loewner_tol,
                                 threads=cfg.threads)
        records, skipped = [r.to_record() for r in res.reports], res.skipped
    code = EXIT_VIOLATION if any(r["verdict"] == "violated" for r in records) else EXIT_OK
    return ReportEnvelope(cfg.echo(), records, skipped=skipped, exit=code)


def _search_config(args, cfg, **kw):
    return explorer.SearchConfig(log_range=args.log_range, delta=args.delta, resolution=args.grid,
                                 budget=args.budget, seed=cfg.seed, digits=cfg.escalation_digits,
                                 candidates=args.candidates, threads=cfg.threads, **kw)


def cmd_search_counterexample(args, cfg):
    res = explorer.search(args.case, _search_config(args, cfg))
    if args.witness_file and res.status == catalog.VIOLATED:
        explorer.append_witness(args.witness_file, res)
    return ReportEnvelope(cfg.echo(), [res.to_record()], exit=EXIT_OK)


def cmd_search_optimal_p(args, cfg):
    res = explorer.find_optimal_p(_search_config(args, cfg), width=args.width)
    findings = res.findings(max(50, cfg.digits))
    findings["steps"] = [{"p": p, "verdict": s} for p, s in res.steps]
    return ReportEnvelope(cfg.echo(), [res.lower.to_record(), res.upper.to_record()], exit=EXIT_OK,
                          findings=findings)


def cmd_conjecture_probe(args, cfg):
    ev = explorer.probe_conjecture(cfg.samples if args.samples is None else args.samples,
                                   _search_config(args, cfg))
    res = ev.result
    code = EXIT_CONJECTURE if res.status == catalog.VIOLATED and res.confirmed else EXIT_OK
    if args.witness_file and code == EXIT_CONJECTURE:
        explorer.append_witness(args.witness_file, res)
    findings = {"samples": ev.samples, "refined": ev.refined, "sampled_min_relative_gap": ev.sampled_min_gap}
    return ReportEnvelope(cfg.echo(), [res.to_record()], exit=code, findings=findings)


_COMMANDS = {
    ("ineq", "check"): cmd_ineq_check,
    ("operator", "verify"): cmd_operator_verify,
    ("search", "counterexample"): cmd_search_counterexample,
    ("search", "optimal-p"): cmd_search_optimal_p,
    ("conjecture", "probe"): cmd_conjecture_probe,
}

_ECHO_SKIP = {"config", "format", "output", "threads", "seed", "digits", "precision", "tol", "nodes",
              "samples", "random", "witness_file", "manifest"}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if (args.group, args.action) == ("means", "eval"):
            return cmd_means_eval(args, stdout)
        extra = {k: v for k, v in sorted(vars(args).items()) if k not in _ECHO_SKIP}
        if getattr(args, "random", None) is not None:
            extra["random"] = args.random
        cfg = _run_config(args, extra)
        env = _COMMANDS[(args.group, args.action)](args, cfg)
    except (MeanlabError, UsageError, ValueError) as exc:
        stderr.write(f"meanlab: error: {exc}\n")
        return EXIT_USAGE
    text = env.render(cfg.format)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return env.exit


if __name__ == "__main__":
    sys.exit(main())
