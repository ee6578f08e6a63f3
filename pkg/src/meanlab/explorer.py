"""Counterexample search, optimal-p bisection and conjecture probing.

Searches run in double precision over the cancellation-safe kernels and hand
their most negative candidates to :func:`adjudicate`, which re-evaluates the
same kernel forms in mpmath. A point is only reported as a violated witness
when the high-precision gap is negative at the requested digits *and* keeps
its sign at twice as many digits.

Points are carried as decimal strings (the shortest round-trip ``repr`` of
the double), so a stored witness re-adjudicates to the same value.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from types import SimpleNamespace

import numpy as np

from . import catalog
from .backends import DoubleBackend
from .catalog import HOLDS, INDETERMINATE, VIOLATED, GapReport
from .errors import DomainError, EscalationDisabledError
from .scalar_means import arithmetic_k, geometric_k, naive_weighted_log_mean
from .simplex import nelder_mead

NO_VIOLATION = "no-violation-found"
P_BRACKET = (Fraction(1, 2), Fraction(2, 3))
OPTIMAL_P_WITNESS = {"a": "1e-10", "b": "1", "v": "0.9999999999", "p": "13/25"}
PRINTED_OPTIMAL_P_GAP = -1.39948e-8
CHUNK = 1 << 16


@dataclass(frozen=True)
class SearchConfig:
    """Search box, grid, refinement budget and precision policy.

    ``digits=None`` is the double-only policy; otherwise candidates are
    escalated to ``digits`` significant digits (at least 30). ``fixed`` pins
    parameters (e.g. ``{"p": "13/25"}``) and ``grid`` overrides generated
    axes with explicit values.
    """

    log_range: float = math.log(1e6)
    delta: float = 1e-6
    r_range: tuple = (-2.0, 2.0)
    p_range: tuple = (0.0, 1.0)
    resolution: int = 64
    extra_resolution: int = 16
    budget: int = 400
    seed: int = 0
    digits: int | None = 50
    candidates: int = 8
    threads: int | None = None
    fixed: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.resolution < 2 or self.extra_resolution < 2:
            raise DomainError("grid resolution must be at least 2 per axis")
        if not 0.0 < self.delta < 0.5:
            raise DomainError("delta must lie in (0, 1/2)")
        if self.digits is not None and self.digits < 30:
            raise DomainError("escalation needs at least 30 digits")
        if self.budget < 0:
            raise DomainError("refinement budget must be nonnegative")
        if self.candidates < 1:
            raise DomainError("need at least one candidate")

    @property
    def escalate(self) -> bool:
        return self.digits is not None

    def workers(self) -> int:
        if self.threads:
            return max(1, int(self.threads))
        try:
            return max(1, int(os.environ.get("MEANLAB_THREADS", "1")))
        except ValueError:
            return 1

    def bounds(self, name):
        if name in ("a", "b"):
            return (-self.log_range, self.log_range)
        if name == "v":
            return (self.delta, 1.0 - self.delta)
        if name == "r":
            return tuple(self.r_range)
        return tuple(self.p_range)


@dataclass
class SearchResult:
    case_id: str
    point: dict
    gap: object
    relative_gap: object
    precision: str
    status: str
    evaluations: int
    start_gap: float | None = None
    confirmed: bool | None = None
    report: GapReport | None = None

    def to_record(self) -> dict:
        return {
            "id": self.case_id,
            "point": dict(self.point),
            "gap": self.gap,
            "relative_gap": self.relative_gap,
            "precision": self.precision,
            "verdict": self.status,
            "paper_anchor": catalog.get_case(self.case_id).paper_anchor,
            "evaluations": self.evaluations,
        }


def decimal_point(point) -> dict:
    """Exact decimal-string form of a point (floats via their round-trip repr)."""
    out = {}
    for k, x in point.items():
        if isinstance(x, str):
            out[k] = x
        else:
            out[k] = repr(float(x))
    return out


# -- adjudication ------------------------------------------------------------------------

def adjudicate(case_id: str, point, digits: int = 50) -> GapReport:
    """High-precision gap at ``point`` with ``digits`` significant digits (>= 30)."""
    if digits < 30:
        raise DomainError("adjudication needs at least 30 digits")
    return catalog.evaluate_gap(case_id, decimal_point(point), precision=int(digits))


def confirm(case_id: str, point, digits: int = 50) -> bool:
    """A violated verdict keeps its sign at twice the digits."""
    first = adjudicate(case_id, point, digits)
    second = adjudicate(case_id, point, 2 * digits)
    return first.verdict == VIOLATED and second.verdict == VIOLATED


def _status_of(report: GapReport, case_id: str, point, digits) -> tuple:
    if report.verdict == VIOLATED:
        if digits is None:
            return VIOLATED, None
        ok = confirm(case_id, point, digits)
        return (VIOLATED if ok else INDETERMINATE), ok
    if report.gap == 0:
        # equality, e.g. a = b: the claimed order holds there
        return NO_VIOLATION, None
    if report.verdict == INDETERMINATE:
        return INDETERMINATE, None
    return NO_VIOLATION, None


# -- grid scan ---------------------------------------------------------------------------

def _axes(case, config):
    axes = {}
    for k in case.params:
        if k in config.fixed:
            axes[k] = [config.fixed[k]]
        elif k in config.grid:
            axes[k] = list(config.grid[k])
        elif k in ("a", "b"):
            axes[k] = list(np.exp(np.linspace(-config.log_range, config.log_range, config.resolution)))
        elif k == "v":
            axes[k] = list(np.linspace(config.delta, 1.0 - config.delta, config.resolution))
        else:
            lo, hi = config.bounds(k)
            vals = np.linspace(lo, hi, config.extra_resolution)
            if k == "r":
                vals = vals[vals != 0.0]
            axes[k] = list(vals)
        if not axes[k]:
            raise DomainError(f"empty axis {k!r}")
    return axes


def _to_float(x):
    if isinstance(x, str):
        return float(Fraction(x)) if "/" in x else float(x)
    return float(x)


def _scan_chunk(case_id, params, cols, lo, hi):
    chunk = {k: cols[k][lo:hi] for k in params}
    batch = catalog.evaluate_batch(case_id, chunk, check_domain=False)
    case = catalog.get_case(case_id)
    P = catalog._namespace(case, chunk, catalog.ArrayBackend())
    ok = np.broadcast_to(catalog._check_ranges(case, P), batch.gap.shape)
    rel = np.where(ok, batch.relative_gap, np.inf)
    rel = np.where(np.isnan(rel), np.inf, rel)
    return rel


def _parallel_chunks(n, workers, fn):
    bounds = [(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    else:
        parts = [fn(*b) for b in bounds]
    return parts


def _scan(case_id, config):
    case = catalog.get_case(case_id)
    axes = _axes(case, config)
    names = list(case.params)
    mesh = np.meshgrid(*[np.array([_to_float(x) for x in axes[k]]) for k in names], indexing="ij")
    cols = {k: m.ravel() for k, m in zip(names, mesh)}
    n = cols[names[0]].size
    rel = np.concatenate(_parallel_chunks(n, config.workers(),
                                          lambda lo, hi: _scan_chunk(case_id, names, cols, lo, hi)))
    if not np.any(np.isfinite(rel)):
        raise DomainError(f"no grid point lies in the domain of {case_id!r}")
    return cols, rel


def _pick(cols, idx, config):
    pt = {k: float(c[idx]) for k, c in cols.items()}
    for k, x in config.fixed.items():
        pt[k] = x
    return decimal_point(pt)


def _result(case_id, point, config, evaluations, start_gap=None):
    if config.escalate:
        rep = adjudicate(case_id, point, config.digits)
    else:
        rep = catalog.evaluate_gap(case_id, point)
    status, confirmed = _status_of(rep, case_id, point, config.digits)
    return SearchResult(case_id, point, rep.gap, rep.relative_gap, rep.precision, status,
                        evaluations, start_gap, confirmed, rep)


def grid_scan(case_id: str, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Evaluate the full grid and report its minimum-gap point.

    Under the escalate policy the ``config.candidates`` smallest grid gaps are
    adjudicated and the smallest high-precision gap wins; out-of-domain grid
    points of conditional cases are skipped.
    """
    cols, rel = _scan(case_id, config)
    n = rel.size
    if not config.escalate:
        idx = int(np.argmin(rel))
        return _result(case_id, _pick(cols, idx, config), config, n)
    k = min(config.candidates, int(np.count_nonzero(np.isfinite(rel))))
    order = np.argsort(rel, kind="stable")[:k]
    best = None
    for idx in order:
        pt = _pick(cols, int(idx), config)
        rep = adjudicate(case_id, pt, config.digits)
        if best is None or rep.relative_gap < best[1].relative_gap:
            best = (pt, rep)
    return _result(case_id, best[0], config, n)


# -- refinement ------------------------------------------------------------------------------

def _objective(case_id, config, free, base):
    """Double-precision relative gap as a function of search coordinates."""
    case = catalog.get_case(case_id)
    bk = DoubleBackend()
    fixed = {k: _to_float(x) for k, x in base.items() if k not in free}

    def point_of(x):
        vals = dict(fixed)
        for name, xi in zip(free, x):
            vals[name] = math.exp(xi) if name in ("a", "b") else float(xi)
        return vals

    def f(x):
        vals = point_of(x)
        P = SimpleNamespace(**vals)
        if "v" in vals:
            P.w = 1.0 - P.v
        if not catalog._check_ranges(case, P):
            return math.inf
        try:
            terms = case.terms(bk, P)
        except (ValueError, OverflowError, ZeroDivisionError):
            return math.inf
        gap = min(terms[i + 1] - terms[i] for i in range(len(terms) - 1))
        scale = max(P.a, P.b) ** case.degree
        if abs(gap) < _noise_floor(case, P, scale):
            return 0.0
        return gap / scale

    return f, point_of


def _noise_floor(case, P, scale):
    """Scalar form of the catalog conditioning bound; smaller gaps count as ties."""
    k = 1.0
    if case.uses_weight and catalog.ENDPOINT < P.v < 1.0 - catalog.ENDPOINT:
        k = max(P.v / (1.0 - P.v), (1.0 - P.v) / P.v, 1.0)
    lr = abs(math.log(P.a) - math.log(P.b))
    return catalog.COND_SAFETY * catalog.UNIT_ROUNDOFF * k * max(lr, 1.0) * scale


def _coords(point, free):
    out = []
    for k in free:
        x = _to_float(point[k])
        out.append(math.log(x) if k in ("a", "b") else x)
    return np.array(out)


def _minimise(case_id, start, config):
    case = catalog.get_case(case_id)
    start = decimal_point(start)
    free = [k for k in case.params if k not in config.fixed]
    f, point_of = _objective(case_id, config, free, start)
    x0 = _coords(start, free)
    lo = np.array([min(config.bounds(k)[0], x) for k, x in zip(free, x0)])
    hi = np.array([max(config.bounds(k)[1], x) for k, x in zip(free, x0)])
    steps = np.array([0.5 if k in ("a", "b") else 0.05 for k in free])
    res = nelder_mead(f, x0, lo, hi, step=steps, max_iter=config.budget)
    f0 = f(x0)
    if res.fun < f0:
        pt = point_of(res.x)
        pt.update({k: start[k] for k in case.params if k not in free})
        pt = decimal_point({k: pt[k] for k in case.params})
    else:
        pt = start
    return pt, min(res.fun, f0), f0, res.evaluations


def refine(case_id: str, start, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Nelder-Mead descent on the double-precision gap from ``start``.

    Works in coordinates (ln a, ln b, v[, r, p]) clamped to the search box
    widened to contain the start; leaving a conditional domain scores
    ``+inf`` and gaps below the double-precision noise floor score 0. The
    returned point's double gap never exceeds the start gap.
    """
    start = decimal_point(start)
    catalog.evaluate_gap(case_id, start)  # validates case and domain
    pt, _, f0, evals = _minimise(case_id, start, config)
    return _result(case_id, pt, config, evals, start_gap=f0)


def search(case_id: str, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Grid scan, refinement of the smallest candidates, then adjudication."""
    cols, rel = _scan(case_id, config)
    k = min(config.candidates, int(np.count_nonzero(np.isfinite(rel))))
    order = np.argsort(rel, kind="stable")[:k]
    evals = rel.size
    best = None
    for idx in order:
        pt, val, _, e = _minimise(case_id, _pick(cols, int(idx), config), config)
        evals += e
        if best is None or val < best[1]:
            best = (pt, val)
    return _result(case_id, best[0], config, evals)


# -- optimal p ----------------------------------------------------------------------------------

@dataclass
class OptimalPResult:
    bracket: tuple
    lower: SearchResult
    upper: SearchResult
    steps: list
    witness_naive: float
    witness_oracle: object
    witness_disagree: bool
    printed_gap: float = PRINTED_OPTIMAL_P_GAP
    label: str = "empirical estimate over the sampled domain"

    def findings(self, digits: int) -> dict:
        return {
            "bracket": [float(self.bracket[0]), float(self.bracket[1])],
            "width": float(self.bracket[1] - self.bracket[0]),
            "label": self.label,
            "witness": {
                "point": dict(OPTIMAL_P_WITNESS),
                "naive_double_gap": self.witness_naive,
                "oracle_gap": self.witness_oracle,
                "oracle_precision": f"bigfloat({digits})",
                "printed_gap": self.printed_gap,
                "disagree": self.witness_disagree,
            },
        }


def naive_optimal_p_gap(a: float, b: float, v: float, p: float) -> float:
    """Gap of optimal_p_mix with L_v evaluated by the literal textbook formula."""
    rhs = (1.0 - p) * arithmetic_k(a, b, v) + p * geometric_k(a, b, v)
    return rhs - naive_weighted_log_mean(a, b, v)


def _inner(p, config):
    cfg = SearchConfig(**{**config.__dict__, "fixed": {**config.fixed, "p": _fraction_str(p)}})
    return search("optimal_p_mix", cfg)


def _fraction_str(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}"


def find_optimal_p(config: SearchConfig = SearchConfig(resolution=32), width: float = 1e-4) -> OptimalPResult:
    """Bisect p in [1/2, 2/3] for the largest p with no violated witness.

    Each step runs a grid scan plus refinement over (a, b, v) at fixed p and
    adjudicates candidates at ``config.digits`` (at least 50). The bracket is
    an empirical estimate: it depends on the searched box.
    """
    if not config.escalate:
        raise EscalationDisabledError("optimal-p search requires precision escalation")
    if config.digits < 50:
        config = SearchConfig(**{**config.__dict__, "digits": 50})
    lo, hi = P_BRACKET
    lower, upper = _inner(lo, config), _inner(hi, config)
    if lower.status == VIOLATED:
        raise DomainError("p = 1/2 produced a violated witness; the search box is inconsistent")
    if upper.status != VIOLATED:
        raise DomainError("p = 2/3 produced no violated witness; widen the search box")
    steps = [(float(lo), lower.status), (float(hi), upper.status)]
    while float(hi - lo) > width:
        mid = (lo + hi) / 2
        res = _inner(mid, config)
        steps.append((float(mid), res.status))
        if res.status == VIOLATED:
            hi, upper = mid, res
        else:
            lo, lower = mid, res
    a, b, v, p = (_to_float(OPTIMAL_P_WITNESS[k]) for k in ("a", "b", "v", "p"))
    naive = naive_optimal_p_gap(a, b, v, p)
    oracle = adjudicate("optimal_p_mix", OPTIMAL_P_WITNESS, config.digits)
    disagree = (naive < 0) != (oracle.gap < 0) or abs(naive - float(oracle.gap)) > 1e-3 * abs(float(oracle.gap))
    return OptimalPResult((lo, hi), lower, upper, steps, naive, oracle.gap, bool(disagree))


# -- conjecture probe -----------------------------------------------------------------------------

@dataclass
class ConjectureEvidence:
    samples: int
    refined: int
    sampled_min_gap: float
    result: SearchResult


def probe_conjecture(samples: int, config: SearchConfig = SearchConfig(), keep: int = 100) -> ConjectureEvidence:
    """Random sampling plus refinement of the ``keep`` smallest gaps of the nested-L conjecture.

    Samples come in fixed-size chunks, each drawing from its own spawned
    seed, so the result does not depend on the thread count.
    """
    case_id = "conjecture_nested_L"
    samples = int(samples)
    if samples < 1:
        raise DomainError("need at least one sample")
    seeds = np.random.SeedSequence(config.seed).spawn((samples + CHUNK - 1) // CHUNK)

    def run(lo, hi):
        rng = np.random.default_rng(seeds[lo // CHUNK])
        pts = catalog.sample_domain(case_id, hi - lo, rng, log_range=config.log_range)
        batch = catalog.evaluate_batch(case_id, pts)
        rel = np.where(np.isnan(batch.relative_gap), np.inf, batch.relative_gap)
        idx = np.argsort(rel, kind="stable")[:keep]
        return [(float(rel[i]), lo + int(i), {k: float(pts[k][i]) for k in pts}) for i in idx]

    parts = _parallel_chunks(samples, config.workers(), run)
    cands = sorted((c for part in parts for c in part), key=lambda c: (c[0], c[1]))[:keep]
    sampled_min = cands[0][0]
    best, evals = None, samples
    for _, _, pt in cands:
        q, val, _, e = _minimise(case_id, pt, config)
        evals += e
        if best is None or val < best[1]:
            best = (q, val)
    res = _result(case_id, best[0], config, evals)
    return ConjectureEvidence(samples, len(cands), sampled_min, res)


# -- witness files ----------------------------------------------------------------------------------

def append_witness(path, result: SearchResult) -> dict:
    """Append one JSON line describing ``result`` (points as decimal strings)."""
    from .report import encode_json

    rec = result.to_record()
    rec["confirmed"] = result.confirmed
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(encode_json(rec, indent=None) + "\n")
    return rec


def read_witnesses(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
