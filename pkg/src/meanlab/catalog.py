"""Registry of scalar mean inequalities as signed gap functions.

Each :class:`InequalityCase` describes its inequality as an ordered chain of
terms ``T0 <= T1 <= ... <= Tk``. The gap of a link is ``T[i+1] - T[i]`` and
the gap of the case is the smallest link gap, so a case holds at a point
exactly when its gap is nonnegative. Terms are written against the backend
protocol of :mod:`meanlab.backends`, so the same definition evaluates on
doubles, numpy arrays and mpmath numbers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import SimpleNamespace
from typing import Callable, Mapping, Sequence

import numpy as np

from .backends import ArrayBackend, BigFloatBackend, DoubleBackend
from .errors import DomainError, UnknownCaseError, UnsupportedKindError
from .scalar_means import ENDPOINT, MeanKind, ScalarPair, WeightSplit

HOLDS_EVERYWHERE = "holds-everywhere"
FAILS_SOMEWHERE = "fails-somewhere"
CONDITIONAL = "conditional"
CONJECTURE = "conjecture"

HOLDS = "holds"
VIOLATED = "violated"
INDETERMINATE = "indeterminate"

DEFAULT_TOL = 1e-12
UNIT_ROUNDOFF = 2.0 ** -53
# rounding steps covered by the double-precision conditioning bound
COND_SAFETY = 8.0
PARAM_ORDER = ("a", "b", "v", "r", "p")


@dataclass(frozen=True)
class InequalityCase:
    id: str
    description: str
    params: tuple
    terms: Callable
    expected: str
    paper_anchor: str
    link_labels: tuple
    domain: Callable | None = None
    domain_text: str = "a, b > 0"
    degree: int = 1
    witnesses: tuple = ()
    annotations: Mapping = field(default_factory=dict)

    @property
    def uses_weight(self) -> bool:
        return "v" in self.params

    def in_domain(self, P) -> object:
        """Case-specific restriction (beyond positivity and parameter ranges)."""
        if self.domain is None:
            return True
        return self.domain(P)


@dataclass(frozen=True)
class GapReport:
    case_id: str
    point: Mapping
    gap: object
    relative_gap: object
    precision: str
    verdict: str
    links: tuple = ()
    paper_anchor: str = ""

    def to_record(self) -> dict:
        return {
            "id": self.case_id,
            "point": dict(self.point),
            "gap": self.gap,
            "relative_gap": self.relative_gap,
            "precision": self.precision,
            "verdict": self.verdict,
            "paper_anchor": self.paper_anchor,
        }


class Sweep(Sequence):
    """Ordered :class:`GapReport` sequence with the minimum-gap report flagged."""

    def __init__(self, reports, min_index):
        self.reports = list(reports)
        self.min_index = min_index

    def __len__(self):
        return len(self.reports)

    def __getitem__(self, i):
        return self.reports[i]

    @property
    def minimum(self) -> GapReport:
        return self.reports[self.min_index]


@dataclass
class BatchResult:
    """Vectorised evaluation over arrays of points (double precision)."""

    case_id: str
    points: dict
    gap: np.ndarray
    relative_gap: np.ndarray
    bound: np.ndarray
    links: list
    verdict: np.ndarray

    def __len__(self):
        return len(self.gap)

    def counts(self) -> dict:
        return {k: int(np.count_nonzero(self.verdict == k)) for k in (HOLDS, VIOLATED, INDETERMINATE)}


# -- term definitions ------------------------------------------------------------

def _half(bk):
    return bk.frac(1, 2)


def _means(bk, P):
    """Unweighted A, G, H, L of (a, b)."""
    h = _half(bk)
    return (bk.A(P.a, P.b, h), bk.G(P.a, P.b, h), bk.H(P.a, P.b, h), bk.L(P.a, P.b))


def _young_factor(bk, P, q, which):
    m = bk.minimum([P.w, P.v]) if which == "mu" else -bk.minimum([-P.w, -P.v])
    return 1 + m * m * q * q / 2


def _polya(bk, P):
    A, G, _, L = _means(bk, P)
    return [L, bk.frac(2, 3) * G + bk.frac(1, 3) * A]


def _lin_chain(bk, P):
    _, G, _, L = _means(bk, P)
    return [G, L, bk.P3(P.a, P.b)]


def _refined_polya(bk, P):
    A, G, _, L = _means(bk, P)
    return [L, bk.P3(P.a, P.b), bk.frac(2, 3) * G + bk.frac(1, 3) * A]


def _wlog_half_mix(bk, P):
    return [bk.Lv(P.a, P.b, P.v), (bk.G(P.a, P.b, P.v) + bk.A(P.a, P.b, P.v)) / 2]


def _wlog_two_thirds(bk, P):
    return [bk.Lv(P.a, P.b, P.v),
            bk.frac(2, 3) * bk.G(P.a, P.b, P.v) + bk.frac(1, 3) * bk.A(P.a, P.b, P.v)]


def _four_means(bk, P):
    a, b, v = P.a, P.b, P.v
    return [bk.H(a, b, v), bk.G(a, b, v), bk.Lv(a, b, v), bk.A(a, b, v)]


def _refined_young(bk, P):
    g = bk.G(P.a, P.b, P.v)
    f = _young_factor(bk, P, bk.log_ratio(P.a, P.b), "mu")
    return [g, f * g, bk.A(P.a, P.b, P.v)]


def _refined_young_reverse(bk, P):
    g = bk.G(P.a, P.b, P.v)
    f = _young_factor(bk, P, bk.log_ratio(P.a, P.b), "lam")
    return [bk.A(P.a, P.b, P.v), f * g]


def _r_young(bk, P):
    g = bk.G(P.a, P.b, P.v)
    f = _young_factor(bk, P, bk.rlog(P.a / P.b, P.r), "mu")
    return [g, f * g, bk.A(P.a, P.b, P.v)]


def _heinz_chain(bk, P):
    A, G, _, _ = _means(bk, P)
    return [G, bk.Hz(P.a, P.b, P.v), A]


def _heinz_refined(bk, P):
    A, G, _, _ = _means(bk, P)
    hz = bk.Hz(P.a, P.b, P.v)
    f = _young_factor(bk, P, bk.log_ratio(P.a, P.b), "mu")
    return [G, hz, f * hz, A]


def _half_mix_unweighted_L(bk, P):
    return [bk.L(P.a, P.b), (bk.A(P.a, P.b, P.v) + bk.G(P.a, P.b, P.v)) / 2]


def _thm_heinz_v(bk, P):
    return [bk.L(P.a, P.b), (bk.A(P.a, P.b, P.v) + bk.G(P.a, P.b, P.w)) / 2]


def _half_a_heinz(bk, P):
    A, _, _, L = _means(bk, P)
    return [L, (A + bk.Hz(P.a, P.b, P.v)) / 2]


def _exp_ratio_bounds(bk, P):
    return [bk.L(P.a, P.b), bk.I(P.a, P.b), bk.C(P.a, P.b)]


def _nested(outer, inner):
    def terms_of(bk, P, lo, hi):
        h = _half(bk)
        x = _apply(bk, inner, P.a, P.b, P.v)
        y = _apply(bk, inner, P.a, P.b, P.w)
        return [lo, _apply(bk, outer, x, y, None if outer == "L" else h), hi]
    return terms_of


def _apply(bk, tag, x, y, v):
    if tag == "A":
        return bk.A(x, y, v)
    if tag == "G":
        return bk.G(x, y, v)
    if tag == "H":
        return bk.H(x, y, v)
    if tag == "L":
        return bk.L(x, y) if v is None else bk.Lv(x, y, v)
    raise UnsupportedKindError(tag)


def _nested_case(outer, inner, lo_tag, hi_tag):
    build = _nested(outer, inner)

    def terms(bk, P):
        A, G, H, L = _means(bk, P)
        unweighted = {"A": A, "G": G, "H": H, "L": L}
        return build(bk, P, unweighted[lo_tag], unweighted[hi_tag])
    return terms


def _lv_product(bk, P):
    L = bk.L(P.a, P.b)
    return [bk.Lv(P.a, P.b, P.v) * bk.Lv(P.a, P.b, P.w), L * L]


def _optimal_p_mix(bk, P):
    return [bk.Lv(P.a, P.b, P.v), (1 - P.p) * bk.A(P.a, P.b, P.v) + P.p * bk.G(P.a, P.b, P.v)]


def _conjecture_nested_L(bk, P):
    return [bk.L(P.a, P.b), bk.L(bk.Lv(P.a, P.b, P.v), bk.Lv(P.a, P.b, P.w))]


def _r_young_domain(P):
    return ((P.r > 0) & (P.a <= P.b)) | ((P.r < 0) & (P.a >= P.b))


def _conditional_mix_domain(P):
    return ((P.v <= 0.5) & (P.a >= P.b)) | ((P.v >= 0.5) & (P.a <= P.b))


AB = ("a", "b")
ABV = ("a", "b", "v")

_CASES = (
    InequalityCase(
        "polya", "L <= (2/3)G + (1/3)A", AB, _polya, HOLDS_EVERYWHERE,
        "Polya inequality L <= (2G + A)/3", ("L <= 2G/3+A/3",)),
    InequalityCase(
        "lin_chain", "G <= L <= ((a^(1/3)+b^(1/3))/2)^3", AB, _lin_chain, HOLDS_EVERYWHERE,
        "Lin chain G <= L <= cube-root power mean", ("G <= L", "L <= P3")),
    InequalityCase(
        "refined_polya", "L <= P3 <= (2/3)G + (1/3)A", AB, _refined_polya, HOLDS_EVERYWHERE,
        "refinement of Polya through the cube-root power mean", ("L <= P3", "P3 <= 2G/3+A/3")),
    InequalityCase(
        "wlog_half_mix", "L_v <= (1/2)G_v + (1/2)A_v", ABV, _wlog_half_mix, HOLDS_EVERYWHERE,
        "weighted L_v below the even mix of A_v and G_v", ("L_v <= G_v/2+A_v/2",)),
    InequalityCase(
        "wlog_two_thirds", "L_v <= (2/3)G_v + (1/3)A_v", ABV, _wlog_two_thirds, FAILS_SOMEWHERE,
        "two-thirds mix for L_v, does not hold in general", ("L_v <= 2G_v/3+A_v/3",),
        witnesses=({"a": "10", "b": "1", "v": "0.1"}, {"a": "0.5", "b": "1", "v": "0.9"})),
    InequalityCase(
        "four_means_order", "H_v <= G_v <= L_v <= A_v", ABV, _four_means, HOLDS_EVERYWHERE,
        "weighted order H_v <= G_v <= L_v <= A_v", ("H_v <= G_v", "G_v <= L_v", "L_v <= A_v")),
    InequalityCase(
        "refined_young", "G_v <= (1 + mu^2/2 (ln a - ln b)^2) G_v <= A_v", ABV, _refined_young,
        HOLDS_EVERYWHERE, "refined Young inequality, factor 1 + mu^2/2 log^2(a/b)", ("G_v <= F G_v", "F G_v <= A_v")),
    InequalityCase(
        "refined_young_reverse", "A_v <= (1 + lambda^2/2 (ln a - ln b)^2) G_v", ABV,
        _refined_young_reverse, FAILS_SOMEWHERE, "reverse refined Young with lambda, does not hold in general",
        ("A_v <= F_lambda G_v",), witnesses=({"a": "8", "b": "1", "v": "0.5"},)),
    InequalityCase(
        "r_young", "G_v <= (1 + mu^2/2 ln_r(a/b)^2) G_v <= A_v", ("a", "b", "v", "r"), _r_young,
        CONDITIONAL, "refined Young with the r-logarithm", ("G_v <= F_r G_v", "F_r G_v <= A_v"),
        domain=_r_young_domain, domain_text="(r > 0 and a <= b) or (r < 0 and a >= b)"),
    InequalityCase(
        "heinz_chain", "G <= Hz_v <= A", ABV, _heinz_chain, HOLDS_EVERYWHERE,
        "Heinz mean between G and A", ("G <= Hz_v", "Hz_v <= A")),
    InequalityCase(
        "heinz_refined", "G <= Hz_v <= (1 + mu^2/2 (ln a - ln b)^2) Hz_v <= A", ABV, _heinz_refined,
        HOLDS_EVERYWHERE, "refined Heinz chain", ("G <= Hz_v", "Hz_v <= F Hz_v", "F Hz_v <= A")),
    InequalityCase(
        "half_mix_unweighted_L", "L <= (1/2)A_v + (1/2)G_v", ABV, _half_mix_unweighted_L,
        FAILS_SOMEWHERE, "unweighted L against the even mix of A_v and G_v, printed counter-examples", ("L <= A_v/2+G_v/2",),
        witnesses=({"a": "0.5", "b": "1", "v": "0.25"}, {"a": "2", "b": "1", "v": "0.75"}),
        annotations={
            "printed_values": [
                {"point": {"a": "0.5", "b": "1", "v": "0.25"}, "printed_gap": -0.223091},
                {"point": {"a": "2", "b": "1", "v": "0.75"}, "printed_gap": -0.446183},
            ],
            "note": "printed values are twice the evaluated gaps (-0.111546, -0.223091); sign agrees",
        }),
    InequalityCase(
        "thm_heinz_v", "L <= (1/2)A_v + (1/2)G_{1-v}", ABV, _thm_heinz_v, HOLDS_EVERYWHERE,
        "L below A_v/2 + G_{1-v}/2", ("L <= A_v/2+G_{1-v}/2",)),
    InequalityCase(
        "half_a_heinz", "L <= (1/2)A + (1/2)Hz_v", ABV, _half_a_heinz, HOLDS_EVERYWHERE,
        "L below A/2 + Hz_v/2", ("L <= A/2+Hz_v/2",)),
    InequalityCase(
        "exp_ratio_bounds", "(t-1)/ln t <= t^(t/(t-1))/e <= (t^2+1)/(t+1), t = a/b", AB,
        _exp_ratio_bounds, HOLDS_EVERYWHERE, "two-sided bounds of t^(t/(t-1))/e",
        ("(t-1)/ln t <= t^(t/(t-1))/e", "t^(t/(t-1))/e <= (t^2+1)/(t+1)")),
    InequalityCase(
        "nested_ag_1", "G <= G(A_v, A_{1-v}) <= A", ABV, _nested_case("G", "A", "G", "A"),
        HOLDS_EVERYWHERE, "nested arithmetic-geometric, G of A_v", ("G <= G(A_v,A_1-v)", "G(A_v,A_1-v) <= A")),
    InequalityCase(
        "nested_ag_2", "G <= A(G_v, G_{1-v}) <= A", ABV, _nested_case("A", "G", "G", "A"),
        HOLDS_EVERYWHERE, "nested arithmetic-geometric, A of G_v", ("G <= A(G_v,G_1-v)", "A(G_v,G_1-v) <= A")),
    InequalityCase(
        "nested_hg_1", "H <= G(H_v, H_{1-v}) <= G", ABV, _nested_case("G", "H", "H", "G"),
        HOLDS_EVERYWHERE, "nested harmonic-geometric, G of H_v", ("H <= G(H_v,H_1-v)", "G(H_v,H_1-v) <= G")),
    InequalityCase(
        "nested_hg_2", "H <= H(G_v, G_{1-v}) <= G", ABV, _nested_case("H", "G", "H", "G"),
        HOLDS_EVERYWHERE, "nested harmonic-geometric, H of G_v", ("H <= H(G_v,G_1-v)", "H(G_v,G_1-v) <= G")),
    InequalityCase(
        "nested_al_1", "L <= A(L_v, L_{1-v}) <= A", ABV, _nested_case("A", "L", "L", "A"),
        HOLDS_EVERYWHERE, "nested arithmetic-logarithmic, A of L_v", ("L <= A(L_v,L_1-v)", "A(L_v,L_1-v) <= A")),
    InequalityCase(
        "nested_al_2", "L <= L(A_v, A_{1-v}) <= A", ABV, _nested_case("L", "A", "L", "A"),
        HOLDS_EVERYWHERE, "nested arithmetic-logarithmic, L of A_v", ("L <= L(A_v,A_1-v)", "L(A_v,A_1-v) <= A")),
    InequalityCase(
        "nested_gl_1", "G <= L(G_v, G_{1-v}) <= L", ABV, _nested_case("L", "G", "G", "L"),
        HOLDS_EVERYWHERE, "nested geometric-logarithmic, L of G_v", ("G <= L(G_v,G_1-v)", "L(G_v,G_1-v) <= L")),
    InequalityCase(
        "nested_gl_2", "G <= G(L_v, L_{1-v}) <= L", ABV, _nested_case("G", "L", "G", "L"),
        HOLDS_EVERYWHERE, "nested geometric-logarithmic, G of L_v", ("G <= G(L_v,L_1-v)", "G(L_v,L_1-v) <= L")),
    InequalityCase(
        "lv_product", "L_v L_{1-v} <= L^2", ABV, _lv_product, HOLDS_EVERYWHERE,
        "product bound L_v(t) L_{1-v}(t) <= L(t)^2", ("L_v L_1-v <= L^2",), degree=2),
    InequalityCase(
        "conditional_mix", "L <= (1/2)A_v + (1/2)G_v on the restricted domain", ABV,
        _half_mix_unweighted_L, CONDITIONAL, "even mix of A_v and G_v on the restricted domain", ("L <= A_v/2+G_v/2",),
        domain=_conditional_mix_domain, domain_text="(v <= 1/2 and a >= b) or (v >= 1/2 and a <= b)"),
    InequalityCase(
        "optimal_p_mix", "L_v <= (1-p)A_v + p G_v", ("a", "b", "v", "p"), _optimal_p_mix,
        FAILS_SOMEWHERE, "optimal p in L_v <= (1-p)A_v + pG_v", ("L_v <= (1-p)A_v+pG_v",),
        witnesses=({"a": "10", "b": "1", "v": "0.1", "p": "2/3"},),
        annotations={
            "printed_values": [
                {"point": {"a": "1e-10", "b": "1", "v": "0.9999999999", "p": "13/25"},
                 "printed_gap": -1.39948e-8},
            ],
            "note": "holds for p <= 1/2; fails for every p > 1/2 on a large enough domain",
        }),
    InequalityCase(
        "conjecture_nested_L", "L <= L(L_v, L_{1-v})", ABV, _conjecture_nested_L, CONJECTURE,
        "conjectured L <= L(L_v, L_{1-v})", ("L <= L(L_v,L_1-v)",),
        annotations={"printed_values": [
            {"point": {"a": "10", "b": "1", "v": "0.25"}, "printed_gap": 0.0173327}]}),
)

_REGISTRY = {case.id: case for case in _CASES}
assert len(_REGISTRY) == len(_CASES)


def list_cases() -> tuple:
    """All registered cases in their stable registry order."""
    return _CASES


def get_case(case_id: str) -> InequalityCase:
    try:
        return _REGISTRY[case_id]
    except KeyError:
        raise UnknownCaseError(f"unknown inequality case {case_id!r}") from None


# -- evaluation ----------------------------------------------------------------------

def _parse_scalar(value):
    if isinstance(value, str):
        return float(Fraction(value)) if "/" in value else float(value)
    return float(value)


def _check_ranges(case, P):
    ok = (P.a > 0) & (P.b > 0)
    if "v" in case.params:
        ok = ok & (P.v >= 0) & (P.v <= 1)
    if "p" in case.params:
        ok = ok & (P.p >= 0) & (P.p <= 1)
    return ok & case.in_domain(P)


def _namespace(case, point, bk):
    missing = [k for k in case.params if k not in point]
    if missing:
        raise DomainError(f"case {case.id!r} needs parameters {missing}")
    vals = {}
    for k in case.params:
        raw = point[k]
        if isinstance(bk, BigFloatBackend):
            vals[k] = bk.num(raw)
        elif bk.is_array:
            vals[k] = np.asarray(raw, dtype=np.float64)
        else:
            vals[k] = _parse_scalar(raw)
    P = SimpleNamespace(**vals)
    if "v" in vals:
        P.w = 1 - P.v
    return P


def _weight_amplification(case, P):
    if not case.uses_weight:
        return 1.0
    v = np.asarray(P.v, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.maximum(np.maximum(v / (1.0 - v), (1.0 - v) / v), 1.0)
    return np.where((v <= ENDPOINT) | (v >= 1.0 - ENDPOINT), 1.0, k)


def conditioning_bound(case: InequalityCase, point: Mapping) -> object:
    """Absolute size below which a double-precision gap sign is not trusted.

    ``COND_SAFETY * u * kappa * scale`` with ``kappa`` the weight amplification
    ``max(v/(1-v), (1-v)/v, 1)`` times ``max(|ln(a/b)|, 1)``.
    """
    a = np.asarray(_as_float(point["a"]), dtype=np.float64)
    b = np.asarray(_as_float(point["b"]), dtype=np.float64)
    P = SimpleNamespace(a=a, b=b, v=np.asarray(_as_float(point.get("v", 0.5))))
    lr = np.abs(np.log(a) - np.log(b))
    kappa = _weight_amplification(case, P) * np.maximum(lr, 1.0)
    out = COND_SAFETY * UNIT_ROUNDOFF * kappa * np.maximum(a, b) ** case.degree
    return float(out) if out.ndim == 0 else out


def _as_float(x):
    if isinstance(x, str):
        return _parse_scalar(x)
    return x


def _classify_double(gap, rel, bound, tol):
    if abs(gap) < bound:
        return INDETERMINATE
    if rel >= -tol:
        return HOLDS
    return VIOLATED


def _backend_for(precision):
    if precision in (None, "double"):
        return DoubleBackend(), None
    if isinstance(precision, str) and precision.startswith("bigfloat("):
        precision = int(precision[len("bigfloat("):-1])
    digits = int(precision)
    return BigFloatBackend(digits), digits


def evaluate_terms(case_id: str, point: Mapping, backend=None) -> list:
    """Chain terms of a case at one point (no domain checks)."""
    case = get_case(case_id)
    bk = backend or DoubleBackend()
    return case.terms(bk, _namespace(case, point, bk))


def evaluate_gap(case_id: str, point: Mapping, precision="double", tol: float = DEFAULT_TOL) -> GapReport:
    """Evaluate the gap (RHS - LHS) of a case at one point.

    ``precision`` is ``"double"`` or a digit count (int, or ``"bigfloat(N)"``).
    Point values may be floats or exact decimal / fraction strings.
    """
    case = get_case(case_id)
    bk, digits = _backend_for(precision)
    P = _namespace(case, point, bk)
    if not _check_ranges(case, P):
        raise DomainError(f"point {dict(point)} outside the domain of {case_id!r}: {case.domain_text}")
    terms = case.terms(bk, P)
    links = tuple(terms[i + 1] - terms[i] for i in range(len(terms) - 1))
    gap = min(links)
    top = P.a if P.a > P.b else P.b
    scale = top ** case.degree
    rel = gap / scale
    pt = {k: point[k] for k in case.params}
    if digits is None:
        verdict = _classify_double(gap, rel, conditioning_bound(case, point), tol)
        gap, rel = float(gap), float(rel)
        links = tuple(float(x) for x in links)
    else:
        bound = bk.ctx.mpf(10) ** (-(digits - 10)) * scale
        if abs(gap) < bound:
            verdict = INDETERMINATE
        else:
            verdict = HOLDS if gap > 0 else VIOLATED
    return GapReport(case_id, pt, gap, rel, bk.name, verdict, links, case.paper_anchor)


def end_to_end_gap(report: GapReport):
    """Sum of the link gaps, i.e. last term minus first term of the chain."""
    return sum(report.links)


def evaluate_batch(case_id: str, points: Mapping, tol: float = DEFAULT_TOL, impl=None,
                   check_domain: bool = True) -> BatchResult:
    """Vectorised double-precision evaluation over arrays of parameters."""
    case = get_case(case_id)
    bk = ArrayBackend(impl)
    arrays = {k: np.asarray(points[k], dtype=np.float64) for k in case.params}
    arrays = dict(zip(arrays, np.broadcast_arrays(*arrays.values())))
    P = _namespace(case, arrays, bk)
    if check_domain and not np.all(_check_ranges(case, P)):
        raise DomainError(f"some points lie outside the domain of {case_id!r}: {case.domain_text}")
    terms = case.terms(bk, P)
    links = [np.asarray(terms[i + 1] - terms[i]) for i in range(len(terms) - 1)]
    gap = np.minimum.reduce(links)
    scale = np.maximum(P.a, P.b) ** case.degree
    rel = gap / scale
    bound = np.broadcast_to(conditioning_bound(case, arrays), gap.shape)
    verdict = np.where(np.abs(gap) < bound, INDETERMINATE,
                       np.where(rel >= -tol, HOLDS, VIOLATED))
    return BatchResult(case_id, arrays, gap, rel, bound, links, verdict)


def _grid_points(case, grid):
    axes = []
    for k in case.params:
        if k not in grid:
            raise DomainError(f"grid for {case.id!r} lacks axis {k!r}")
        axes.append(list(grid[k]))
    if any(len(ax) == 0 for ax in axes):
        raise DomainError("grid is empty")
    return [dict(zip(case.params, combo)) for combo in itertools.product(*axes)]


def sweep(case_id: str, grid: Mapping, precision="double", tol: float = DEFAULT_TOL) -> Sweep:
    """Evaluate a case on the Cartesian grid of ``grid`` (axis name -> values).

    Points are visited in ``itertools.product`` order over the case's
    parameters; every point must lie in the case's domain.
    """
    case = get_case(case_id)
    pts = _grid_points(case, grid)
    if precision in (None, "double"):
        cols = {k: np.array([_as_float(p[k]) for p in pts]) for k in case.params}
        batch = evaluate_batch(case_id, cols, tol)
        reports = [
            GapReport(case_id, pts[i], float(batch.gap[i]), float(batch.relative_gap[i]), "double",
                      str(batch.verdict[i]), tuple(float(lk[i]) for lk in batch.links), case.paper_anchor)
            for i in range(len(pts))
        ]
        idx = int(np.argmin(batch.relative_gap))
    else:
        reports = [evaluate_gap(case_id, p, precision, tol) for p in pts]
        idx = min(range(len(reports)), key=lambda i: reports[i].relative_gap)
    return Sweep(reports, idx)


def sample_domain(case_id: str, n: int, rng: np.random.Generator,
                  log_range: float = math.log(1e6), r_range=(1e-3, 2.0)) -> dict:
    """Draw ``n`` in-domain points.

    a, b are log-uniform on ``[e^-log_range, e^log_range]``, v and p uniform on
    [0, 1], r uniform on ``[-2, -1e-3] U [1e-3, 2]``. Conditional cases are
    mapped into their domain by swapping a and b where needed.
    """
    case = get_case(case_id)
    a = np.exp(rng.uniform(-log_range, log_range, n))
    b = np.exp(rng.uniform(-log_range, log_range, n))
    out = {"a": a, "b": b}
    if "v" in case.params:
        out["v"] = rng.uniform(0.0, 1.0, n)
    if "r" in case.params:
        mag = rng.uniform(r_range[0], r_range[1], n)
        out["r"] = np.where(rng.uniform(size=n) < 0.5, -mag, mag)
    if "p" in case.params:
        out["p"] = rng.uniform(0.0, 1.0, n)
    if case.id == "r_young":
        swap = ((out["r"] > 0) & (a > b)) | ((out["r"] < 0) & (a < b))
    elif case.id == "conditional_mix":
        swap = ((out["v"] < 0.5) & (a < b)) | ((out["v"] > 0.5) & (a > b))
    else:
        swap = np.zeros(n, dtype=bool)
    out["a"], out["b"] = np.where(swap, b, a), np.where(swap, a, b)
    return out


# -- nested means ---------------------------------------------------------------------------

_NESTABLE = {
    MeanKind.ARITHMETIC: "A",
    MeanKind.GEOMETRIC: "G",
    MeanKind.HARMONIC: "H",
    MeanKind.LOGARITHMIC: "L",
}


def nested_mean(outer: MeanKind, inner: MeanKind, pair: ScalarPair, w: WeightSplit) -> float:
    """``M_outer(N_v(a,b), N_{1-v}(a,b))`` with the outer mean unweighted."""
    for kind in (outer, inner):
        if kind not in _NESTABLE:
            raise UnsupportedKindError(f"{kind.name} cannot be nested")
    bk = DoubleBackend()
    x = _apply(bk, _NESTABLE[inner], pair.a, pair.b, w.v)
    y = _apply(bk, _NESTABLE[inner], pair.a, pair.b, 1.0 - w.v)
    return _apply(bk, _NESTABLE[outer], x, y, None if outer is MeanKind.LOGARITHMIC else 0.5)
