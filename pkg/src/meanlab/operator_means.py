"""Operator means and relative entropies of symmetric positive-definite matrices.

Everything is computed through the congruence kernel ``C = A^{-1/2} B A^{-1/2}``:
with ``C = U diag(lam) U^T`` and ``W = A^{1/2} U``, any operator function of
the form ``A^{1/2} f(C) A^{1/2}`` equals ``W diag(f(lam)) W^T``. Integrals over
the weighted geometric mean therefore reduce to Gauss-Legendre sums of
``lam**x`` per eigenvalue.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, DomainError, PreconditionError, UnknownCaseError
from .quadrature import QuadratureRule
from .scalar_means import DEFORMATION_SWITCH, Deformation, WeightSplit

DEFAULT_TOL = 1e-8
SANDWICH_LIMIT = 1e-6


def _sym(X):
    return 0.5 * (X + X.T)


class SpdMatrix:
    """Dense symmetric positive-definite matrix with its spectrum cached.

    Construction symmetrises the input after checking it is symmetric to
    ``1e-12 * (1 + max|X|)``, then rejects a nonpositive smallest eigenvalue
    or a spectral reconstruction off by more than ``1e-11 ||X||_F``.
    Eigenvalues are stored in descending order.
    """

    __slots__ = ("entries", "eigvals", "eigvecs")

    def __init__(self, entries, *, sym_tol: float = 1e-12):
        X = np.array(entries, dtype=np.float64)
        if X.ndim == 0:
            X = X.reshape(1, 1)
        if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] == 0:
            raise DimensionMismatchError(f"expected a nonempty square matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DomainError("matrix has non-finite entries")
        asym = np.max(np.abs(X - X.T))
        if asym > sym_tol * (1.0 + np.max(np.abs(X))):
            raise DomainError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        X = _sym(X)
        lam, U = np.linalg.eigh(X)
        lam, U = lam[::-1].copy(), U[:, ::-1].copy()
        if lam[-1] <= 0.0:
            raise DomainError(f"matrix is not positive definite (smallest eigenvalue {lam[-1]:.3e})")
        err = np.linalg.norm((U * lam) @ U.T - X)
        if err > 1e-11 * np.linalg.norm(X):
            raise DomainError(f"spectral reconstruction error {err:.3e} too large")
        for arr in (X, lam, U):
            arr.setflags(write=False)
        self.entries = X
        self.eigvals = lam
        self.eigvecs = U

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim}, cond={self.condition:.3g})"

    @property
    def condition(self) -> float:
        return float(self.eigvals[0] / self.eigvals[-1])

    def apply(self, f) -> np.ndarray:
        """``U diag(f(lam)) U^T`` as a plain symmetric array."""
        U = self.eigvecs
        return _sym((U * f(self.eigvals)) @ U.T)

    def sqrt(self) -> np.ndarray:
        return self.apply(np.sqrt)

    def inv_sqrt(self) -> np.ndarray:
        return self.apply(lambda x: 1.0 / np.sqrt(x))

    def inverse(self) -> np.ndarray:
        return self.apply(np.reciprocal)

    def to_json(self) -> dict:
        return {"dim": self.dim, "entries": [float(x) for x in self.entries.reshape(-1)]}

    @classmethod
    def from_json(cls, obj) -> "SpdMatrix":
        try:
            n = int(obj["dim"])
            flat = np.asarray(obj["entries"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed matrix record: {exc}") from None
        if flat.size != n * n:
            raise DimensionMismatchError(f"expected {n * n} entries for dim {n}, got {flat.size}")
        return cls(flat.reshape(n, n))


def _as_array(X) -> np.ndarray:
    return X.entries if isinstance(X, SpdMatrix) else np.asarray(X, dtype=np.float64)


def _weight(w) -> float:
    v = w.v if isinstance(w, WeightSplit) else float(w)
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"weight must lie in [0, 1], got {v!r}")
    return v


def _check_dims(A, B):
    if A.dim != B.dim:
        raise DimensionMismatchError(f"dimension mismatch: {A.dim} vs {B.dim}")


class Congruence:
    """Spectral data of ``A^{-1/2} B A^{-1/2}`` shared by all operator functions of a pair."""

    def __init__(self, A: SpdMatrix, B: SpdMatrix):
        _check_dims(A, B)
        self.A, self.B = A, B
        Aih = A.inv_sqrt()
        C = _sym(Aih @ B.entries @ Aih)
        lam, U = np.linalg.eigh(C)
        if lam[0] <= 0.0:
            raise DomainError("congruence kernel lost positive definiteness")
        self.lam = lam
        self.W = A.sqrt() @ U

    def lift(self, d) -> np.ndarray:
        return _sym((self.W * d) @ self.W.T)

    def power(self, x: float) -> np.ndarray:
        return self.lift(self.lam ** x)

    def integral(self, lo: float, hi: float, rule: QuadratureRule) -> np.ndarray:
        """Eigenwise Gauss-Legendre values of the integral of lam**x over [lo, hi]."""
        x, w = rule.panel(lo, hi)
        return np.exp(np.outer(np.log(self.lam), x)) @ w

    def log_mean_diag(self, v: float, rule: QuadratureRule) -> np.ndarray:
        if v == 0.5:
            return self.integral(0.0, 1.0, rule)
        u = 1.0 - v
        return (v / u) * self.integral(0.0, u, rule) + (u / v) * self.integral(u, 1.0, rule)


# -- means and entropies ----------------------------------------------------------------------

def op_weighted_arithmetic(A: SpdMatrix, B: SpdMatrix, w) -> SpdMatrix:
    _check_dims(A, B)
    v = _weight(w)
    if v == 0.0:
        return A
    if v == 1.0:
        return B
    return SpdMatrix((1.0 - v) * A.entries + v * B.entries)


def op_weighted_geometric(A: SpdMatrix, B: SpdMatrix, w, *, cong: Congruence | None = None) -> SpdMatrix:
    """Weighted geometric mean ``A^{1/2} (A^{-1/2} B A^{-1/2})^x A^{1/2}``."""
    _check_dims(A, B)
    x = _weight(w)
    if x == 0.0:
        return A
    if x == 1.0:
        return B
    return SpdMatrix((cong or Congruence(A, B)).power(x))


def op_log_mean_w(A: SpdMatrix, B: SpdMatrix, w, rule: QuadratureRule | None = None,
                  *, cong: Congruence | None = None) -> SpdMatrix:
    """Weighted operator logarithmic mean by split-panel quadrature of A #_x B.

    This is ``A^{1/2} L_v(C) A^{1/2}`` with ``L_v(t) = L_v(t, 1)``, so for
    commuting arguments it reduces eigenwise to the scalar ``L_v(b, a)``.
    The endpoints are the limits of the integral form: B at v = 0 and A at
    v = 1.
    """
    _check_dims(A, B)
    v = _weight(w)
    if v == 0.0:
        return B
    if v == 1.0:
        return A
    cong = cong or Congruence(A, B)
    return SpdMatrix(cong.lift(cong.log_mean_diag(v, rule or QuadratureRule())))


def op_log_mean(A: SpdMatrix, B: SpdMatrix, rule: QuadratureRule | None = None) -> SpdMatrix:
    return op_log_mean_w(A, B, 0.5, rule)


def relative_entropy(A: SpdMatrix, B: SpdMatrix, *, cong: Congruence | None = None) -> np.ndarray:
    """Operator relative entropy ``A^{1/2} log(A^{-1/2} B A^{-1/2}) A^{1/2}``."""
    cong = cong or Congruence(A, B)
    return cong.lift(np.log(cong.lam))


def tsallis_relative_entropy(A: SpdMatrix, B: SpdMatrix, d: Deformation,
                             *, cong: Congruence | None = None) -> np.ndarray:
    """Tsallis relative entropy: the congruence form with ln_r in place of log."""
    cong = cong or Congruence(A, B)
    if abs(d.r) < DEFORMATION_SWITCH:
        return relative_entropy(A, B, cong=cong)
    return cong.lift(np.expm1(d.r * np.log(cong.lam)) / d.r)


# -- Loewner order --------------------------------------------------------------------------------

@dataclass(frozen=True)
class LoewnerVerdict:
    min_eig: float
    scale: float
    tol: float
    holds: bool

    @property
    def relative(self) -> float:
        return self.min_eig / self.scale


def loewner_leq(X, Y, tol: float = DEFAULT_TOL) -> LoewnerVerdict:
    """Decide ``X <= Y`` from the smallest eigenvalue of ``sym(Y - X)``."""
    X, Y = _as_array(X), _as_array(Y)
    if X.shape != Y.shape:
        raise DimensionMismatchError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    D = _sym(Y - X)
    min_eig = float(np.linalg.eigvalsh(D)[0])
    scale = 1.0 + float(np.linalg.norm(D))
    return LoewnerVerdict(min_eig, scale, tol, min_eig >= -tol * scale)


# -- the operator inequalities --------------------------------------------------------------------

OPERATOR_CASES = {
    "op_sandwich": "(1/(1-2v)) int_v^{1-v} A#_xB dx <= int_0^1 A#_xB dx",
    "op_product": "(A l_v B) A^-1 (A l_{1-v} B) <= (A l B) A^-1 (A l B)",
    "op_avg": "A l B <= (1/2) A l_v B + (1/2) A l_{1-v} B",
    "op_mix": "A l B <= (1/2) A nabla_v B + (1/2) A #_{1-v} B",
    "op_zj": "0 <= K*(A #_v B)K <= A nabla_v B - A #_v B, K = (mu/sqrt2) A^-1 S(A|B)",
    "op_zj_tsallis": "0 <= K_r*(A #_v B)K_r <= A nabla_v B - A #_v B under the order precondition",
}


@dataclass(frozen=True)
class OperatorReport:
    case_id: str
    dim: int
    v: float
    r: float | None
    checks: tuple
    paper_anchor: str = ""
    pair: int | None = None

    @property
    def holds(self) -> bool:
        return all(chk.holds for _, chk in self.checks)

    @property
    def min_eig(self) -> float:
        return min(chk.min_eig for _, chk in self.checks)

    @property
    def relative_gap(self) -> float:
        return min(chk.relative for _, chk in self.checks)

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "violated"

    def to_record(self) -> dict:
        point = {"dim": self.dim, "v": self.v}
        if self.pair is not None:
            point["pair"] = self.pair
        if self.r is not None:
            point["r"] = self.r
        return {
            "id": self.case_id,
            "point": point,
            "gap": self.min_eig,
            "relative_gap": self.relative_gap,
            "precision": "double",
            "verdict": self.verdict,
            "paper_anchor": self.paper_anchor,
        }


def tsallis_precondition(A: SpdMatrix, B: SpdMatrix, r: float, tol: float = DEFAULT_TOL) -> str | None:
    """Name of the failed order condition, or None when it is met."""
    if r > 0:
        return None if loewner_leq(B, A, tol).holds else "r > 0 requires 0 < B <= A"
    if r < 0:
        return None if loewner_leq(A, B, tol).holds else "r < 0 requires 0 < A <= B"
    return "r must be nonzero"


def check_operator_case(case_id: str, A: SpdMatrix, B: SpdMatrix, w, d: Deformation | None = None,
                        rule: QuadratureRule | None = None, tol: float = DEFAULT_TOL) -> OperatorReport:
    """Assemble both sides of an operator inequality and decide each claimed order."""
    if case_id not in OPERATOR_CASES:
        raise UnknownCaseError(f"unknown operator case {case_id!r}")
    _check_dims(A, B)
    v = _weight(w)
    rule = rule or QuadratureRule()
    r = None if d is None else d.r
    if case_id == "op_zj_tsallis":
        if d is None:
            raise PreconditionError("op_zj_tsallis needs a deformation r")
        failed = tsallis_precondition(A, B, d.r, tol)
        if failed:
            raise PreconditionError(failed)
    cong = Congruence(A, B)

    if case_id == "op_sandwich":
        u = min(v, 1.0 - v)
        if abs(1.0 - 2.0 * u) < SANDWICH_LIMIT:
            lhs = cong.power(0.5)
        else:
            lhs = cong.lift(cong.integral(u, 1.0 - u, rule)) / (1.0 - 2.0 * u)
        checks = (("sandwich", loewner_leq(lhs, cong.lift(cong.integral(0.0, 1.0, rule)), tol)),)
    elif case_id in ("op_product", "op_avg"):
        lv = op_log_mean_w(A, B, v, rule, cong=cong).entries
        lw = op_log_mean_w(A, B, 1.0 - v, rule, cong=cong).entries
        lm = cong.lift(cong.log_mean_diag(0.5, rule))
        if case_id == "op_product":
            Ainv = A.inverse()
            checks = (("product", loewner_leq(lv @ Ainv @ lw, lm @ Ainv @ lm, tol)),)
        else:
            checks = (("average", loewner_leq(lm, 0.5 * (lv + lw), tol)),)
    elif case_id == "op_mix":
        lm = cong.lift(cong.log_mean_diag(0.5, rule))
        rhs = 0.5 * op_weighted_arithmetic(A, B, v).entries + 0.5 * op_weighted_geometric(A, B, 1.0 - v, cong=cong).entries
        checks = (("mix", loewner_leq(lm, rhs, tol)),)
    else:
        mu = min(v, 1.0 - v)
        if case_id == "op_zj":
            S = relative_entropy(A, B, cong=cong)
        else:
            S = tsallis_relative_entropy(A, B, d, cong=cong)
        K = (mu / math.sqrt(2.0)) * (A.inverse() @ S)
        G = op_weighted_geometric(A, B, v, cong=cong).entries
        middle = K.T @ G @ K
        rhs = op_weighted_arithmetic(A, B, v).entries - G
        checks = (
            ("0 <= K*(A#B)K", loewner_leq(np.zeros_like(middle), middle, tol)),
            ("K*(A#B)K <= A nabla B - A#B", loewner_leq(middle, rhs, tol)),
        )
    return OperatorReport(case_id, A.dim, v, r, checks, OPERATOR_CASES[case_id])


# -- random ensembles -----------------------------------------------------------------------------

def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _haar(n, rng):
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def _log_uniform_spectrum(dim, rng, condition):
    top = math.log(condition)
    lam = np.exp(rng.uniform(0.0, top, dim))
    if dim >= 2:
        lam[0], lam[1] = 1.0, condition
    return lam


def random_spd(dim: int, seed=None, condition: float = 1e2) -> SpdMatrix:
    """Seeded SPD matrix with log-uniform spectrum of the given condition number.

    For ``dim >= 2`` the extreme eigenvalues are pinned to 1 and ``condition``.
    """
    if dim < 1:
        raise DomainError("dim must be at least 1")
    if condition < 1.0:
        raise DomainError("condition number must be >= 1")
    rng = _rng(seed)
    lam = _log_uniform_spectrum(dim, rng, condition)
    Q = _haar(dim, rng)
    return SpdMatrix(_sym((Q * lam) @ Q.T))


def random_pair(dim: int, seed=None, condition: float = 1e2):
    rng = _rng(seed)
    return random_spd(dim, rng, condition), random_spd(dim, rng, condition)


def random_ordered_pair(dim: int, seed=None, condition: float = 1e2):
    """``(lo, hi)`` with ``lo <= hi``: hi adds a scaled random SPD term to lo."""
    rng = _rng(seed)
    lo = random_spd(dim, rng, condition)
    bump = random_spd(dim, rng, condition).entries * rng.uniform(0.01, 1.0)
    return lo, SpdMatrix(lo.entries + bump)


def random_commuting_pair(dim: int, seed=None, condition: float = 1e2):
    """Simultaneously diagonalisable pair ``(A, B, alpha, beta, Q)``."""
    rng = _rng(seed)
    Q = _haar(dim, rng)
    alpha = _log_uniform_spectrum(dim, rng, condition)
    beta = _log_uniform_spectrum(dim, rng, condition)[rng.permutation(dim)]
    A = SpdMatrix(_sym((Q * alpha) @ Q.T))
    B = SpdMatrix(_sym((Q * beta) @ Q.T))
    return A, B, alpha, beta, Q


@dataclass
class EnsembleResult:
    reports: list
    skipped: int = 0
    skip_reasons: dict = field(default_factory=dict)

    def summary(self) -> dict:
        held = sum(1 for r in self.reports if r.holds)
        return {"checked": len(self.reports), "held": held, "violated": len(self.reports) - held,
                "indeterminate": 0, "skipped": self.skipped}


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("MEANLAB_THREADS", "1")))
    except ValueError:
        return 1


def verify_ensemble(case_ids, dims, pairs: int, seed: int, *, condition: float = 1e4,
                    r_values=(0.5, -0.5, 1.0, -1.0), v: float | None = None,
                    ordered: bool = False, rule: QuadratureRule | None = None,
                    tol: float = DEFAULT_TOL, threads: int | None = None) -> EnsembleResult:
    """Run operator cases over seeded random SPD pairs.

    Pair ``i`` of dimension ``n`` draws from ``default_rng([seed, n, i])``; the
    weight is uniform on (0, 1) unless ``v`` is fixed. With ``ordered`` the
    Tsallis case receives pairs built to satisfy its order precondition;
    otherwise violating pairs are skipped and counted.
    """
    if pairs < 1:
        raise DomainError("pairs must be positive")
    rule = rule or QuadratureRule()
    ids = list(OPERATOR_CASES) if case_ids in ("all", None) else list(case_ids)
    for cid in ids:
        if cid not in OPERATOR_CASES:
            raise UnknownCaseError(f"unknown operator case {cid!r}")
    tasks = [(n, i) for n in dims for i in range(pairs)]

    def run(task):
        n, i = task
        rng = np.random.default_rng([seed, n, i])
        A, B = random_pair(n, rng, condition)
        vv = float(rng.uniform(0.0, 1.0)) if v is None else float(v)
        out, skipped, reasons = [], 0, []
        for cid in ids:
            if cid != "op_zj_tsallis":
                rep = check_operator_case(cid, A, B, vv, None, rule, tol)
                out.append(_with_pair(rep, i))
                continue
            for r in r_values:
                if ordered:
                    lo, hi = random_ordered_pair(n, np.random.default_rng([seed, n, i, 1]), condition)
                    AA, BB = (hi, lo) if r > 0 else (lo, hi)
                else:
                    AA, BB = A, B
                try:
                    rep = check_operator_case(cid, AA, BB, vv, Deformation(r), rule, tol)
                except PreconditionError as exc:
                    skipped += 1
                    reasons.append(str(exc))
                    continue
                out.append(_with_pair(rep, i))
        return out, skipped, reasons

    workers = threads or default_threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    res = EnsembleResult([])
    for out, skipped, reasons in results:
        res.reports.extend(out)
        res.skipped += skipped
        for msg in reasons:
            res.skip_reasons[msg] = res.skip_reasons.get(msg, 0) + 1
    return res


def _with_pair(rep: OperatorReport, i: int) -> OperatorReport:
    return OperatorReport(rep.case_id, rep.dim, rep.v, rep.r, rep.checks, rep.paper_anchor, i)


# -- JSON forms --------------------------------------------------------------------------------------

def load_manifest(obj) -> list:
    """Parse ``{"pairs": [{"A": {...}, "B": {...}, "v": .., "r": ..}, ...]}``."""
    try:
        entries = obj["pairs"]
    except (KeyError, TypeError):
        raise DomainError("manifest must be an object with a 'pairs' list") from None
    out = []
    for k, e in enumerate(entries):
        try:
            A = SpdMatrix.from_json(e["A"])
            B = SpdMatrix.from_json(e["B"])
            v = float(e.get("v", 0.5))
            r = e.get("r")
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"manifest entry {k}: {exc}") from None
        out.append((A, B, v, None if r is None else float(r)))
    return out
