"""Scalar weighted means and deformed logarithms.

Every mean is evaluated in a cancellation-safe form. The kernels below are
written once against a small numeric namespace (``DOUBLE`` for IEEE doubles,
:func:`bigfloat_ops` for mpmath contexts), so the high-precision oracle uses
exactly the same algebraic form as the double-precision path.

The public functions take validated :class:`ScalarPair`, :class:`WeightSplit`
and :class:`Deformation` values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import SimpleNamespace

from .errors import DomainError

TAYLOR_SWITCH = 1e-6
ENDPOINT = 1e-15
DEFORMATION_SWITCH = 1e-12


def _cbrt(x):
    y = x ** (1.0 / 3.0)
    return y - (y * y * y - x) / (3.0 * y * y)


DOUBLE = SimpleNamespace(
    name="double",
    one=1.0,
    exp=math.exp,
    expm1=math.expm1,
    log=math.log,
    log1p=math.log1p,
    cbrt=_cbrt,
    taylor_switch=TAYLOR_SWITCH,
    endpoint=ENDPOINT,
    deformation_switch=DEFORMATION_SWITCH,
)


def bigfloat_ops(ctx, digits: int) -> SimpleNamespace:
    """Kernel namespace over an mpmath context running at ``digits`` digits.

    The series switch is tightened so the truncated fourth-order term stays
    below the working precision; endpoint cut-offs collapse to exact 0 and 1.
    """
    return SimpleNamespace(
        name=f"bigfloat({digits})",
        one=ctx.mpf(1),
        exp=ctx.exp,
        expm1=ctx.expm1,
        log=ctx.log,
        log1p=ctx.log1p,
        cbrt=ctx.cbrt,
        taylor_switch=ctx.mpf(10) ** (-(digits // 4 + 2)),
        endpoint=0,
        deformation_switch=ctx.mpf(10) ** (-digits),
    )


# -- kernels -----------------------------------------------------------------

def log_ratio_k(a, b, m=DOUBLE):
    q = a / b
    if 0.5 <= q <= 2:
        # a - b is exact here
        return m.log1p((a - b) / b)
    return m.log(a) - m.log(b)


def arithmetic_k(a, b, v, m=DOUBLE):
    if a == b:
        return a
    return (1 - v) * a + v * b


def geometric_k(a, b, v, m=DOUBLE, lr=None):
    if a == b or v == 0:
        return a
    if v == 1:
        return b
    if lr is None:
        lr = log_ratio_k(a, b, m)
    return a * m.exp(-v * lr)


def harmonic_k(a, b, v, m=DOUBLE):
    if a == b:
        return a
    return 1 / ((1 - v) / a + v / b)


def log_mean_k(a, b, m=DOUBLE, lr=None):
    if a == b:
        return a
    x = log_ratio_k(a, b, m) if lr is None else lr
    if abs(x) < m.taylor_switch:
        return b * (1 + x * (m.one / 2 + x * (m.one / 6 + x / 24)))
    return (a - b) / x


def weighted_log_mean_k(a, b, v, m=DOUBLE, lr=None):
    if a == b or v <= m.endpoint:
        return a
    if v >= 1 - m.endpoint:
        return b
    x = log_ratio_k(a, b, m) if lr is None else lr
    w = 1 - v
    if abs(x) < m.taylor_switch:
        w2 = w * w
        w3 = w2 * w
        c2 = (v * w2 + w * (1 + w + w2)) / 6
        c3 = (v * w3 + w * (1 + w + w2 + w3)) / 24
        return b * (1 + x * (w + x * (c2 + x * c3)))
    return b * ((w / v) * m.exp(w * x) * m.expm1(v * x) + (v / w) * m.expm1(w * x)) / x


def naive_weighted_log_mean(a: float, b: float, v: float) -> float:
    """The textbook two-term formula, evaluated literally in doubles.

    Loses most of its digits when ``v`` is near 0 or 1 or ``a/b`` near 1.
    Kept only to reproduce figures computed that way.
    """
    g = a ** (1.0 - v) * b ** v
    return ((1.0 - v) / v * (a - g) + v / (1.0 - v) * (g - b)) / (math.log(a) - math.log(b))


def heinz_k(a, b, v, m=DOUBLE, lr=None):
    if a == b:
        return a
    x = log_ratio_k(a, b, m) if lr is None else lr
    return (a * m.exp(-v * x) + a * m.exp((v - 1) * x)) / 2


def power_mean_third_k(a, b, m=DOUBLE):
    if a == b:
        return a
    s = (m.cbrt(a) + m.cbrt(b)) / 2
    return s * s * s


def identric_k(a, b, m=DOUBLE, lr=None):
    if a == b:
        return a
    x = log_ratio_k(a, b, m) if lr is None else lr
    if abs(x) < m.taylor_switch:
        x2 = x * x
        q = x / 2 + x2 / 12 - x2 * x2 / 720
    else:
        q = x / -m.expm1(-x) - 1
    return b * m.exp(q)


def contraharmonic_k(a, b, m=DOUBLE):
    top = a if a > b else b
    x = a / top
    y = b / top
    return top * (x * x + y * y) / (x + y)


def r_log_k(x, r, m=DOUBLE):
    lx = m.log(x)
    if abs(r) < m.deformation_switch:
        return lx
    return m.expm1(r * lx) / r


# -- value types ---------------------------------------------------------------

def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


@dataclass(frozen=True)
class ScalarPair:
    """A pair of positive reals with the log-ratio ln(a) - ln(b) cached."""

    a: float
    b: float
    log_ratio: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (_finite(self.a) and _finite(self.b)) or self.a <= 0 or self.b <= 0:
            raise DomainError(f"a and b must be finite and positive, got ({self.a!r}, {self.b!r})")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "log_ratio", log_ratio_k(self.a, self.b))

    @property
    def ratio(self) -> float:
        return self.a / self.b

    def swapped(self) -> "ScalarPair":
        return ScalarPair(self.b, self.a)

    def scaled(self, c: float) -> "ScalarPair":
        return ScalarPair(c * self.a, c * self.b)


@dataclass(frozen=True)
class WeightSplit:
    """Weight v in [0, 1] with mu = min(1-v, v) and lam = max(1-v, v)."""

    v: float
    mu: float = field(init=False)
    lam: float = field(init=False)

    def __post_init__(self):
        if not _finite(self.v) or not 0.0 <= self.v <= 1.0:
            raise DomainError(f"weight must lie in [0, 1], got {self.v!r}")
        v = float(self.v)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "mu", min(1.0 - v, v))
        object.__setattr__(self, "lam", max(1.0 - v, v))

    def complement(self) -> "WeightSplit":
        return WeightSplit(1.0 - self.v)


@dataclass(frozen=True)
class Deformation:
    """Deformation parameter r of the r-logarithm; r = 0 is the classical log."""

    r: float

    def __post_init__(self):
        if not _finite(self.r):
            raise DomainError(f"deformation must be finite, got {self.r!r}")
        object.__setattr__(self, "r", float(self.r))

    @property
    def is_classical(self) -> bool:
        return abs(self.r) < DEFORMATION_SWITCH


class MeanKind(enum.Enum):
    ARITHMETIC = "A"
    GEOMETRIC = "G"
    HARMONIC = "H"
    LOGARITHMIC = "L"
    HEINZ = "Hz"
    POWER_THIRD = "P3"

    @classmethod
    def parse(cls, tag: str) -> "MeanKind":
        for kind in cls:
            if tag == kind.value or tag.upper() == kind.name:
                return kind
        raise DomainError(f"unknown mean kind {tag!r}")


# -- public operations -----------------------------------------------------------

def weighted_arithmetic(pair: ScalarPair, w: WeightSplit) -> float:
    return arithmetic_k(pair.a, pair.b, w.v)


def weighted_geometric(pair: ScalarPair, w: WeightSplit) -> float:
    return geometric_k(pair.a, pair.b, w.v, lr=pair.log_ratio)


def weighted_harmonic(pair: ScalarPair, w: WeightSplit) -> float:
    return harmonic_k(pair.a, pair.b, w.v)


def log_mean(pair: ScalarPair) -> float:
    """Logarithmic mean (a - b) / (ln a - ln b), with L(a, a) = a."""
    return log_mean_k(pair.a, pair.b, lr=pair.log_ratio)


def weighted_log_mean(pair: ScalarPair, w: WeightSplit) -> float:
    """Weighted logarithmic mean.

    Evaluated as ``b * [((1-v)/v) e^{(1-v)x} expm1(vx) + (v/(1-v)) expm1((1-v)x)] / x``
    with ``x = ln(a/b)``, a cubic series in ``x`` when ``|x| < 1e-6``, and the
    limits ``a`` (v -> 0) and ``b`` (v -> 1) within 1e-15 of the endpoints.
    """
    return weighted_log_mean_k(pair.a, pair.b, w.v, lr=pair.log_ratio)


def heinz(pair: ScalarPair, w: WeightSplit) -> float:
    return heinz_k(pair.a, pair.b, w.v, lr=pair.log_ratio)


def power_mean_third(pair: ScalarPair) -> float:
    return power_mean_third_k(pair.a, pair.b)


def identric(pair: ScalarPair) -> float:
    """Identric mean, ``b * t**(t/(t-1)) / e`` with ``t = a/b``."""
    return identric_k(pair.a, pair.b, lr=pair.log_ratio)


def contraharmonic(pair: ScalarPair) -> float:
    return contraharmonic_k(pair.a, pair.b)


def r_log(x: float, d: Deformation) -> float:
    """r-logarithm (x**r - 1) / r, via expm1; the natural log when r is ~0."""
    if not _finite(x) or x <= 0:
        raise DomainError(f"r_log needs x > 0, got {x!r}")
    return r_log_k(float(x), d.r)


def refined_young_factor(pair: ScalarPair, w: WeightSplit, d: Deformation | None = None) -> float:
    """``1 + (mu**2 / 2) q**2`` with q the log-ratio, or ln_r(a/b) when deformed."""
    if d is None:
        q = pair.log_ratio
    else:
        q = r_log_k(pair.a / pair.b, d.r) if not d.is_classical else pair.log_ratio
    return 1.0 + 0.5 * w.mu * w.mu * q * q


def representing_L(t: float, w: WeightSplit) -> float:
    """Representing function of the weighted logarithmic mean: L_v(t) = L_v(t, 1)."""
    if not _finite(t) or t <= 0:
        raise DomainError(f"representing function needs t > 0, got {t!r}")
    return weighted_log_mean_k(float(t), 1.0, w.v)


def mean_of_kind(kind: MeanKind, pair: ScalarPair, w: WeightSplit | None = None) -> float:
    """Dispatch by :class:`MeanKind`; unweighted kinds ignore ``w``."""
    v = 0.5 if w is None else w.v
    if kind is MeanKind.ARITHMETIC:
        return arithmetic_k(pair.a, pair.b, v)
    if kind is MeanKind.GEOMETRIC:
        return geometric_k(pair.a, pair.b, v, lr=pair.log_ratio)
    if kind is MeanKind.HARMONIC:
        return harmonic_k(pair.a, pair.b, v)
    if kind is MeanKind.LOGARITHMIC:
        if v == 0.5:
            return log_mean_k(pair.a, pair.b, lr=pair.log_ratio)
        return weighted_log_mean_k(pair.a, pair.b, v, lr=pair.log_ratio)
    if kind is MeanKind.HEINZ:
        return heinz_k(pair.a, pair.b, v, lr=pair.log_ratio)
    return power_mean_third_k(pair.a, pair.b)
