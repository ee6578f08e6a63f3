"""Numeric backends the inequality catalog evaluates its terms on.

A backend bundles mean functions over *raw* numbers: Python floats
(:class:`DoubleBackend`), numpy arrays routed through the batch kernels
(:class:`ArrayBackend`) or mpmath numbers in a private context
(:class:`BigFloatBackend`). Case definitions only use the methods here plus
ordinary arithmetic, so one definition serves all three.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np

from . import kernels
from . import scalar_means as sm


class DoubleBackend:
    name = "double"
    is_array = False

    def __init__(self):
        self.m = sm.DOUBLE

    def num(self, x):
        if isinstance(x, str) and "/" in x:
            return float(Fraction(x))
        return float(x)

    def frac(self, p, q):
        return p / q

    def log_ratio(self, x, y):
        return sm.log_ratio_k(x, y, self.m)

    def A(self, x, y, v):
        return sm.arithmetic_k(x, y, v, self.m)

    def G(self, x, y, v):
        return sm.geometric_k(x, y, v, self.m)

    def H(self, x, y, v):
        return sm.harmonic_k(x, y, v, self.m)

    def L(self, x, y):
        return sm.log_mean_k(x, y, self.m)

    def Lv(self, x, y, v):
        return sm.weighted_log_mean_k(x, y, v, self.m)

    def Hz(self, x, y, v):
        return sm.heinz_k(x, y, v, self.m)

    def P3(self, x, y):
        return sm.power_mean_third_k(x, y, self.m)

    def I(self, x, y):  # noqa: E743
        return sm.identric_k(x, y, self.m)

    def C(self, x, y):
        return sm.contraharmonic_k(x, y, self.m)

    def rlog(self, x, r):
        return sm.r_log_k(x, r, self.m)

    def minimum(self, values):
        return min(values)


class ArrayBackend(DoubleBackend):
    """Vectorised doubles; ``impl`` pins a kernel module (default: selected)."""

    is_array = True

    def __init__(self, impl=None):
        super().__init__()
        self.impl = impl

    def num(self, x):
        return np.asarray(x, dtype=np.float64)

    def log_ratio(self, x, y):
        return kernels.log_ratio(x, y, self.impl)

    def A(self, x, y, v):
        return kernels.weighted_arithmetic(x, y, v, self.impl)

    def G(self, x, y, v):
        return kernels.weighted_geometric(x, y, v, self.impl)

    def H(self, x, y, v):
        return kernels.weighted_harmonic(x, y, v, self.impl)

    def L(self, x, y):
        return kernels.log_mean(x, y, self.impl)

    def Lv(self, x, y, v):
        return kernels.weighted_log_mean(x, y, v, self.impl)

    def Hz(self, x, y, v):
        return kernels.heinz(x, y, v, self.impl)

    def P3(self, x, y):
        return kernels.power_mean_third(x, y, self.impl)

    def I(self, x, y):  # noqa: E743
        return kernels.identric(x, y, self.impl)

    def C(self, x, y):
        return kernels.contraharmonic(x, y, self.impl)

    def rlog(self, x, r):
        return kernels.r_log(x, r, self.impl)

    def minimum(self, values):
        return np.minimum.reduce([np.asarray(x) for x in values])


class BigFloatBackend(DoubleBackend):
    """mpmath evaluation carrying ``digits`` significant digits plus guard digits."""

    GUARD = 10

    def __init__(self, digits: int):
        self.digits = int(digits)
        self.ctx = mpmath.MPContext()
        self.ctx.dps = self.digits + self.GUARD
        self.m = sm.bigfloat_ops(self.ctx, self.ctx.dps)
        self.name = f"bigfloat({self.digits})"

    def num(self, x):
        if isinstance(x, Fraction):
            return self.ctx.mpf(x.numerator) / x.denominator
        if isinstance(x, str):
            if "/" in x:
                return self.num(Fraction(x))
            return self.ctx.mpf(x)
        return self.ctx.mpf(x)

    def frac(self, p, q):
        return self.ctx.mpf(p) / q
