"""Numpy implementations of the batch mean kernels.

Selected when the compiled ``_kernels`` extension is not importable, and
always available as the cross-check for it. Every function takes
contiguous 1-D float64 arrays of equal length and returns a new array.
"""

import numpy as np

TAYLOR_SWITCH = 1e-6
ENDPOINT = 1e-15
DEFORMATION_SWITCH = 1e-12

_QUIET = dict(over="ignore", under="ignore", divide="ignore", invalid="ignore")


def log_ratio(a, b):
    with np.errstate(**_QUIET):
        q = a / b
        near = (q >= 0.5) & (q <= 2.0)
        # a - b is exact inside [b/2, 2b]
        return np.where(near, np.log1p((a - b) / b), np.log(a) - np.log(b))


def _wlm_series(x, v):
    w = 1.0 - v
    w2 = w * w
    w3 = w2 * w
    c2 = (v * w2 + w * (1.0 + w + w2)) / 6.0
    c3 = (v * w3 + w * (1.0 + w + w2 + w3)) / 24.0
    return 1.0 + x * (w + x * (c2 + x * c3))


def weighted_arithmetic(a, b, v):
    out = (1.0 - v) * a + v * b
    return np.where(a == b, a, out)


def weighted_geometric(a, b, v):
    lr = log_ratio(a, b)
    with np.errstate(**_QUIET):
        out = a * np.exp(-v * lr)
    out = np.where(v == 1.0, b, out)
    out = np.where(v == 0.0, a, out)
    return np.where(a == b, a, out)


def weighted_harmonic(a, b, v):
    out = 1.0 / ((1.0 - v) / a + v / b)
    return np.where(a == b, a, out)


def log_mean(a, b):
    lr = log_ratio(a, b)
    with np.errstate(**_QUIET):
        direct = (a - b) / lr
    series = b * (1.0 + lr * (0.5 + lr * (1.0 / 6.0 + lr / 24.0)))
    out = np.where(np.abs(lr) < TAYLOR_SWITCH, series, direct)
    return np.where(a == b, a, out)


def weighted_log_mean(a, b, v):
    lr = log_ratio(a, b)
    w = 1.0 - v
    with np.errstate(**_QUIET):
        direct = b * ((w / v) * np.exp(w * lr) * np.expm1(v * lr)
                      + (v / w) * np.expm1(w * lr)) / lr
    out = np.where(np.abs(lr) < TAYLOR_SWITCH, b * _wlm_series(lr, v), direct)
    out = np.where(v < ENDPOINT, a, out)
    out = np.where(v > 1.0 - ENDPOINT, b, out)
    return np.where(a == b, a, out)


def heinz(a, b, v):
    lr = log_ratio(a, b)
    with np.errstate(**_QUIET):
        out = 0.5 * (a * np.exp(-v * lr) + a * np.exp((v - 1.0) * lr))
    return np.where(a == b, a, out)


def power_mean_third(a, b):
    m = 0.5 * (np.cbrt(a) + np.cbrt(b))
    return np.where(a == b, a, m * m * m)


def identric(a, b):
    x = log_ratio(a, b)
    with np.errstate(**_QUIET):
        direct = x / -np.expm1(-x) - 1.0
    x2 = x * x
    series = x * 0.5 + x2 / 12.0 - x2 * x2 / 720.0
    q = np.where(np.abs(x) < TAYLOR_SWITCH, series, direct)
    with np.errstate(**_QUIET):
        out = b * np.exp(q)
    return np.where(a == b, a, out)


def contraharmonic(a, b):
    m = np.maximum(a, b)
    x = a / m
    y = b / m
    return m * (x * x + y * y) / (x + y)


def r_log(x, r):
    lx = np.log(x)
    with np.errstate(**_QUIET):
        deformed = np.expm1(r * lx) / r
    return np.where(np.abs(r) < DEFORMATION_SWITCH, lx, deformed)
