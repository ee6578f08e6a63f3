"""Batch mean kernels with import-time backend selection.

The compiled extension is preferred; the numpy module is used when it is
missing or when ``MEANLAB_PURE_PYTHON`` is set to a non-empty value other
than ``0``. ``BACKEND`` names the implementation actually in use.

All public functions broadcast their arguments and accept scalars.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("MEANLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

TAYLOR_SWITCH = _kernels_py.TAYLOR_SWITCH
ENDPOINT = _kernels_py.ENDPOINT
DEFORMATION_SWITCH = _kernels_py.DEFORMATION_SWITCH


def compiled_available() -> bool:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def _call(fn, *args):
    arrs = np.broadcast_arrays(*(np.asarray(x, dtype=np.float64) for x in args))
    shape = arrs[0].shape
    flat = [np.ascontiguousarray(x).reshape(-1) for x in arrs]
    out = np.asarray(fn(*flat)).reshape(shape)
    return out


def log_ratio(a, b, impl=None):
    return _call((impl or _impl).log_ratio, a, b)


def weighted_arithmetic(a, b, v, impl=None):
    return _call((impl or _impl).weighted_arithmetic, a, b, v)


def weighted_geometric(a, b, v, impl=None):
    return _call((impl or _impl).weighted_geometric, a, b, v)


def weighted_harmonic(a, b, v, impl=None):
    return _call((impl or _impl).weighted_harmonic, a, b, v)


def log_mean(a, b, impl=None):
    return _call((impl or _impl).log_mean, a, b)


def weighted_log_mean(a, b, v, impl=None):
    return _call((impl or _impl).weighted_log_mean, a, b, v)


def heinz(a, b, v, impl=None):
    return _call((impl or _impl).heinz, a, b, v)


def power_mean_third(a, b, impl=None):
    return _call((impl or _impl).power_mean_third, a, b)


def identric(a, b, impl=None):
    return _call((impl or _impl).identric, a, b)


def contraharmonic(a, b, impl=None):
    return _call((impl or _impl).contraharmonic, a, b)


def r_log(x, r, impl=None):
    return _call((impl or _impl).r_log, x, r)
