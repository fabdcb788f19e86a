"""Matching kernels with a compiled fast path.

The Cython module is used when it was built and the instance fits in 64-bit
masks; otherwise the pure-Python module runs.  Set ``METLOGIC_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _pykernels as py

try:
    if os.environ.get("METLOGIC_PURE_PYTHON") == "1":
        raise ImportError("pure Python forced")
    from . import _ckernels as c
except ImportError:
    c = None

BACKEND = "cython" if c is not None else "python"
_LIMIT = 64


def _pick(n):
    return c if c is not None and n <= _LIMIT else py


def hk_matching(rows, n_right):
    return _pick(max(len(rows), n_right)).hk_matching(rows, n_right)


def masked_mu(rows, mask):
    return _pick(len(rows)).masked_mu(rows, mask)


def max_deficiency(rows, n_right):
    mod = c if c is not None and len(rows) <= 40 and n_right <= _LIMIT else py
    return mod.max_deficiency(rows, n_right)


def scan_certificates(rows_by_g, start, stop, theta_num, theta_den, keep=10):
    n = len(rows_by_g[0]) if rows_by_g else 0
    return _pick(n).scan_certificates(rows_by_g, start, stop, theta_num, theta_den, keep)


def scan_critical(rows_by_y, n_thresholds, start, stop, theta_num, theta_den, k_max):
    n = len(rows_by_y[0][0]) if rows_by_y and n_thresholds else 0
    return _pick(n).scan_critical(
        rows_by_y, n_thresholds, start, stop, theta_num, theta_den, k_max
    )
