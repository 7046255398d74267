"""Backend selection for the hot kernels.

Set ``HC2LAB_NUMBA=0`` to run every kernel on its pure numpy / Python path.
"""
import os
import time

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("HC2LAB_NUMBA", "1").lower() not in ("0", "false", "no", "off")


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def clock():
        with numba.objmode(t="float64"):
            t = time.perf_counter()
        return t

else:  # pragma: no cover
    clock = time.perf_counter


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def popcount_rows(a):
    """Row-wise popcount of a (N, W) uint64 array."""
    return np.bitwise_count(a).sum(axis=1, dtype=np.int64)
