"""Kernel backend selection.

The hot numeric kernels (Tulap cdf/quantile, hypergeometric weights,
Gil-Pelaez panel quadrature) exist in two versions: numba @njit and pure
numpy.  The numba path is used when numba imports cleanly, unless the
environment variable CNDTEST_BACKEND forces a choice:

    CNDTEST_BACKEND=numpy   always use the pure-numpy kernels
    CNDTEST_BACKEND=numba   require numba (ImportError if unavailable)

Resolved once at import time; ``active_backend()`` reports the result.
"""

import os

_requested = os.environ.get("CNDTEST_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"CNDTEST_BACKEND={_requested!r} not understood (use 'numba' or 'numpy')"
    )

if _requested == "numpy":
    HAVE_NUMBA = False
else:
    try:
        import numba  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise
        HAVE_NUMBA = False

def active_backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
