"""Backend switch for the hot loops.

Set ``EHRELAY_BACKEND=numpy`` to force the pure-Python/numpy path; by default
numba is used when it imports.
"""

import os

BACKEND_ENV = "EHRELAY_BACKEND"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None


def requested_backend() -> str:
    want = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if want not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {want!r}")
    if want == "numba" and not HAVE_NUMBA:
        return "numpy"
    return want


def njit(fn):
    """Compile ``fn`` with numba when available; keep the Python original as ``fn.py_func``."""
    if not HAVE_NUMBA:
        fn.py_func = fn
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
