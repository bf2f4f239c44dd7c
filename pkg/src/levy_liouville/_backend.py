"""Kernel backend selection.

Set ``LEVY_LIOUVILLE_BACKEND=numpy`` to force the pure-numpy kernels. The
default uses numba when it imports cleanly.
"""

import os

ENV_FLAG = "LEVY_LIOUVILLE_BACKEND"


def _numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def requested_backend():
    value = os.environ.get(ENV_FLAG, "auto").strip().lower()
    if value not in ("auto", "numba", "numpy"):
        raise ValueError(f"{ENV_FLAG} must be one of auto, numba, numpy (got {value!r})")
    return value


def resolve_backend():
    value = requested_backend()
    if value == "numpy":
        return "numpy"
    if _numba_available():
        return "numba"
    if value == "numba":
        raise ImportError(f"{ENV_FLAG}=numba but numba is not installed")
    return "numpy"


BACKEND = resolve_backend()
USE_NUMBA = BACKEND == "numba"
