"""Switch between numba-compiled kernels and the plain numpy fallback.

Set ``ANACONDA_SIM_NO_JIT=1`` before import to force the fallback path.
The fallback is also used automatically when numba cannot be imported.
"""

import os

_FLAG = "ANACONDA_SIM_NO_JIT"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and os.environ.get(_FLAG, "").strip().lower() not in (
    "1",
    "true",
    "yes",
)


def njit(*args, **kwargs):
    """``numba.njit`` when acceleration is on, identity decorator otherwise."""
    if USE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
