"""Backend selection for the hot kernels.

Set ``ANNULUS_NO_NUMBA=1`` to force the pure-numpy path.  ``ANNULUS_THREADS``
caps the numba thread pool.
"""

import os

_FALSE = {"", "0", "false", "no", "off"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("ANNULUS_NO_NUMBA", "0").strip().lower() in _FALSE

if HAVE_NUMBA and os.environ.get("ANNULUS_THREADS"):
    try:
        numba.set_num_threads(max(1, min(int(os.environ["ANNULUS_THREADS"]), numba.config.NUMBA_NUM_THREADS)))
    except ValueError:
        pass


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f
