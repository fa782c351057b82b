"""Backend selection for the compiled kernels.

Every hot kernel in the package exists twice: a numba ``@njit`` loop and a
vectorized numpy equivalent.  The numba path is the default.  Setting the
environment variable ``KGSTAB_NO_NUMBA=1`` (before import) forces the numpy
path, which is also used automatically when numba cannot be imported.
"""

import os

_flag = os.environ.get("KGSTAB_NO_NUMBA", "").strip().lower()

try:
    import numba  # noqa: F401
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


USE_NUMBA = HAVE_NUMBA and _flag not in ("1", "true", "yes", "on")


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def pick(nb_impl, np_impl):
    """Return the kernel matching the active backend."""
    return nb_impl if USE_NUMBA else np_impl
