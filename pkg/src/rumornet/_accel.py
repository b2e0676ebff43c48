"""Numba switch.

Kernels are compiled with numba when it is importable, unless the environment
variable ``RUMORNET_DISABLE_NUMBA`` is set to a truthy value, in which case the
pure-numpy implementations are used instead.
"""
import os

_FLAG = os.environ.get("RUMORNET_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    import numba

    USE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    USE_NUMBA = False


def njit(fn):
    """Compile ``fn`` with numba in nopython mode if available, else return it as is."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
