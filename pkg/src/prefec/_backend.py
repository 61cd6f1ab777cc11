"""Kernel backend selection.

PREFEC_BACKEND controls which kernel module serves the hot loops:
  auto   (default) numba if importable, else pure numpy
  numba  require the numba kernels, fail if unavailable
  numpy  force the pure-numpy fallback

The choice is resolved once at import time.
"""

import os
import warnings

from .errors import ConfigurationError

ENV_VAR = "PREFEC_BACKEND"

# Row-chunk size used by callers when walking large traces; bounds peak
# memory of the (chunk x M) log q tables.
CHUNK_ROWS = 16384


def _load():
    choice = os.environ.get(ENV_VAR, "auto").strip().lower() or "auto"
    if choice not in ("auto", "numba", "numpy"):
        raise ConfigurationError(
            f"{ENV_VAR} must be one of auto/numba/numpy, got {choice!r}"
        )
    if choice == "numpy":
        from . import _kernels_numpy as mod

        return mod, "numpy"
    try:
        from . import _kernels_numba as mod

        return mod, "numba"
    except ImportError as exc:
        if choice == "numba":
            raise ConfigurationError(f"{ENV_VAR}=numba but numba is not importable: {exc}")
        warnings.warn(
            "numba unavailable, falling back to pure-numpy kernels", RuntimeWarning
        )
        from . import _kernels_numpy as mod

        return mod, "numpy"


kernels, _BACKEND_NAME = _load()


def active_backend() -> str:
    """Name of the kernel backend in use, 'numba' or 'numpy'."""
    return _BACKEND_NAME


def iter_chunks(n: int, size: int = CHUNK_ROWS):
    """Yield (start, stop) row ranges covering range(n)."""
    for start in range(0, n, size):
        yield start, min(start + size, n)
