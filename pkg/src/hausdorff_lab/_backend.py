"""Backend selection for the hot kernels.

Numba is used when importable unless ``HAUSDORFF_LAB_BACKEND=numpy`` is set.
The flag is read once at import time; ``use_backend`` switches at runtime
(mainly for benchmarks and the cross-backend tests).
"""

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_ENV_FLAG = "HAUSDORFF_LAB_BACKEND"


def _initial():
    want = os.environ.get(_ENV_FLAG, "numba").strip().lower()
    if want not in ("numba", "numpy"):
        raise ValueError(f"{_ENV_FLAG} must be 'numba' or 'numpy', got {want!r}")
    if want == "numba" and not HAVE_NUMBA:
        return "numpy"
    return want


_current = _initial()


def backend():
    """Name of the active backend: ``"numba"`` or ``"numpy"``."""
    return _current


def use_backend(name):
    """Switch the active backend and return the previous one."""
    global _current
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _current = _current, name
    return prev
