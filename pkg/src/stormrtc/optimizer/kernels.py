"""Selects the simplex kernel backend at import time.

The compiled extension is used when it was built; otherwise the NumPy
implementation is loaded.  Setting ``STORMRTC_PURE_PYTHON=1`` forces the
NumPy path (useful for benchmarking and for checking the two agree).
"""

import importlib
import os

from . import _kernels_py

AT_LOWER = _kernels_py.AT_LOWER
AT_UPPER = _kernels_py.AT_UPPER
BASIC = _kernels_py.BASIC


def load_backend(name=None):
    """Return the kernel module for ``"cython"``, ``"python"`` or the default."""
    if name == "python":
        return _kernels_py
    if name in (None, "cython"):
        try:
            return importlib.import_module("stormrtc.optimizer._kernels")
        except ImportError:
            if name == "cython":
                raise
            return _kernels_py
    raise ValueError(f"unknown kernel backend {name!r}")


if os.environ.get("STORMRTC_PURE_PYTHON", "") not in ("", "0"):
    backend = _kernels_py
else:
    backend = load_backend()

BACKEND = "python" if backend is _kernels_py else "cython"


def available_backends():
    """Names of the backends that can be loaded here, default first."""
    names = [BACKEND]
    other = "python" if BACKEND == "cython" else "cython"
    try:
        load_backend(other)
    except ImportError:
        return names
    return names + [other]
