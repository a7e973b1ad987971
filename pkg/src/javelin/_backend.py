"""Select the autonomous-system kernel at import time.

The compiled extension is used when importable; set ``JAVELIN_BACKEND=python``
to force the pure-Python fallback.
"""

import os

from . import _kernels_py

_impl = _kernels_py
BACKEND = "python"

if os.environ.get("JAVELIN_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

as_rhs = _impl.as_rhs
integrate_as = _impl.integrate_as


def get(name: str):
    """Kernel module by name (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
