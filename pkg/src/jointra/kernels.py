"""Backend selection for the hot kernels.

The compiled extension is used when it imports; setting the environment
variable ``JOINTRA_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _kernels_py

OPTIMAL = _kernels_py.OPTIMAL
UNBOUNDED = _kernels_py.UNBOUNDED
ITERATION_LIMIT = _kernels_py.ITERATION_LIMIT

_impl = _kernels_py
BACKEND = "python"
if os.environ.get("JOINTRA_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

sinr_closed_form = _impl.sinr_closed_form
simplex_iterate = _impl.simplex_iterate
pivot = _impl.pivot


def get_backend(name):
    """Return the kernel module named ``"python"`` or ``"cython"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
