"""Kernel dispatch: compiled Cython kernels when available, pure Python otherwise.

Set ``PLAYDIFF_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("PLAYDIFF_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

play_nodes = _impl.play_nodes
project_stop = _impl.project_stop
window_oscillation = _impl.window_oscillation

__all__ = ["BACKEND", "play_nodes", "project_stop", "window_oscillation"]
