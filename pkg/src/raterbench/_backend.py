"""Simulation-kernel backend selection.

The compiled Cython kernel is preferred when importable; the vectorized numpy
fallback is always available. ``RATERBENCH_KERNEL=py`` or ``=c`` forces a
side (used by the benchmark and the backend-equality tests).
"""

from __future__ import annotations

import os

from . import _kernel_py

_FORCED = os.environ.get("RATERBENCH_KERNEL", "").strip().lower()

_compiled = None
if _FORCED != "py":
    try:
        from . import _kernel as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None
        if _FORCED == "c":
            raise ImportError(
                "RATERBENCH_KERNEL=c requested but the compiled kernel is not built"
            )

_active = _compiled if _compiled is not None else _kernel_py


def kernel_name() -> str:
    """Name of the backend in use: 'compiled' or 'python'."""
    return _active.BACKEND_NAME


def tabulate(u, params):
    """Dispatch to the active kernel (see ``_kernel_py.tabulate``)."""
    return _active.tabulate(u, params)


def available_kernels() -> dict:
    """Importable kernel modules keyed by backend name."""
    found = {_kernel_py.BACKEND_NAME: _kernel_py}
    if _compiled is not None:
        found[_compiled.BACKEND_NAME] = _compiled
    return found
