"""Backend selection for the hot iteration kernels.

The inner solve loops are compiled with numba when it is importable and the
environment variable ``FRACROOTS_DISABLE_NUMBA`` is not set to a truthy value
(``1``, ``true``, ``yes``, ``on``).  Without numba the package falls back to
the pure numpy drivers in :mod:`fracroots.solver`; results agree between the
two backends to floating-point noise, only speed differs.
"""

from __future__ import annotations

import os

_flag = os.environ.get("FRACROOTS_DISABLE_NUMBA", "").strip().lower()
NUMBA_REQUESTED = _flag not in {"1", "true", "yes", "on"}

if NUMBA_REQUESTED:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        """Identity stand-in so the kernel sources import unchanged."""
        if args and callable(args[0]):
            return args[0]

        def decorate(fn):
            return fn

        return decorate


def backend_name() -> str:
    """Name of the active hot-loop backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if NUMBA_ENABLED else "numpy"
