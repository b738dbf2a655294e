"""Kernel backend selection.

The hot kernels (K0-family evaluation and the quadrature accumulation of
the nonlocal right-hand sides) exist twice: a Cython extension
(`_fastkern`) and a NumPy reference (`reference`).  The compiled one is
used when importable; set QGFRONT_PURE_PYTHON=1 to force the fallback.
Both expose the same functions and agree to ~1e-13 (asserted in tests).
"""

import os

from . import reference

if os.environ.get("QGFRONT_PURE_PYTHON", "").strip() not in ("", "0"):
    _active = reference
else:
    try:
        from . import _fastkern as _active
    except ImportError:
        _active = reference

IMPL = _active.IMPL
k0v = _active.k0v
k0pv = _active.k0pv
k0_k0p = _active.k0_k0p
i0v = _active.i0v
accumulate_direct = _active.accumulate_direct
accumulate_series = _active.accumulate_series


def backends_available():
    """Names of importable backends (for the benchmark and tests)."""
    names = ["reference"]
    try:
        from . import _fastkern  # noqa: F401
        names.append("fastkern")
    except ImportError:
        pass
    return names


def get_backend(name):
    if name == "reference":
        return reference
    if name == "fastkern":
        from . import _fastkern
        return _fastkern
    raise ValueError(f"unknown backend {name!r}")
