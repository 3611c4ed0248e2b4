"""Kernel backend selection.

The compiled ``_ckernels`` module is used when it imports; otherwise the
pure-Python ``_pykernels`` module takes over.  Setting the environment variable
``LOZENGE_COOLING_BACKEND=python`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

py = _pykernels

try:
    from . import _ckernels as _c
except ImportError:  # pragma: no cover - depends on the build
    _c = None

compiled = _c

if _c is not None and os.environ.get("LOZENGE_COOLING_BACKEND", "").lower() != "python":
    active = _c
else:
    active = _pykernels

BACKEND = active.BACKEND
CoolingKernel = active.CoolingKernel
monotone_updates = active.monotone_updates
hull_up = active.hull_up
label_regions = active.label_regions


def get_backend(name: str | None = None):
    """The kernel module called ``name`` ('cython' or 'python'), or the active one."""
    if name is None:
        return active
    if name == "python":
        return _pykernels
    if name == "cython":
        if _c is None:
            raise ImportError("compiled kernels are not built")
        return _c
    raise ValueError(f"unknown backend {name!r}")
