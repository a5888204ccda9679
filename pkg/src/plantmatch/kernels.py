"""Kernel backend selection.

The compiled extension is preferred. Set ``PLANTMATCH_PURE=1`` to force the
pure-Python implementations (the extension is then never imported).
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load() -> tuple[ModuleType, str]:
    if os.environ.get("PLANTMATCH_PURE", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _kernels_py, "python"
    return _kernels, "cython"


_impl, BACKEND = _load()

pair_degrees = _impl.pair_degrees
matching_poly = _impl.matching_poly
perfect_matchings = _impl.perfect_matchings
count_embeddings = _impl.count_embeddings
connected_signed_sum = _impl.connected_signed_sum


def backends() -> dict[str, ModuleType]:
    """All importable backends keyed by name (for equivalence tests and benchmarks)."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return out
    out["cython"] = _kernels
    return out
