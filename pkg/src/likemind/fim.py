"""Closed frequent-itemset mining entry point.

Prefers the compiled kernel and falls back to the pure-Python miner when the
extension was not built.  Both share one contract: every closed itemset with
support >= min_support and length <= max_len (0 = unlimited), as
(sorted item ids, sorted supporting transaction indices).
"""

from __future__ import annotations

from . import _fim_py

try:  # pragma: no cover - depends on the build environment
    from . import _fim  # type: ignore[attr-defined]

    mine_closed = _fim.mine_closed
    BACKEND = "cython"
except ImportError:  # pragma: no cover
    mine_closed = _fim_py.mine_closed
    BACKEND = "python"


def available_backends() -> dict:
    """Name -> callable for every miner present in this installation."""
    backends = {"python": _fim_py.mine_closed}
    if BACKEND == "cython":
        backends["cython"] = mine_closed
    return backends
