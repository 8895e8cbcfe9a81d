"""String kernels with a compiled fast path.

The Cython extension is preferred; the pure-Python module is a drop-in
fallback. Set PARAMDOC_PURE=1 to force the fallback (used by the parity
tests and the benchmark).
"""

import os

if os.environ.get("PARAMDOC_PURE") == "1":
    from . import _pure as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

BACKEND = _impl.BACKEND
levenshtein = _impl.levenshtein
char_classes = _impl.char_classes
collapse_runs = _impl.collapse_runs
count_containing = _impl.count_containing
weighted_count_containing = _impl.weighted_count_containing

__all__ = [
    "BACKEND",
    "levenshtein",
    "char_classes",
    "collapse_runs",
    "count_containing",
    "weighted_count_containing",
]
