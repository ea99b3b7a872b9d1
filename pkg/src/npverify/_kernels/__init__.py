"""Hot loops, compiled with numba when available.

Set ``NPVERIFY_DISABLE_NUMBA=1`` to force the pure-numpy path. Both paths
return identical results for identical inputs.
"""

import os

from . import numpy_impl

BACKEND = "numpy"
_impl = numpy_impl

if os.environ.get("NPVERIFY_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes"):
    try:
        from . import numba_impl as _impl
        BACKEND = "numba"
    except ImportError:  # numba missing
        _impl = numpy_impl

NONE, D0, D1, BOTH = numpy_impl.NONE, numpy_impl.D0, numpy_impl.D1, numpy_impl.BOTH

classify_clicks = _impl.classify_clicks
assign_values = _impl.assign_values
tally_clauses = _impl.tally_clauses
count_satisfied = _impl.count_satisfied
exhaustive_min_unsat = _impl.exhaustive_min_unsat
hill_climb = _impl.hill_climb
walk_chunk = _impl.walk_chunk


def backends():
    """Return every importable implementation keyed by name."""
    out = {"numpy": numpy_impl}
    try:
        from . import numba_impl
        out["numba"] = numba_impl
    except ImportError:
        pass
    return out
