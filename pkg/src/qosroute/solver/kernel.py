"""Pick the propagation engine at import.

The compiled engine is used when the extension was built; set
``QOSROUTE_KERNEL=python`` to force the pure-Python fallback.
"""

import os

import numpy as np

from . import _pykernel
from ._pykernel import BIG

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

ENGINES = {"python": _pykernel.Engine}
if _ckernel is not None:
    ENGINES["cython"] = _ckernel.Engine

_choice = os.environ.get("QOSROUTE_KERNEL", "").lower()
if _choice == "python" or _ckernel is None:
    Engine = _pykernel.Engine
else:
    Engine = _ckernel.Engine

KERNEL = Engine.name


def engine_class(name: str | None = None):
    if name is None:
        return Engine
    try:
        return ENGINES[name]
    except KeyError:
        raise ValueError(f"kernel {name!r} unavailable; have {sorted(ENGINES)}") from None


def compile_rows(rows):
    """Flatten rows to CSR arrays ``(ptr, var, coef, lo, hi)``; open bounds become +-BIG."""
    ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    var, coef = [], []
    lo = np.empty(len(rows), dtype=np.int64)
    hi = np.empty(len(rows), dtype=np.int64)
    for r, row in enumerate(rows):
        for v, c in row.terms:
            if c:
                var.append(v)
                coef.append(c)
        ptr[r + 1] = len(var)
        lo[r] = -BIG if row.lo is None else row.lo
        hi[r] = BIG if row.hi is None else row.hi
    return ptr, np.array(var, dtype=np.int64), np.array(coef, dtype=np.int64), lo, hi
