"""Backend selection for the hot kernels.

The compiled Cython module is used when it has been built; otherwise the
numpy fallback is imported.  Setting ``GCTUBES_PURE_PYTHON=1`` forces the
fallback.
"""

import os

from . import _pykernels as python_backend

try:
    if os.environ.get("GCTUBES_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

tube_counts = _impl.tube_counts
pair_hits = _impl.pair_hits
band_hits = _impl.band_hits
greedy_fill = _impl.greedy_fill
