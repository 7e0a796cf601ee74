"""Backend selection for the hot superposition loop.

The compiled extension is used when it was built; set ``WFMARL_PURE_PYTHON=1``
to force the NumPy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("WFMARL_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
superposed_velocity = (_compiled or _kernels_py).superposed_velocity
python_superposed_velocity = _kernels_py.superposed_velocity
compiled_superposed_velocity = _compiled.superposed_velocity if _compiled is not None else None
