"""Kernel backend selection.

The compiled extension (_core) is preferred when present; the pure-Python
module (_pykernels) is the fallback and the reference implementation.
Set AMOLAB_FORCE_PYTHON=1 to skip the compiled module.
"""

import importlib
import os

from . import _pykernels

_FORCE_PY = os.environ.get("AMOLAB_FORCE_PYTHON", "") not in ("", "0")

_core = None
if not _FORCE_PY:
    try:
        _core = importlib.import_module(__name__ + "._core")
    except ImportError:
        _core = None

_impl = _core if _core is not None else _pykernels

BACKEND = "compiled" if _core is not None else "python"

qr_product = _impl.qr_product
lyap_grid = _impl.lyap_grid
det_drift_grid = _impl.det_drift_grid
rotation_grid = _impl.rotation_grid
gram_pairs = _impl.gram_pairs
telescope_pairs = _impl.telescope_pairs
gordon_norms = _impl.gordon_norms


def backend_name():
    return BACKEND


def backends():
    """Importable backends, name -> module (for parity tests and benchmarks)."""
    out = {"python": _pykernels}
    if _core is not None:
        out["compiled"] = _core
    return out
