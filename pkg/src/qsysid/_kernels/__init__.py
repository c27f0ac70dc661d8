"""Hot loops of the infection search, compiled when available.

The Cython extension ``_infect_cy`` is used if it was built; otherwise the
pure-Python module with the same functions is loaded.  Setting
``QSYSID_PURE_PYTHON=1`` forces the fallback.
"""

import os

from qsysid._kernels import _infect_py

BACKEND = "python"
infect_kernel = _infect_py

if os.environ.get("QSYSID_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from qsysid._kernels import _infect_cy
    except ImportError:
        pass
    else:
        infect_kernel = _infect_cy
        BACKEND = "cython"


def available_backends():
    """Mapping of backend name to kernel module, for benchmarks and tests."""
    out = {"python": _infect_py}
    try:
        from qsysid._kernels import _infect_cy
    except ImportError:
        return out
    out["cython"] = _infect_cy
    return out
