"""Hot-loop kernels with import-time backend selection.

The compiled Cython kernel is preferred; the pure-Python fallback keeps the
package importable from a source checkout without a compiler. Set
``DELENS_PURE_PYTHON=1`` to force the fallback (used by the parity tests and
the kernel benchmark).
"""

import os

from . import _hinge_py

if os.environ.get("DELENS_PURE_PYTHON"):
    hinge_epoch = _hinge_py.hinge_epoch
    BACKEND = "python"
else:
    try:
        from ._hinge_cy import hinge_epoch

        BACKEND = "cython"
    except ImportError:
        hinge_epoch = _hinge_py.hinge_epoch
        BACKEND = "python"

__all__ = ["hinge_epoch", "BACKEND"]
