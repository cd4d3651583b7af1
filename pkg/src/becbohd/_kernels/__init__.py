"""Backend selection for the integration kernels.

Prefers the compiled Cython extension; falls back to the pure-NumPy
implementation when the extension is missing or when the environment
variable ``BECBOHD_PURE_PYTHON=1`` is set.  ``BACKEND`` records the choice.
"""

from __future__ import annotations

import os

if os.environ.get("BECBOHD_PURE_PYTHON") == "1":
    from ._py_core import BACKEND, rk4_bloch, sse_euler
else:
    try:
        from ._core import BACKEND, rk4_bloch, sse_euler
    except ImportError:
        from ._py_core import BACKEND, rk4_bloch, sse_euler

__all__ = ["BACKEND", "rk4_bloch", "sse_euler"]
