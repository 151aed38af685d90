"""Kernel backend selection.

The compiled extension (`rfimlab._kernels._core`) is used when it imported
cleanly; otherwise the numpy/pure-Python fallback takes over.  Set
``RFIM_LAB_BACKEND=python`` to force the fallback (useful for benchmarks and
for verifying that both backends agree bit-for-bit).
"""

import os

if os.environ.get("RFIM_LAB_BACKEND", "").lower() == "python":
    from . import _pure as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _pure as _impl

        BACKEND = "python"

words_block = _impl.words_block
max_flow_side = _impl.max_flow_side

__all__ = ["BACKEND", "words_block", "max_flow_side"]
