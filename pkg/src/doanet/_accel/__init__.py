"""Kernel backend selection.

The compiled Cython extension is preferred when it imports; otherwise the
numpy fallback in ``_kernels_py`` is used.  Set ``DOANET_BACKEND=python``
or ``DOANET_BACKEND=compiled`` to force a choice (the latter raises if
the extension is missing).  ``benchmarks/bench_kernels.py`` compares the
two backends.
"""

import os

from doanet._accel import _kernels_py

_forced = os.environ.get("DOANET_BACKEND", "").lower()

if _forced == "python":
    _impl = _kernels_py
else:
    try:
        from doanet._accel import _kernels as _impl
    except ImportError:
        if _forced == "compiled":
            raise ImportError(
                "DOANET_BACKEND=compiled but the extension is not built; "
                "reinstall with Cython available"
            )
        _impl = _kernels_py

BACKEND = _impl.BACKEND
rir_accumulate = _impl.rir_accumulate
conv2x1_forward = _impl.conv2x1_forward
conv2x1_backward = _impl.conv2x1_backward
