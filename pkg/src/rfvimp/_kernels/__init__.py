"""Backend selection for the tree kernels.

The compiled Cython extension is used when importable; otherwise the pure
numpy fallback. Override with ``RFVIMP_BACKEND=python`` or
``RFVIMP_BACKEND=cython`` (the latter raises if the extension is missing).
Both backends are bitwise-equivalent; ``benchmarks/bench_backends.py``
compares their speed.
"""

from __future__ import annotations

import os

from . import py_backend


def _select():
    choice = os.environ.get("RFVIMP_BACKEND", "auto").lower()
    if choice == "python":
        return py_backend
    try:
        from . import _tree_cy
        return _tree_cy
    except ImportError:
        if choice == "cython":
            raise ImportError(
                "RFVIMP_BACKEND=cython but the compiled extension is not built; "
                "reinstall the package or use RFVIMP_BACKEND=python"
            )
        return py_backend


_impl = _select()

BACKEND = _impl.NAME
build_tree = _impl.build_tree
predict_rows = _impl.predict_rows

__all__ = ["BACKEND", "build_tree", "predict_rows", "py_backend"]
