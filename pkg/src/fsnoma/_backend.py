"""Pick the compiled kernels when available, else the Python twin."""

import os

BACKEND = "python"

if os.environ.get("FSNOMA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._kernels import f1_series, pfq_series  # noqa: F401

        BACKEND = "cython"
    except ImportError:  # extension not built
        pass

if BACKEND == "python":
    from ._kernels_py import f1_series, pfq_series  # noqa: F401,F811

__all__ = ["BACKEND", "f1_series", "pfq_series"]
