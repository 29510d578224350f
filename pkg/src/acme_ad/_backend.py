"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the NumPy
fallback takes over. ``ACME_AD_BACKEND=python|compiled`` forces a choice
(``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

_requested = os.environ.get("ACME_AD_BACKEND", "").strip().lower()

if _requested == "python":
    from ._kernels_py import mean_path_length

    BACKEND = "python"
elif _requested == "compiled":
    from ._kernels import mean_path_length  # type: ignore[no-redef]

    BACKEND = "compiled"
elif _requested == "":
    try:
        from ._kernels import mean_path_length  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from ._kernels_py import mean_path_length  # type: ignore[no-redef]

        BACKEND = "python"
else:
    raise RuntimeError(
        f"ACME_AD_BACKEND must be 'python' or 'compiled', got {_requested!r}"
    )

__all__ = ["mean_path_length", "BACKEND"]
