"""Backend selection for the pointwise kernels.

The compiled extension ``energylab._kernels`` is used when it imports;
otherwise, or when ``ENERGYLAB_PURE_PYTHON=1`` is set, the numpy fallback in
``energylab._kernels_py`` is used. ``ENERGYLAB_THREADS`` caps the thread count
for both the kernels and the FFTs (0 or unset means all cores).
"""

import os

from . import _kernels_py

_force_pure = os.environ.get("ENERGYLAB_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    backend = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as backend  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        backend = _kernels_py
        BACKEND = "python"


def threads() -> int:
    raw = os.environ.get("ENERGYLAB_THREADS", "0").strip() or "0"
    count = int(raw)
    if count <= 0:
        count = os.cpu_count() or 1
    return count


def get_backend(name: str | None = None):
    """Return a kernel module by name ("compiled" or "python"), default the active one."""
    if name is None:
        return backend
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
