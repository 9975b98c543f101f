"""Backend selection for the vectorized kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Callers go through the module-level names below,
so :func:`set_backend` takes effect everywhere at once.
"""

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_NAMES = (
    "g_array",
    "butterworth_sq",
    "stage_noise",
    "cascade_accumulate",
    "hsw_alloc",
    "hsw_threshold",
    "classical_alloc",
    "classical_threshold",
)

BACKEND = None


def available_backends():
    return ["compiled", "python"] if _compiled is not None else ["python"]


def set_backend(name):
    """Switch between ``"compiled"`` and ``"python"`` kernels."""
    global BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available; build the extension first")
        src = _compiled
    elif name == "python":
        src = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    g = globals()
    for attr in _NAMES:
        g[attr] = getattr(src, attr)
    BACKEND = name


set_backend("compiled" if _compiled is not None else "python")
