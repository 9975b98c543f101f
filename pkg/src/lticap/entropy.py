"""Von Neumann entropy of a single-mode bosonic thermal state."""

import math

import numpy as np

from . import kernels
from .physics import InvalidParameterError


def g(x):
    """Entropy in bits of a thermal state with mean photon number ``x``.

    ``g(x) = (x+1) log2(x+1) - x log2(x)``, evaluated as
    ``[log1p(x) + x log1p(1/x)] / ln 2``. Both terms are positive, so there
    is no cancellation at small or large ``x``.

    Accepts a scalar or an array; returns the same kind.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise InvalidParameterError("g(x) requires finite x >= 0")
    out = kernels.g_array(arr.ravel()).reshape(arr.shape)
    if np.ndim(x) == 0:
        return float(out)
    return out


def g_scalar(x):
    """Pure-Python scalar version used by the oracles."""
    if not math.isfinite(x) or x < 0.0:
        raise InvalidParameterError(f"g(x) requires finite x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < 1e-300:
        return x * (1.0 - math.log(x)) / math.log(2.0)
    return (math.log1p(x) + x * math.log1p(1.0 / x)) / math.log(2.0)
