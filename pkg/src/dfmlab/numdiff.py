"""Fourth-order central finite differences."""
from __future__ import annotations

from typing import Callable

import numpy as np

# f'(0) ~ [f(-2h) - 8 f(-h) + 8 f(h) - f(2h)] / (12 h)
_STENCIL = ((-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0))


def central_derivative(f: Callable[[float], np.ndarray], h: float = 1e-3) -> np.ndarray:
    """Derivative at 0 of a scalar-parameter curve ``f``."""
    return sum(w * np.asarray(f(s * h)) for s, w in _STENCIL) / (12.0 * h)


def central_jacobian(f: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Dense Jacobian ``df_i/dx_j`` at ``x0`` for real vector maps."""
    x0 = np.asarray(x0, dtype=float)
    cols = []
    for j in range(x0.size):
        e = np.zeros_like(x0)
        e.flat[j] = 1.0
        cols.append(np.ravel(central_derivative(lambda t: f(x0 + t * e), h)))
    return np.stack(cols, axis=-1)
