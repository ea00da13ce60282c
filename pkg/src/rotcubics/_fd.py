"""Central finite differences on uniform grids.

All residual and extraction routines share these stencils so that every
sampled-derivative check in the package carries the same O(h^4) error model.
Boundary samples are dropped rather than handled with one-sided stencils,
which would degrade the order.
"""

import math
from functools import lru_cache

import numpy as np

# margin of valid interior points lost on each side, per derivative order,
# for 4th-order accurate central stencils
MARGIN = {1: 2, 2: 2, 3: 3, 4: 3}


@lru_cache(maxsize=None)
def _weights(order: int, points: int) -> np.ndarray:
    """Stencil weights for the given derivative on `points` symmetric offsets.

    Solves the Vandermonde moment conditions sum_j w_j s_j^k = k! δ_{k,order}.
    """
    half = (points - 1) // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    vander = np.vander(offsets, points, increasing=True).T
    rhs = np.zeros(points)
    rhs[order] = float(math.factorial(order))
    return np.linalg.solve(vander, rhs)


def diff(values: np.ndarray, dt: float, order: int) -> np.ndarray:
    """Derivative of a uniformly sampled series, 4th-order accurate.

    `values` has shape (n, ...) with samples along axis 0.  Returns the
    derivative at the interior points [m, n-m) where m = MARGIN[order];
    output shape is (n - 2m, ...).
    """
    if order not in MARGIN:
        raise ValueError(f"unsupported derivative order {order}")
    m = MARGIN[order]
    points = 2 * m + 1
    n = values.shape[0]
    if n < points:
        raise ValueError(f"need at least {points} samples for order-{order} derivative, got {n}")
    w = _weights(order, points)
    out = np.zeros((n - 2 * m,) + values.shape[1:])
    for j, wj in enumerate(w):
        if wj != 0.0:
            out += wj * values[j : j + n - 2 * m]
    return out / dt**order


def interior(values: np.ndarray, margin: int) -> np.ndarray:
    """Trim `margin` samples from each end of axis 0."""
    if margin == 0:
        return values
    return values[margin:-margin]
