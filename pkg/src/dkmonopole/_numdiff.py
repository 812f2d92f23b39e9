"""Central finite differences used by the frame and gauge checks."""

import numpy as np

# five-point stencil; truncation O(h^4) keeps frame derivatives near 1e-13
_STENCIL = ((-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12))
REL_STEP = 1e-3


def step(x: float, rel: float = REL_STEP) -> float:
    return rel * (1.0 + abs(x))


def partial(func, x, k: int, h: float | None = None):
    """d func / d x_k at x, for array-valued func of a coordinate vector."""
    x = np.asarray(x, dtype=float)
    h = step(x[k]) if h is None else h
    acc = 0.0
    for shift, weight in _STENCIL:
        xs = x.copy()
        xs[k] += shift * h
        acc = acc + weight * np.asarray(func(xs))
    return acc / h


def gradient(func, x, h: float | None = None):
    """Stack of partial derivatives along a new leading axis."""
    return np.stack([partial(func, x, k, h) for k in range(len(x))])


def derivative(func, t: float, h: float | None = None):
    return partial(lambda v: func(v[0]), np.array([t]), 0, h)
