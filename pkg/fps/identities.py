# fps/identities.py
"""
Least squares and similarity.

For a scalar least-squares fit of y on x without intercept the residual sum of
squares equals ‖y‖²·sin²θ where cosθ = ⟨x,y⟩/(‖x‖‖y‖): the fit improves
exactly as |similarity| grows, which is what alignment maximizes.
"""

import numpy as np

from fps_lab.errors import DegenerateWindowError


def _vectors(x, y):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if not np.any(x):
        raise DegenerateWindowError("degenerate window: x is all zeros")
    return x, y


def rss_no_intercept(x, y) -> float:
    """Residual sum of squares of y ≈ βx with β = ⟨x,y⟩/⟨x,x⟩."""
    x, y = _vectors(x, y)
    beta = np.dot(x, y) / np.dot(x, x)
    residual = y - beta * x
    return float(np.dot(residual, residual))


def rss_from_similarity(x, y) -> float:
    """‖y‖²(1 − cos²θ) using the uncentered cosine."""
    x, y = _vectors(x, y)
    yy = float(np.dot(y, y))
    if yy == 0.0:
        return 0.0
    cos = np.dot(x, y) / (np.linalg.norm(x) * np.sqrt(yy))
    return float(yy * (1.0 - cos * cos))
