"""Central finite-difference gradient checks."""

from __future__ import annotations

from typing import Callable, Dict, Sequence

import numpy as np

from .tensor import Tensor


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """``||a - n|| / max(||a||, ||n||, floor)`` over a whole tensor."""
    diff = np.linalg.norm(analytic - numeric)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), floor)
    return float(diff / scale)


def numeric_grad(f: Callable[[], Tensor], t: Tensor, eps: float = 1e-5) -> np.ndarray:
    g = np.zeros_like(t.data, dtype=np.float64)
    flat = t.data.reshape(-1)
    out = g.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + eps
        plus = float(f().data)
        flat[k] = orig - eps
        minus = float(f().data)
        flat[k] = orig
        out[k] = (plus - minus) / (2 * eps)
    return g


def check_gradients(f: Callable[[], Tensor], inputs: Sequence[Tensor], eps: float = 1e-5) -> Dict[int, float]:
    """Relative error of backprop vs central differences for each input.

    ``f`` must rebuild the graph from ``inputs`` on every call and return a
    scalar.  Inputs should be float64 for meaningful results.
    """
    for t in inputs:
        t.grad = None
    out = f()
    out.backward()
    analytic = [np.zeros_like(t.data) if t.grad is None else np.array(t.grad, dtype=np.float64) for t in inputs]
    for t in inputs:
        t.grad = None
    return {i: relative_error(a, numeric_grad(f, t, eps)) for i, (t, a) in enumerate(zip(inputs, analytic))}
