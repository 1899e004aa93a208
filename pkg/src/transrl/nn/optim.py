"""Adam and gradient clipping."""

from __future__ import annotations

from typing import Dict, Optional

import numpy as np

from .params import ParamStore


class Adam:
    def __init__(self, store: ParamStore, lr=1e-5, betas=(0.9, 0.999), eps=1e-8):
        self.store = store
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, grads: Optional[Dict[str, np.ndarray]] = None):
        """One update.  ``grads`` defaults to the ``.grad`` slots; a missing gradient counts as zero."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for name, p in self.store.trainable():
            g = grads.get(name) if grads is not None else p.grad
            if g is None:
                g = np.zeros_like(p.data)
            elif not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for parameter {name!r}")
            m = self.m.get(name)
            if m is None:
                m = self.m[name] = np.zeros_like(p.data)
                self.v[name] = np.zeros_like(p.data)
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            update = (self.lr / c1) * m / (np.sqrt(v / c2) + self.eps)
            p.data = (p.data - update).astype(p.data.dtype, copy=False)


def adam_step(store: ParamStore, grads: Dict[str, np.ndarray], lr=1e-5, betas=(0.9, 0.999), eps=1e-8,
              optimizer: Optional[Adam] = None) -> Adam:
    """Functional form: apply one Adam update, returning the optimizer holding the moments."""
    opt = optimizer if optimizer is not None else Adam(store, lr, betas, eps)
    opt.step(grads)
    return opt


def clip_grad_norm(store: ParamStore, max_norm: float) -> float:
    grads = [p.grad for _, p in store.trainable() if p.grad is not None]
    total = float(np.sqrt(sum(float(np.vdot(g, g)) for g in grads)))
    if max_norm > 0 and total > max_norm:
        k = max_norm / (total + 1e-6)
        for _, p in store.trainable():
            if p.grad is not None:
                p.grad = p.grad * k
    return total
