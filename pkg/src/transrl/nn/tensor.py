"""Small reverse-mode autodiff over numpy arrays.

Every op builds a node holding its parents and a closure that pushes the
output gradient back to them.  Gradients are accumulated out of place, so
arrays handed to several parents may be shared safely.  Intermediate
gradients are dropped once consumed; leaf gradients persist until cleared.
"""

from __future__ import annotations

import contextlib
import threading
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ShapeError


class _Mode(threading.local):
    """Per-thread dtype and grad switch, so decode worker threads cannot clobber each other."""
    dtype = np.float32
    grad = True


_MODE = _Mode()


def get_dtype():
    return _MODE.dtype


@contextlib.contextmanager
def default_dtype(dtype):
    """Create new tensors (and parameters) at ``dtype`` inside the block."""
    old, _MODE.dtype = _MODE.dtype, np.dtype(dtype).type
    try:
        yield
    finally:
        _MODE.dtype = old


@contextlib.contextmanager
def no_grad():
    old, _MODE.grad = _MODE.grad, False
    try:
        yield
    finally:
        _MODE.grad = old


def grad_enabled() -> bool:
    return _MODE.grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad=False, parents=(), backward=None, name=None):
        if isinstance(data, np.generic):
            data = np.asarray(data)
        self.data = data if isinstance(data, np.ndarray) else np.asarray(data, dtype=_MODE.dtype)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._backward = backward
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def __len__(self):
        return len(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}(shape={self.shape}, grad={self.requires_grad})"

    def backward(self, grad=None):
        if not self.requires_grad:
            raise RuntimeError("backward() on a tensor that does not require grad")
        if grad is None:
            if self.data.size != 1:
                raise ShapeError(f"backward: implicit gradient needs a scalar, got shape {self.shape}")
            grad = np.ones_like(self.data)
        order = _topo(self)
        self.grad = grad if self.grad is None else self.grad + grad
        for node in reversed(order):
            if node._backward is None:
                continue
            g = node.grad
            if g is not None:
                node._backward(g)
                node.grad = None
            # release the graph as we go; leaves keep their grads
            node._backward = None
            node._parents = ()

    # operator sugar for readable layer code
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return slice_(self, idx.start or 0, self.shape[-1] if idx.stop is None else idx.stop)
        return row(self, idx)


def _topo(root: Tensor) -> List[Tensor]:
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def _accum(t: Tensor, g: np.ndarray):
    if t.requires_grad:
        t.grad = g if t.grad is None else t.grad + g


def _track(*inputs: Tensor) -> bool:
    return _MODE.grad and any(t.requires_grad for t in inputs)


def as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=_MODE.dtype))


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _check_broadcast(op, a, b):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


# ---------------------------------------------------------------- elementwise

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a, b)
    out = a.data + b.data
    if not _track(a, b):
        return Tensor(out)

    def backward(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(g, b.shape))
    return Tensor(out, True, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a, b)
    out = a.data - b.data
    if not _track(a, b):
        return Tensor(out)

    def backward(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(-g, b.shape))
    return Tensor(out, True, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("mul", a, b)
    out = a.data * b.data
    if not _track(a, b):
        return Tensor(out)

    def backward(g):
        _accum(a, _unbroadcast(g * b.data, a.shape))
        _accum(b, _unbroadcast(g * a.data, b.shape))
    return Tensor(out, True, (a, b), backward)


def scale(a: Tensor, c: float) -> Tensor:
    out = a.data * c
    if not _track(a):
        return Tensor(out)
    return Tensor(out, True, (a,), lambda g: _accum(a, g * c))


def add_n(ts: Sequence[Tensor]) -> Tensor:
    if not ts:
        raise ShapeError("add_n: empty input")
    shape = ts[0].shape
    for t in ts:
        if t.shape != shape:
            raise ShapeError(f"add_n: shapes differ {shape} vs {t.shape}")
    out = ts[0].data.copy()
    for t in ts[1:]:
        out += t.data
    if not _track(*ts):
        return Tensor(out)

    def backward(g):
        for t in ts:
            _accum(t, g)
    return Tensor(out, True, tuple(ts), backward)


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    if not _track(a):
        return Tensor(y)
    return Tensor(y, True, (a,), lambda g: _accum(a, g * (1.0 - y * y)))


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def sigmoid(a: Tensor) -> Tensor:
    y = _sigmoid(a.data)
    if not _track(a):
        return Tensor(y)
    return Tensor(y, True, (a,), lambda g: _accum(a, g * y * (1.0 - y)))


def relu(a: Tensor) -> Tensor:
    y = np.maximum(a.data, 0)
    if not _track(a):
        return Tensor(y)
    return Tensor(y, True, (a,), lambda g: _accum(a, g * (a.data > 0)))


def dropout(a: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    if p <= 0.0:
        return a
    keep = (rng.random(a.shape) >= p).astype(a.data.dtype) / (1.0 - p)
    return mul(a, Tensor(keep))


# ---------------------------------------------------------------- linear algebra

def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim not in (1, 2) or b.ndim not in (1, 2) or a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    out = a.data @ b.data
    if not _track(a, b):
        return Tensor(out)
    ad, bd = a.data, b.data

    def backward(g):
        if a.ndim == 2 and b.ndim == 2:
            ga, gb = g @ bd.T, ad.T @ g
        elif a.ndim == 2:
            ga, gb = np.outer(g, bd), ad.T @ g
        elif b.ndim == 2:
            ga, gb = bd @ g, np.outer(ad, g)
        else:
            ga, gb = g * bd, g * ad
        _accum(a, ga)
        _accum(b, gb)
    return Tensor(out, True, (a, b), backward)


def linear(W: Tensor, x: Tensor, b: Optional[Tensor] = None) -> Tensor:
    """``W @ x + b`` for a vector ``x``; row-wise ``x @ W.T + b`` for a matrix."""
    if W.ndim != 2 or x.shape[-1] != W.shape[1] or (b is not None and b.shape != (W.shape[0],)):
        raise ShapeError(f"linear: W {W.shape}, x {x.shape}, b {None if b is None else b.shape}")
    Wd, xd = W.data, x.data
    out = Wd @ xd if x.ndim == 1 else xd @ Wd.T
    if b is not None:
        out = out + b.data
    parents = (W, x) if b is None else (W, x, b)
    if not _track(*parents):
        return Tensor(out)

    def backward(g):
        if x.ndim == 1:
            _accum(W, np.outer(g, xd))
            _accum(x, Wd.T @ g)
            if b is not None:
                _accum(b, g)
        else:
            _accum(W, g.T @ xd)
            _accum(x, g @ Wd)
            if b is not None:
                _accum(b, g.sum(axis=0))
    return Tensor(out, True, parents, backward)


# ---------------------------------------------------------------- shape ops

def concat(ts: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not ts:
        raise ShapeError("concat: empty input")
    ts = [as_tensor(t) for t in ts]
    try:
        out = np.concatenate([t.data for t in ts], axis=axis)
    except ValueError:
        raise ShapeError(f"concat: incompatible shapes {[t.shape for t in ts]}") from None
    if not _track(*ts):
        return Tensor(out)
    sizes = np.cumsum([t.shape[axis] for t in ts])[:-1]

    def backward(g):
        for t, piece in zip(ts, np.split(g, sizes, axis=axis)):
            _accum(t, piece)
    return Tensor(out, True, tuple(ts), backward)


def stack(ts: Sequence[Tensor]) -> Tensor:
    if not ts:
        raise ShapeError("stack: empty input")
    shape = ts[0].shape
    if any(t.shape != shape for t in ts):
        raise ShapeError(f"stack: shapes differ {[t.shape for t in ts]}")
    out = np.stack([t.data for t in ts])
    if not _track(*ts):
        return Tensor(out)

    def backward(g):
        for i, t in enumerate(ts):
            _accum(t, g[i])
    return Tensor(out, True, tuple(ts), backward)


def row(a: Tensor, i: int) -> Tensor:
    out = a.data[i]
    if not _track(a):
        return Tensor(out)

    def backward(g):
        full = np.zeros_like(a.data)
        full[i] = g
        _accum(a, full)
    return Tensor(out, True, (a,), backward)


def rows(a: Tensor) -> List[Tensor]:
    """Split a matrix into its row vectors with one shared backward node per row."""
    return [row(a, i) for i in range(a.shape[0])]


def slice_(a: Tensor, start: int, stop: int) -> Tensor:
    """Slice along the last axis."""
    if not 0 <= start <= stop <= a.shape[-1]:
        raise ShapeError(f"slice: [{start}:{stop}] out of range for shape {a.shape}")
    out = a.data[..., start:stop]
    if not _track(a):
        return Tensor(out)

    def backward(g):
        full = np.zeros_like(a.data)
        full[..., start:stop] = g
        _accum(a, full)
    return Tensor(out, True, (a,), backward)


def take_rows(table: Tensor, ids: Sequence[int]) -> Tensor:
    """Embedding lookup: rows of ``table`` at ``ids``."""
    ids = np.asarray(ids, dtype=np.int64)
    if table.ndim != 2 or (ids.size and (ids.min() < 0 or ids.max() >= table.shape[0])):
        raise ShapeError(f"take_rows: ids out of range for table {table.shape}")
    out = table.data[ids]
    if not _track(table):
        return Tensor(out)

    def backward(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids, g)
        _accum(table, full)
    return Tensor(out, True, (table,), backward)


def unfold(x: Tensor, width: int) -> Tensor:
    """Sliding windows over the rows of ``x`` (L, d) -> (L - width + 1, width * d)."""
    L, d = x.shape
    if L < width:
        raise ShapeError(f"unfold: length {L} shorter than window {width}")
    idx = np.arange(L - width + 1)[:, None] + np.arange(width)[None, :]
    out = x.data[idx].reshape(L - width + 1, width * d)
    if not _track(x):
        return Tensor(out)

    def backward(g):
        full = np.zeros_like(x.data)
        np.add.at(full, idx, g.reshape(L - width + 1, width, d))
        _accum(x, full)
    return Tensor(out, True, (x,), backward)


# ---------------------------------------------------------------- reductions / losses

def sum_(a: Tensor) -> Tensor:
    out = np.asarray(a.data.sum(), dtype=a.data.dtype)
    if not _track(a):
        return Tensor(out)
    return Tensor(out, True, (a,), lambda g: _accum(a, np.broadcast_to(g, a.shape).copy()))


def max_pool(a: Tensor) -> Tensor:
    """Max over the first axis of a (L, d) matrix."""
    if a.ndim != 2 or a.shape[0] == 0:
        raise ShapeError(f"max_pool: expected non-empty (L, d) matrix, got {a.shape}")
    arg = a.data.argmax(axis=0)
    cols = np.arange(a.shape[1])
    out = a.data[arg, cols]
    if not _track(a):
        return Tensor(out)

    def backward(g):
        full = np.zeros_like(a.data)
        full[arg, cols] = g
        _accum(a, full)
    return Tensor(out, True, (a,), backward)


def _mask_logits(x: np.ndarray, mask) -> np.ndarray:
    if mask is None:
        return x
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape:
        raise ShapeError(f"mask shape {mask.shape} does not match {x.shape}")
    if not mask.any():
        raise ShapeError("softmax: every entry is masked")
    return np.where(mask, x, -np.inf)


def _softmax_np(x: np.ndarray, mask=None) -> np.ndarray:
    z = _mask_logits(x, mask)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax(a: Tensor, mask=None) -> Tensor:
    """Softmax over the last axis; masked-out entries come out exactly 0."""
    y = _softmax_np(a.data, mask)
    if not _track(a):
        return Tensor(y)

    def backward(g):
        _accum(a, y * (g - (g * y).sum(axis=-1, keepdims=True)))
    return Tensor(y, True, (a,), backward)


def log_softmax(a: Tensor, mask=None) -> Tensor:
    """Log-softmax over a vector; masked entries are -inf and receive no gradient."""
    z = _mask_logits(a.data, mask)
    m = z.max()
    lse = m + np.log(np.exp(z - m).sum())
    y = z - lse
    if not _track(a):
        return Tensor(y)
    p = np.exp(y)

    def backward(g):
        gg = np.where(np.isfinite(y), g, 0.0)
        _accum(a, gg - p * gg.sum())
    return Tensor(y, True, (a,), backward)


def cross_entropy(logits: Tensor, target: int, mask=None) -> Tensor:
    """``-log softmax(logits)[target]`` with optional legality mask."""
    if logits.ndim != 1 or not 0 <= target < logits.shape[0]:
        raise ShapeError(f"cross_entropy: target {target} invalid for logits {logits.shape}")
    if mask is not None and not mask[target]:
        raise ShapeError(f"cross_entropy: target {target} is masked out")
    z = _mask_logits(logits.data, mask)
    m = z.max()
    e = np.exp(z - m)
    s = e.sum()
    out = np.asarray(m + np.log(s) - z[target], dtype=logits.data.dtype)
    if not _track(logits):
        return Tensor(out)
    p = e / s

    def backward(g):
        gl = p.copy()
        gl[target] -= 1.0
        _accum(logits, g * gl)
    return Tensor(out, True, (logits,), backward)


def l2_penalty(params: Iterable[Tensor], coeff: float) -> Tensor:
    """``coeff / 2 * sum ||theta||^2``."""
    params = list(params)
    total = sum(float(np.vdot(p.data, p.data)) for p in params)
    dtype = params[0].data.dtype if params else _MODE.dtype
    out = np.asarray(0.5 * coeff * total, dtype=dtype)
    if not _track(*params):
        return Tensor(out)

    def backward(g):
        for p in params:
            _accum(p, (g * coeff) * p.data)
    return Tensor(out, True, tuple(params), backward)


# ---------------------------------------------------------------- fused recurrent cell

def lstm_cell(x: Tensor, h: Tensor, c: Tensor, W: Tensor, b: Tensor) -> Tuple[Tensor, Tensor]:
    """One LSTM step.  ``W`` is (4H, D + H) with gate blocks (input, forget, cell, output)."""
    H = h.shape[0]
    if W.shape != (4 * H, x.shape[0] + H) or b.shape != (4 * H,) or c.shape != (H,):
        raise ShapeError(f"lstm_cell: x {x.shape}, h {h.shape}, c {c.shape}, W {W.shape}, b {b.shape}")
    xh = np.concatenate([x.data, h.data])
    z = W.data @ xh + b.data
    i = _sigmoid(z[:H])
    f = _sigmoid(z[H:2 * H])
    u = np.tanh(z[2 * H:3 * H])
    o = _sigmoid(z[3 * H:])
    c_new = f * c.data + i * u
    tc = np.tanh(c_new)
    h_new = o * tc
    hc_data = np.concatenate([h_new, c_new])
    if not _track(x, h, c, W, b):
        return Tensor(h_new), Tensor(c_new)
    D = x.shape[0]
    Wd, cd = W.data, c.data

    def backward(g):
        gh, gc = g[:H], g[H:]
        gc = gc + gh * o * (1.0 - tc * tc)
        dz = np.concatenate([
            gc * u * i * (1.0 - i),
            gc * cd * f * (1.0 - f),
            gc * i * (1.0 - u * u),
            gh * tc * o * (1.0 - o),
        ])
        _accum(W, np.outer(dz, xh))
        _accum(b, dz)
        gxh = Wd.T @ dz
        _accum(x, gxh[:D])
        _accum(h, gxh[D:])
        _accum(c, gc * f)

    hc = Tensor(hc_data, True, (x, h, c, W, b), backward)
    return slice_(hc, 0, H), slice_(hc, H, 2 * H)
