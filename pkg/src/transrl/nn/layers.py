"""Layers built on the autodiff core: FFN, embeddings, char-CNN, LSTMs, Stack-LSTM, TreeLSTM."""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ContractViolation, InputError, ShapeError
from . import tensor as T
from .params import ParamStore
from .tensor import Tensor


class Linear:
    def __init__(self, store: ParamStore, name: str, in_dim: int, out_dim: int, bias=True):
        self.W = store.matrix(f"{name}.W", out_dim, in_dim)
        self.b = store.bias(f"{name}.b", out_dim) if bias else None
        self.in_dim, self.out_dim = in_dim, out_dim

    def __call__(self, x: Tensor) -> Tensor:
        return T.linear(self.W, x, self.b)


class FFN:
    """Stack of linear layers with tanh between them (none after the last)."""

    def __init__(self, store: ParamStore, name: str, dims: Sequence[int]):
        self.layers = [Linear(store, f"{name}.{i}", a, b) for i, (a, b) in enumerate(zip(dims[:-1], dims[1:]))]

    def __call__(self, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = T.tanh(x)
        return x

    @property
    def first(self) -> Linear:
        return self.layers[0]

    @property
    def last(self) -> Linear:
        return self.layers[-1]


class Embedding:
    def __init__(self, store: ParamStore, name: str, num: int, dim: int, init=None, trainable=True):
        self.table = store.embedding(name, num, dim, init=init, trainable=trainable)
        self.num, self.dim = num, dim

    def __call__(self, ids: Sequence[int]) -> Tensor:
        ids = [i if 0 <= i < self.num else 1 for i in ids]  # out of range -> UNK
        return T.take_rows(self.table, ids)


class CharCNN:
    """Character embeddings, one convolution of ``width`` with tanh, max-pool over positions."""

    def __init__(self, store: ParamStore, name: str, n_chars: int, char_dim=30, filters=30, width=3):
        self.emb = Embedding(store, f"{name}.emb", n_chars, char_dim)
        self.conv = Linear(store, f"{name}.conv", width * char_dim, filters)
        self.width = width
        self.out_dim = filters

    def __call__(self, char_ids: Sequence[int]) -> Tensor:
        pad = self.width // 2
        ids = [0] * pad + list(char_ids) + [0] * pad
        if len(ids) < self.width:
            ids += [0] * (self.width - len(ids))
        x = self.emb(ids)
        windows = T.unfold(x, self.width)
        return T.max_pool(T.tanh(self.conv(windows)))


class LSTMCell:
    def __init__(self, store: ParamStore, name: str, in_dim: int, hidden: int):
        self.W = store.matrix(f"{name}.W", 4 * hidden, in_dim + hidden)
        b = np.zeros(4 * hidden)
        b[hidden:2 * hidden] = 1.0  # forget gate
        self.b = store.add(f"{name}.b", b)
        self.in_dim, self.hidden = in_dim, hidden

    def zero_state(self) -> Tuple[Tensor, Tensor]:
        z = np.zeros(self.hidden, dtype=self.W.data.dtype)
        return Tensor(z), Tensor(z)

    def __call__(self, x: Tensor, h: Tensor, c: Tensor) -> Tuple[Tensor, Tensor]:
        return T.lstm_cell(x, h, c, self.W, self.b)


def lstm_step(cell: LSTMCell, prev_h: Tensor, prev_c: Tensor, x: Tensor) -> Tuple[Tensor, Tensor]:
    return cell(x, prev_h, prev_c)


class LSTM:
    """Unidirectional multi-layer LSTM over a sequence of vectors."""

    def __init__(self, store: ParamStore, name: str, in_dim: int, hidden: int, layers=1):
        self.cells = [LSTMCell(store, f"{name}.l{i}", in_dim if i == 0 else hidden, hidden) for i in range(layers)]
        self.hidden = hidden

    def __call__(self, xs: Sequence[Tensor]) -> List[Tensor]:
        if not xs:
            raise ShapeError("LSTM: empty sequence")
        seq = list(xs)
        for cell in self.cells:
            h, c = cell.zero_state()
            out = []
            for x in seq:
                h, c = cell(x, h, c)
                out.append(h)
            seq = out
        return seq


class BiLSTM:
    """Stacked bidirectional LSTM; each layer reads the concatenated outputs of the one below."""

    def __init__(self, store: ParamStore, name: str, in_dim: int, hidden: int, layers=2):
        self.fwd, self.bwd = [], []
        for i in range(layers):
            d = in_dim if i == 0 else 2 * hidden
            self.fwd.append(LSTMCell(store, f"{name}.l{i}.fwd", d, hidden))
            self.bwd.append(LSTMCell(store, f"{name}.l{i}.bwd", d, hidden))
        self.hidden = hidden
        self.out_dim = 2 * hidden

    def __call__(self, xs: Sequence[Tensor]) -> List[Tensor]:
        if not xs:
            raise ShapeError("BiLSTM: empty sequence")
        seq = list(xs)
        n = len(seq)
        for f_cell, b_cell in zip(self.fwd, self.bwd):
            h, c = f_cell.zero_state()
            fwd = []
            for x in seq:
                h, c = f_cell(x, h, c)
                fwd.append(h)
            h, c = b_cell.zero_state()
            bwd = [None] * n
            for i in range(n - 1, -1, -1):
                h, c = b_cell(seq[i], h, c)
                bwd[i] = h
            seq = [T.concat([a, b]) for a, b in zip(fwd, bwd)]
        return seq


def bilstm(layer: BiLSTM, sequence: Sequence[Tensor]) -> List[Tensor]:
    return layer(sequence)


class StackNode:
    """Immutable Stack-LSTM state; ``parent`` is the state before the last push."""

    __slots__ = ("parent", "states", "item", "size")

    def __init__(self, parent, states, item, size):
        self.parent = parent
        self.states = states
        self.item = item
        self.size = size


class StackLSTM:
    """Stack encoder with constant-time pop: popping returns the pre-push node.

    Nodes are persistent, so forked decoder hypotheses share common prefixes.
    An empty stack exposes a learned vector instead of the recurrent state.
    """

    def __init__(self, store: ParamStore, name: str, in_dim: int, hidden: int, layers=2):
        self.cells = [LSTMCell(store, f"{name}.l{i}", in_dim if i == 0 else hidden, hidden) for i in range(layers)]
        self.empty_vec = store.vector(f"{name}.empty", hidden)
        self.hidden = hidden

    def empty(self) -> StackNode:
        return StackNode(None, tuple(c.zero_state() for c in self.cells), None, 0)

    def push(self, node: StackNode, x: Tensor, item=None) -> StackNode:
        states = []
        inp = x
        for cell, (h, c) in zip(self.cells, node.states):
            h, c = cell(inp, h, c)
            states.append((h, c))
            inp = h
        return StackNode(node, tuple(states), item, node.size + 1)

    def pop(self, node: StackNode) -> StackNode:
        if node.size == 0:
            raise ContractViolation("pop from an empty stack")
        return node.parent

    def current(self, node: StackNode) -> Tensor:
        return self.empty_vec if node.size == 0 else node.states[-1][0]


class StackEncoder:
    """Mutable push/pop/current facade over :class:`StackLSTM`."""

    def __init__(self, lstm: StackLSTM):
        self.lstm = lstm
        self.node = lstm.empty()

    def push(self, x: Tensor, item=None):
        self.node = self.lstm.push(self.node, x, item)

    def pop(self):
        item = self.node.item
        self.node = self.lstm.pop(self.node)
        return item

    def current(self) -> Tensor:
        return self.lstm.current(self.node)

    def __len__(self):
        return self.node.size


class ChildSumTreeLSTM:
    """Child-sum TreeLSTM; each node reads its own input and the sum of its children's states."""

    def __init__(self, store: ParamStore, name: str, in_dim: int, hidden: int):
        self.W_iou = Linear(store, f"{name}.W_iou", in_dim, 3 * hidden)
        self.U_iou = Linear(store, f"{name}.U_iou", hidden, 3 * hidden, bias=False)
        self.W_f = Linear(store, f"{name}.W_f", in_dim, hidden)
        self.U_f = Linear(store, f"{name}.U_f", hidden, hidden, bias=False)
        self.W_f.b.data[:] = 1.0
        self.hidden = hidden

    def node(self, x: Tensor, children: Sequence[Tuple[Tensor, Tensor]]) -> Tuple[Tensor, Tensor]:
        H = self.hidden
        iou = self.W_iou(x)
        if children:
            h_sum = T.add_n([h for h, _ in children])
            iou = iou + self.U_iou(h_sum)
        i = T.sigmoid(T.slice_(iou, 0, H))
        o = T.sigmoid(T.slice_(iou, H, 2 * H))
        u = T.tanh(T.slice_(iou, 2 * H, 3 * H))
        c = i * u
        if children:
            wf = self.W_f(x)
            c = T.add_n([c] + [T.sigmoid(wf + self.U_f(hk)) * ck for hk, ck in children])
        h = o * T.tanh(c)
        return h, c

    def __call__(self, heads: Sequence[int], inputs: Sequence[Tensor]) -> List[Tensor]:
        """``heads[i]`` is the parent of node i or -1 for a root; returns h per node."""
        n = len(heads)
        if len(inputs) != n:
            raise ShapeError(f"TreeLSTM: {n} heads but {len(inputs)} inputs")
        order = tree_postorder(heads)
        children: List[List[int]] = [[] for _ in range(n)]
        for i, h in enumerate(heads):
            if h >= 0:
                children[h].append(i)
        states: List[Optional[Tuple[Tensor, Tensor]]] = [None] * n
        for i in order:
            states[i] = self.node(inputs[i], [states[k] for k in children[i]])
        return [s[0] for s in states]


def tree_postorder(heads: Sequence[int]) -> List[int]:
    """Children-before-parent order; raises on cycles or out-of-range heads."""
    n = len(heads)
    children: List[List[int]] = [[] for _ in range(n)]
    roots = []
    for i, h in enumerate(heads):
        if h is None or h < 0:
            roots.append(i)
        elif h >= n or h == i:
            raise InputError(f"invalid head {h} for node {i}")
        else:
            children[h].append(i)
    order = []
    stack = [(r, False) for r in reversed(roots)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        stack.append((node, True))
        for ch in reversed(children[node]):
            stack.append((ch, False))
    if len(order) != n:
        raise InputError("dependency heads contain a cycle")
    return order


def tree_lstm(layer: ChildSumTreeLSTM, heads: Sequence[int], leaf_inputs: Sequence[Tensor]) -> List[Tensor]:
    return layer(heads, leaf_inputs)


def char_cnn(layer: CharCNN, word: Sequence[int]) -> Tensor:
    return layer(word)
