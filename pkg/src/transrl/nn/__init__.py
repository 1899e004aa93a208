"""Minimal differentiable-computation core."""

from .layers import (FFN, BiLSTM, CharCNN, ChildSumTreeLSTM, Embedding, Linear, LSTM, LSTMCell, StackEncoder,
                     StackLSTM, bilstm, char_cnn, lstm_step, tree_lstm)
from .optim import Adam, adam_step, clip_grad_norm
from .params import ParamStore, read_checkpoint, save_checkpoint
from .tensor import Tensor, default_dtype, get_dtype, no_grad

__all__ = [
    "Adam", "BiLSTM", "CharCNN", "ChildSumTreeLSTM", "Embedding", "FFN", "LSTM", "LSTMCell", "Linear",
    "ParamStore", "StackEncoder", "StackLSTM", "Tensor", "adam_step", "bilstm", "char_cnn", "clip_grad_norm",
    "default_dtype", "get_dtype", "lstm_step", "no_grad", "read_checkpoint", "save_checkpoint", "tree_lstm",
]
