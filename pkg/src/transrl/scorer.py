"""Neural scorer: sentence encoder, state representation and the action/role heads.

``g_t`` concatenates projected encodings of sigma_l, sigma_r, alpha_l, alpha_r,
the predicate slot, the buffer front and the action history.  The high-order
variant adds an attention-pooled summary of argument-predicate distributions
from earlier arcs to the input of each head.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .data import Sentence, Vocabs
from .embeddings import PretrainedEmbeddings
from .errors import ConfigurationError, ContractViolation
from .nn import tensor as T
from .nn.layers import FFN, BiLSTM, CharCNN, ChildSumTreeLSTM, Embedding, Linear, StackLSTM, StackNode
from .nn.params import ParamStore, read_checkpoint, save_checkpoint
from .nn.tensor import Tensor
from .transition import ACTION_KINDS, ParsingOrder, TransitionState, inspect_target, legal_mask

N_ACTIONS = len(ACTION_KINDS)
ACTION_INDEX = {k: i for i, k in enumerate(ACTION_KINDS)}
STACKS = ("sigma_l", "sigma_r", "alpha_l", "alpha_r")


@dataclass
class ModelConfig:
    # input features
    word_dim: int = 100
    pretrained: bool = False
    pretrained_dim: int = 0
    char: bool = True
    char_dim: int = 30
    char_filters: int = 30
    char_width: int = 3
    pos: bool = True
    pos_dim: int = 50
    dep: bool = True
    tree_hidden: int = 200
    context_dim: int = 0
    # encoders
    lstm_hidden: int = 200
    lstm_layers: int = 2
    stack_hidden: int = 200
    stack_layers: int = 2
    pred_hidden: int = 200
    action_dim: int = 20
    state_dim: int = 150
    ffn_hidden: int = 150
    # high-order composition
    high_order_action: bool = True
    high_order_role: bool = True
    attn_dim: int = 100
    # transition system
    order: str = "close_first"
    early_shift: bool = True
    dropout: float = 0.0

    @property
    def high_order(self) -> bool:
        return self.high_order_action or self.high_order_role

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        if "high_order" in d:
            ho = bool(d.pop("high_order"))
            d.setdefault("high_order_action", ho)
            d.setdefault("high_order_role", ho)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(f"unknown model config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.order = ParsingOrder.parse(cfg.order).value
        return cfg

    @classmethod
    def small(cls, **overrides) -> "ModelConfig":
        """Compact dimensions for tests and quick experiments."""
        base = dict(word_dim=16, char_dim=8, char_filters=8, pos_dim=8, tree_hidden=16, lstm_hidden=16,
                    lstm_layers=1, stack_hidden=16, stack_layers=1, pred_hidden=8, action_dim=8, state_dim=16,
                    ffn_hidden=16, attn_dim=8)
        base.update(overrides)
        return cls.from_dict(base)


@dataclass
class SentenceEncoding:
    """Per-sentence cache: token states plus memoised stack/pair encodings shared by all states."""

    sentence: Sentence
    h: List[Tensor]
    x_dim: int
    stack_nodes: Dict[str, Dict[tuple, StackNode]] = field(default_factory=dict)
    proj: Dict[tuple, Tensor] = field(default_factory=dict)
    pairs: Dict[tuple, Tensor] = field(default_factory=dict)


@dataclass
class StateScores:
    g: Tensor
    action_logits: Tensor
    mask: np.ndarray
    role_logits: Optional[Tensor] = None


class TransitionSrlModel:
    def __init__(self, config: ModelConfig, vocabs: Vocabs, seed: int = 0,
                 pretrained: Optional[PretrainedEmbeddings] = None, rng: Optional[np.random.Generator] = None):
        self.config = config
        self.vocabs = vocabs
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.store = ParamStore(self.rng)
        self.training = False
        cfg = config
        if cfg.pretrained:
            if pretrained is not None:
                cfg.pretrained_dim = pretrained.dim
                cfg.word_dim = pretrained.dim
            if cfg.pretrained_dim <= 0:
                raise ConfigurationError("pretrained features enabled but no embedding file was given")
        self.n_roles = len(vocabs.roles.symbols)
        if self.n_roles == 0:
            raise ConfigurationError("role vocabulary is empty; the training corpus has no arguments")
        S = self.store

        # input representation
        init = None
        if cfg.pretrained and pretrained is not None:
            init = self._pretrained_init(pretrained, trainable=True)
        self.word_emb = Embedding(S, "input.word", len(vocabs.words), cfg.word_dim, init=init)
        dim = cfg.word_dim
        if cfg.pretrained:
            frozen = np.zeros((len(vocabs.words), cfg.pretrained_dim))
            if pretrained is not None:
                frozen = self._pretrained_init(pretrained, trainable=False)
            self.fixed_emb = Embedding(S, "input.word_fixed", len(vocabs.words), cfg.pretrained_dim,
                                       init=frozen, trainable=False)
            dim += cfg.pretrained_dim
        if cfg.char:
            self.char_cnn = CharCNN(S, "input.char", len(vocabs.chars), cfg.char_dim, cfg.char_filters,
                                    cfg.char_width)
            dim += cfg.char_filters
        if cfg.pos:
            self.pos_emb = Embedding(S, "input.pos", len(vocabs.pos), cfg.pos_dim)
            dim += cfg.pos_dim
        if cfg.dep:
            self.tree = ChildSumTreeLSTM(S, "input.tree", dim, cfg.tree_hidden)
            dim += cfg.tree_hidden
        dim += cfg.context_dim
        self.x_dim = dim

        # sentence encoder
        self.encoder = BiLSTM(S, "encoder", dim, cfg.lstm_hidden, cfg.lstm_layers)
        h_dim = self.h_dim = self.encoder.out_dim

        # state components
        self.stacks = {k: StackLSTM(S, f"state.{k}", h_dim, cfg.stack_hidden, cfg.stack_layers) for k in STACKS}
        self.action_emb = Embedding(S, "state.action_emb", len(vocabs.actions), cfg.action_dim)
        self.history = StackLSTM(S, "state.delta", cfg.action_dim, cfg.stack_hidden, cfg.stack_layers)
        self.pred_encoder = BiLSTM(S, "state.lambda", h_dim, cfg.pred_hidden, 1)
        self.pred_empty = S.vector("state.lambda.empty", 2 * cfg.pred_hidden)
        self.beta_empty = S.vector("state.beta.empty", h_dim)
        comp_dims = {"sigma_l": cfg.stack_hidden, "sigma_r": cfg.stack_hidden, "alpha_l": cfg.stack_hidden,
                     "alpha_r": cfg.stack_hidden, "lambda_p": 2 * cfg.pred_hidden, "beta": h_dim,
                     "delta": cfg.stack_hidden}
        self.component_names = list(comp_dims)
        self.project = {k: Linear(S, f"state.proj.{k}", d, cfg.state_dim) for k, d in comp_dims.items()}
        self.g_dim = cfg.state_dim * len(comp_dims)

        # heads: the first layer is split so the high-order slice has its own weights
        self.action_in = Linear(S, "action.0", self.g_dim, cfg.ffn_hidden)
        self.action_out = Linear(S, "action.1", cfg.ffn_hidden, N_ACTIONS)
        self.role_in = Linear(S, "role.0", self.g_dim, cfg.ffn_hidden)
        self.role_out = Linear(S, "role.1", cfg.ffn_hidden, self.n_roles)
        self.high = {}
        if cfg.high_order_action:
            self.high["a"] = HighOrder(S, "high.a", 2 * h_dim, cfg.ffn_hidden, N_ACTIONS, self.g_dim, cfg.attn_dim)
            self.action_high = Linear(S, "action.0.high", N_ACTIONS, cfg.ffn_hidden, bias=False)
        if cfg.high_order_role:
            self.high["r"] = HighOrder(S, "high.r", 2 * h_dim, cfg.ffn_hidden, self.n_roles, self.g_dim,
                                       cfg.attn_dim)
            self.role_high = Linear(S, "role.0.high", self.n_roles, cfg.ffn_hidden, bias=False)

    @property
    def order(self) -> ParsingOrder:
        return ParsingOrder.parse(self.config.order)

    def _pretrained_init(self, pre: PretrainedEmbeddings, trainable: bool) -> np.ndarray:
        words = self.vocabs.words
        if trainable:
            limit = np.sqrt(3.0 / pre.dim)
            table = self.rng.uniform(-limit, limit, size=(len(words), pre.dim))
        else:
            table = np.zeros((len(words), pre.dim))
        for i, w in enumerate(words.symbols, start=words.n_reserved):
            v = pre.get(w)
            if v is not None:
                table[i] = v
        return table

    # ------------------------------------------------------------------ encoding

    def input_vectors(self, sentence: Sentence, context: Optional[np.ndarray] = None) -> List[Tensor]:
        """x_i for every token: [v^w; fixed v^w; v^c; v^pos; v^syn; context]."""
        cfg, V = self.config, self.vocabs
        n = len(sentence)
        word_ids = V.words.lookup(sentence.forms)
        parts = [self.word_emb(word_ids)]
        if cfg.pretrained:
            parts.append(self.fixed_emb(word_ids))
        if cfg.char:
            parts.append(T.stack([self.char_cnn(V.chars.lookup(t.form)) for t in sentence.tokens]))
        if cfg.pos:
            parts.append(self.pos_emb(V.pos.lookup(t.pos for t in sentence.tokens)))
        base = T.concat(parts, axis=1) if len(parts) > 1 else parts[0]
        base_rows = T.rows(base)
        if cfg.dep:
            heads = sentence.heads() if sentence.has_syntax else [-1] * n
            syn = self.tree(heads, base_rows)
            rows = [T.concat([b, s]) for b, s in zip(base_rows, syn)]
        else:
            rows = base_rows
        if cfg.context_dim:
            ctx = np.zeros((n, cfg.context_dim)) if context is None else np.asarray(context)
            if ctx.shape != (n, cfg.context_dim):
                raise ConfigurationError(f"context vectors for {sentence.id!r} have shape {ctx.shape}, "
                                         f"expected {(n, cfg.context_dim)}")
            ctx = ctx.astype(self.store["encoder.l0.fwd.W"].data.dtype)
            rows = [T.concat([r, Tensor(c)]) for r, c in zip(rows, ctx)]
        if self.training and cfg.dropout > 0:
            rows = [T.dropout(r, cfg.dropout, self.rng) for r in rows]
        return rows

    def encode_sentence(self, sentence: Sentence, context: Optional[np.ndarray] = None) -> SentenceEncoding:
        if len(sentence) == 0:
            raise ContractViolation("cannot encode an empty sentence")
        xs = self.input_vectors(sentence, context)
        hs = self.encoder(xs)
        return SentenceEncoding(sentence, hs, self.x_dim, {k: {(): self.stacks[k].empty()} for k in STACKS} |
                                {"delta": {(): self.history.empty()}})

    # ------------------------------------------------------------------ state representation

    def _stack_node(self, enc: SentenceEncoding, kind: str, content: tuple) -> StackNode:
        memo = enc.stack_nodes[kind]
        node = memo.get(content)
        if node is not None:
            return node
        k = len(content) - 1
        while content[:k] not in memo:
            k -= 1
        node = memo[content[:k]]
        lstm = self.history if kind == "delta" else self.stacks[kind]
        for j in range(k, len(content)):
            item = content[j]
            x = self.action_emb([self.vocabs.actions[item]]) if kind == "delta" else enc.h[item]
            if kind == "delta":
                x = T.row(x, 0)
            node = lstm.push(node, x, item)
            memo[content[:j + 1]] = node
        return node

    def _component(self, enc: SentenceEncoding, kind: str, content) -> Tensor:
        key = (kind, content)
        r = enc.proj.get(key)
        if r is not None:
            return r
        if kind in STACKS:
            vec = self.stacks[kind].current(self._stack_node(enc, kind, content))
        elif kind == "delta":
            vec = self.history.current(self._stack_node(enc, kind, content))
        elif kind == "lambda_p":
            vec = self.pred_empty if content is None else self.pred_encoder([enc.h[content]])[0]
        else:  # beta
            vec = self.beta_empty if content is None else enc.h[content]
        r = T.tanh(self.project[kind](vec))
        enc.proj[key] = r
        return r

    def components(self, s: TransitionState, enc: SentenceEncoding) -> Dict[str, Tensor]:
        content = {
            "sigma_l": s.sigma_l, "sigma_r": s.sigma_r, "alpha_l": s.alpha_l, "alpha_r": s.alpha_r,
            "lambda_p": s.lambda_p, "beta": s.candidate, "delta": tuple(a.kind.value for a in s.delta),
        }
        return {k: self._component(enc, k, content[k]) for k in self.component_names}

    def state_repr(self, s: TransitionState, enc: SentenceEncoding) -> Tensor:
        comps = self.components(s, enc)
        g = T.concat([comps[k] for k in self.component_names])
        if self.training and self.config.dropout > 0:
            g = T.dropout(g, self.config.dropout, self.rng)
        return g

    # ------------------------------------------------------------------ high-order features

    def pair_distribution(self, enc: SentenceEncoding, tau: str, pred: int, arg: int) -> Tensor:
        """I^tau = softmax(FFN([h_arg; h_pred])) for one argument-predicate pair."""
        key = (tau, pred, arg)
        I = enc.pairs.get(key)
        if I is None:
            I = T.softmax(self.high[tau].ffn(T.concat([enc.h[arg], enc.h[pred]])))
            enc.pairs[key] = I
        return I

    def history_items(self, s: TransitionState, enc: SentenceEncoding, tau: str) -> List[Tensor]:
        items = [self.pair_distribution(enc, tau, p, a) for p, a, _ in s.arcs]
        _, target = inspect_target(s)
        if target is not None:
            items.append(self.pair_distribution(enc, tau, s.lambda_p, target))
        return items

    def high_order_feature(self, g: Tensor, history: Sequence[Tensor], tau: str) -> Tensor:
        return self.high[tau].attend(g, history)

    # ------------------------------------------------------------------ heads

    def score(self, s: TransitionState, enc: SentenceEncoding, need_roles=False) -> StateScores:
        mask = np.array(legal_mask(s))
        g = self.state_repr(s, enc)
        pre = self.action_in(g)
        if "a" in self.high:
            o = self.high_order_feature(g, self.history_items(s, enc, "a"), "a")
            pre = pre + self.action_high(o)
        logits = self.action_out(T.tanh(pre))
        out = StateScores(g, logits, mask)
        if need_roles:
            out.role_logits = self.role_logits(s, enc, g)
        return out

    def role_logits(self, s: TransitionState, enc: SentenceEncoding, g: Optional[Tensor] = None) -> Tensor:
        if g is None:
            g = self.state_repr(s, enc)
        pre = self.role_in(g)
        if "r" in self.high:
            o = self.high_order_feature(g, self.history_items(s, enc, "r"), "r")
            pre = pre + self.role_high(o)
        return self.role_out(T.tanh(pre))

    def action_probs(self, s: TransitionState, enc: SentenceEncoding) -> np.ndarray:
        """Distribution over the six action kinds; illegal kinds get exactly 0."""
        sc = self.score(s, enc)
        if not sc.mask.any():
            raise ContractViolation("no legal action")
        return T.softmax(sc.action_logits, sc.mask).data

    def role_probs(self, s: TransitionState, enc: SentenceEncoding) -> np.ndarray:
        return T.softmax(self.role_logits(s, enc)).data

    # ------------------------------------------------------------------ persistence

    def save(self, path: str, extra: Optional[dict] = None):
        save_checkpoint(path, self.store, self.config.to_dict(), self.vocabs.to_dict(), extra)

    @classmethod
    def load(cls, path: str) -> "TransitionSrlModel":
        manifest, arrays, vocabs = read_checkpoint(path)
        config = ModelConfig.from_dict(manifest["config"])
        dtypes = {np.dtype(a.dtype) for a in arrays.values()}
        dtype = dtypes.pop() if len(dtypes) == 1 else np.float32
        with T.default_dtype(dtype):
            model = cls(config, Vocabs.from_dict(vocabs), seed=0)
        model.store.load_state(arrays)
        return model

    def copy_params_from(self, other: "TransitionSrlModel", names: Optional[Sequence[str]] = None):
        for name in (names if names is not None else list(self.store)):
            if name in other.store:
                self.store[name].data = other.store[name].data.copy()


class HighOrder:
    """Pair-distribution FFN plus additive attention over a history of distributions."""

    def __init__(self, store: ParamStore, name: str, pair_dim: int, hidden: int, out_dim: int, g_dim: int,
                 attn_dim: int):
        self.ffn = FFN(store, f"{name}.ffn", [pair_dim, hidden, out_dim])
        self.W1 = Linear(store, f"{name}.W1", g_dim, attn_dim, bias=False)
        self.W2 = Linear(store, f"{name}.W2", out_dim, attn_dim, bias=False)
        self.v = store.vector(f"{name}.v", attn_dim)
        self.out_dim = out_dim

    def attention(self, g: Tensor, history: Sequence[Tensor]) -> Optional[Tensor]:
        if not history:
            return None
        M = T.stack(list(history))
        u = T.tanh(T.add(self.W2(M), self.W1(g)))
        return T.softmax(T.matmul(u, self.v))

    def attend(self, g: Tensor, history: Sequence[Tensor]) -> Tensor:
        if not history:
            return Tensor(np.zeros(self.out_dim, dtype=g.data.dtype))
        if len(history) == 1:
            return history[0]
        alpha = self.attention(g, history)
        return T.matmul(alpha, T.stack(list(history)))
