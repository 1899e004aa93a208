"""Teacher-forced training of the transition scorer with Adam and early stopping."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .data import Sentence, SrlGraph, build_vocabs
from .decoder import decode
from .embeddings import PretrainedEmbeddings
from .errors import ConfigurationError
from .evaluator import score_predicates, score_triplets
from .nn import tensor as T
from .nn.optim import Adam, clip_grad_norm
from .oracle import derive_actions
from .scorer import ACTION_INDEX, ModelConfig, TransitionSrlModel
from .transition import ARC_KINDS, ActionStep, apply, initial_state

logger = logging.getLogger(__name__)

Corpus = Sequence[Tuple[Sentence, SrlGraph]]


@dataclass
class TrainConfig:
    lr: float = 1e-5
    l2: float = 0.2
    batch_size: int = 16
    max_epochs: int = 500
    patience: int = 10
    seed: int = 0
    clip: float = 5.0
    select_metric: str = "arg_f1"
    target_score: Optional[float] = None
    eval_beam: int = 1
    min_freq: int = 1
    max_seconds: Optional[float] = None

    def __post_init__(self):
        if not 16 <= self.batch_size <= 32:
            logger.warning("batch size %d outside the usual [16, 32] range", self.batch_size)
        if self.select_metric not in ("arg_f1", "prd_f1", "mean"):
            raise ConfigurationError(f"unknown selection metric {self.select_metric!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(f"unknown training config keys: {sorted(unknown)}")
        return cls(**d)


def sentence_loss(sentence: Sentence, gold: SrlGraph, model: TransitionSrlModel,
                  actions: Optional[Sequence[ActionStep]] = None, context=None, l2: float = 0.0) -> T.Tensor:
    """Negative log-likelihood of the oracle actions (and gold roles at arc steps).

    States always follow the gold actions.  ``l2`` adds ``l2/2 * ||theta||^2``.
    """
    if actions is None:
        actions = derive_actions(sentence, gold, model.order, early_shift=model.config.early_shift)
    enc = model.encode_sentence(sentence, context)
    roles = model.vocabs.roles
    state = initial_state(sentence, model.order)
    terms = []
    for a in actions:
        is_arc = a.kind in ARC_KINDS
        sc = model.score(state, enc, need_roles=is_arc and a.role in roles)
        terms.append(T.cross_entropy(sc.action_logits, ACTION_INDEX[a.kind], sc.mask))
        if sc.role_logits is not None:
            terms.append(T.cross_entropy(sc.role_logits, roles.label_index(a.role)))
        state = apply(state, a)
    loss = T.add_n(terms)
    if l2:
        loss = loss + T.l2_penalty([p for _, p in model.store.trainable()], l2)
    return loss


def batch_loss(batch: Sequence[Tuple[Sentence, SrlGraph, Sequence[ActionStep]]], model: TransitionSrlModel,
               l2: float, contexts=None) -> T.Tensor:
    """Mean sentence NLL over the batch plus one L2 term."""
    contexts = contexts or {}
    losses = [sentence_loss(s, g, model, acts, contexts.get(s.id)) for s, g, acts in batch]
    loss = T.scale(T.add_n(losses), 1.0 / len(losses))
    if l2:
        loss = loss + T.l2_penalty([p for _, p in model.store.trainable()], l2)
    return loss


def evaluate_model(model: TransitionSrlModel, corpus: Corpus, beam: int = 1, contexts=None) -> Dict[str, float]:
    contexts = contexts or {}
    was = model.training
    model.training = False
    preds = [decode(s, model, beam, contexts.get(s.id)).graph for s, _ in corpus]
    model.training = was
    gold = [g for _, g in corpus]
    p, r, f = score_triplets(gold, preds)
    return {"arg_p": p, "arg_r": r, "arg_f1": f, "prd_f1": score_predicates(gold, preds)}


@dataclass
class TrainResult:
    model: TransitionSrlModel
    metrics: List[dict]
    best_epoch: int
    best_score: float
    stopped_early: bool
    stop_reason: str = "max_epochs"


def _selection(metrics: Dict[str, float], key: str) -> float:
    if key == "mean":
        return 0.5 * (metrics["arg_f1"] + metrics["prd_f1"])
    return metrics[key]


def train(train_corpus: Corpus, dev_corpus: Corpus, config: TrainConfig, model_config: ModelConfig,
          out_dir: Optional[str] = None, pretrained: Optional[PretrainedEmbeddings] = None, contexts=None,
          on_epoch: Optional[Callable[[dict], None]] = None) -> TrainResult:
    """Train on ``train_corpus`` and keep the parameters with the best dev score.

    Stops after ``patience`` epochs without improvement, on reaching
    ``target_score``, after ``max_epochs`` or once an epoch ends past
    ``max_seconds`` of wall time.  When ``out_dir`` is given the
    best checkpoint goes to ``out_dir/model`` and the per-epoch metrics to
    ``out_dir/metrics.jsonl``.
    """
    if not train_corpus:
        raise ConfigurationError("training corpus is empty")
    rng = np.random.default_rng(config.seed)
    vocabs = build_vocabs(train_corpus, config.min_freq)
    model = TransitionSrlModel(model_config, vocabs, pretrained=pretrained, rng=rng)
    opt = Adam(model.store, lr=config.lr)
    examples = [(s, g, derive_actions(s, g, model.order, early_shift=model_config.early_shift))
                for s, g in train_corpus]

    metrics_path = None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        metrics_path = os.path.join(out_dir, "metrics.jsonl")
        open(metrics_path, "w").close()

    log: List[dict] = []
    best_score, best_epoch, best_state = -1.0, 0, None
    reason = "max_epochs"
    started = time.perf_counter()
    for epoch in range(1, config.max_epochs + 1):
        t0 = time.perf_counter()
        model.training = True
        perm = rng.permutation(len(examples))
        total, n_batches = 0.0, 0
        for start in range(0, len(perm), config.batch_size):
            batch = [examples[i] for i in perm[start:start + config.batch_size]]
            model.store.zero_grad()
            loss = batch_loss(batch, model, config.l2, contexts)
            loss.backward()
            clip_grad_norm(model.store, config.clip)
            opt.step()
            total += loss.item()
            n_batches += 1
        model.training = False
        dev = evaluate_model(model, dev_corpus, config.eval_beam, contexts) if dev_corpus else \
            {"arg_p": 0.0, "arg_r": 0.0, "arg_f1": 0.0, "prd_f1": 0.0}
        entry = {"epoch": epoch, "loss": total / max(n_batches, 1), "dev_arg_f1": dev["arg_f1"],
                 "dev_prd_f1": dev["prd_f1"], "dev_arg_p": dev["arg_p"], "dev_arg_r": dev["arg_r"]}
        log.append(entry)
        if metrics_path:
            with open(metrics_path, "a") as f:
                f.write(json.dumps(entry, sort_keys=True) + "\n")
        if on_epoch:
            on_epoch(entry)
        logger.info({"event": "epoch", **entry, "seconds": round(time.perf_counter() - t0, 3)})

        score = _selection(dev, config.select_metric)
        if score > best_score:
            best_score, best_epoch, best_state = score, epoch, model.store.state()
            if out_dir:
                model.save(os.path.join(out_dir, "model"), extra={"epoch": epoch, "dev": dev})
        if config.target_score is not None and best_score >= config.target_score:
            reason = "target"
            break
        if epoch - best_epoch >= config.patience:
            reason = "patience"
            break
        if config.max_seconds is not None and time.perf_counter() - started >= config.max_seconds:
            reason = "time"
            break

    if best_state is not None:
        model.store.load_state(best_state)
    return TrainResult(model, log, best_epoch, best_score, reason != "max_epochs", reason)
