"""Greedy and beam-search decoding with legality masking and synchronized role labeling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .data import Sentence, SrlGraph
from .errors import ConfigurationError, ContractViolation
from .nn import tensor as T
from .nn.tensor import default_dtype, get_dtype, no_grad
from .scorer import ACTION_INDEX, SentenceEncoding, TransitionSrlModel
from .transition import (ACTION_KINDS, ARC_KINDS, ActionStep, TransitionState, apply, format_trace,
                         initial_state, is_terminal, legal_actions)


@dataclass(frozen=True)
class TraceStep:
    state: TransitionState
    action: ActionStep
    logp: float


@dataclass(frozen=True)
class Hypothesis:
    state: TransitionState
    score: float = 0.0
    steps: Tuple[TraceStep, ...] = ()

    @property
    def history(self) -> Tuple[Tuple[int, int], ...]:
        """Argument-predicate pairs of past arcs, the source of high-order features."""
        return tuple((p, a) for p, a, _ in self.state.arcs)

    @property
    def finished(self) -> bool:
        return is_terminal(self.state)


@dataclass
class DecodeResult:
    graph: SrlGraph
    score: float
    trace: List[TraceStep]

    def format(self, sentence: Sentence) -> str:
        return format_trace(sentence, [t.state for t in self.trace], [t.action for t in self.trace],
                            [t.logp for t in self.trace])


def _log_softmax(logits: np.ndarray, mask=None) -> np.ndarray:
    return T.log_softmax(T.Tensor(logits), mask).data


def _candidates(model: TransitionSrlModel, enc: SentenceEncoding, hyp: Hypothesis,
                expand_roles: bool, include_roles: bool) -> List[Tuple[float, ActionStep, float]]:
    """Scored continuations of ``hyp`` in action-kind order: (new score, action, step log-prob)."""
    s = hyp.state
    legal = legal_actions(s)
    arc_legal = bool(legal & ARC_KINDS)
    sc = model.score(s, enc, need_roles=arc_legal)
    logp_a = _log_softmax(sc.action_logits.data, sc.mask)
    role_lp = _log_softmax(sc.role_logits.data) if arc_legal else None
    out = []
    for kind in ACTION_KINDS:
        if kind not in legal:
            continue
        la = float(logp_a[ACTION_INDEX[kind]])
        if kind in ARC_KINDS:
            if expand_roles:
                role_ids = range(len(role_lp))
            else:
                role_ids = [int(np.argmax(role_lp))]
            for r in role_ids:
                lr = float(role_lp[r]) if include_roles else 0.0
                step_lp = la + lr
                out.append((hyp.score + step_lp, ActionStep(kind, model.vocabs.roles.label(r)), step_lp))
        else:
            out.append((hyp.score + la, ActionStep(kind), la))
    return out


def _extend(hyp: Hypothesis, action: ActionStep, score: float, step_lp: float) -> Hypothesis:
    return Hypothesis(apply(hyp.state, action), score, hyp.steps + (TraceStep(hyp.state, action, step_lp),))


def _greedy_hypothesis(model: TransitionSrlModel, enc: SentenceEncoding, sentence: Sentence,
                       expand_roles: bool, include_roles: bool) -> Hypothesis:
    hyp = Hypothesis(initial_state(sentence, model.order))
    while not hyp.finished:
        cands = _candidates(model, enc, hyp, expand_roles, include_roles)
        best = max(range(len(cands)), key=lambda i: (cands[i][0], -i))
        score, action, lp = cands[best]
        hyp = _extend(hyp, action, score, lp)
    return hyp


def decode_greedy(sentence: Sentence, model: TransitionSrlModel, context=None, include_roles: bool = True,
                  enc: Optional[SentenceEncoding] = None) -> DecodeResult:
    with no_grad():
        enc = enc or model.encode_sentence(sentence, context)
        hyp = _greedy_hypothesis(model, enc, sentence, False, include_roles)
    return DecodeResult(hyp.state.Y, hyp.score, list(hyp.steps))


def decode_beam(sentence: Sentence, model: TransitionSrlModel, beam: int = 32, context=None,
                expand_roles: bool = False, include_roles: bool = True,
                enc: Optional[SentenceEncoding] = None) -> DecodeResult:
    """Step-synchronous beam search.

    Every live hypothesis is expanded by one transition, the pool is cut to
    ``beam`` (stable sort, so ties keep insertion order) and hypotheses that
    reach a terminal state are set aside.  The best finished hypothesis wins.

    Pruning can drop the greedy path, so for ``beam > 1`` the greedy result
    also competes at the end; the returned score is never below greedy.
    """
    if beam < 1:
        raise ConfigurationError(f"beam width must be >= 1, got {beam}")
    with no_grad():
        enc = enc or model.encode_sentence(sentence, context)
        live = [Hypothesis(initial_state(sentence, model.order))]
        finished: List[Hypothesis] = []
        while live:
            pool = []
            for hyp in live:
                for score, action, lp in _candidates(model, enc, hyp, expand_roles, include_roles):
                    pool.append((score, hyp, action, lp))
            order = sorted(range(len(pool)), key=lambda i: -pool[i][0])[:beam]
            live = []
            for i in order:
                score, hyp, action, lp = pool[i]
                new = _extend(hyp, action, score, lp)
                (finished if new.finished else live).append(new)
        if not finished:
            raise ContractViolation("beam search ended without a finished hypothesis")
        if beam > 1:
            finished.append(_greedy_hypothesis(model, enc, sentence, expand_roles, include_roles))
        best = max(range(len(finished)), key=lambda i: (finished[i].score, -i))
        hyp = finished[best]
    return DecodeResult(hyp.state.Y, hyp.score, list(hyp.steps))


def decode(sentence: Sentence, model: TransitionSrlModel, beam: int = 1, context=None, **kw) -> DecodeResult:
    if beam == 1 and not kw.get("expand_roles"):
        kw.pop("expand_roles", None)
        return decode_greedy(sentence, model, context, **kw)
    return decode_beam(sentence, model, beam, context, **kw)


def decode_corpus(sentences: Sequence[Sentence], model: TransitionSrlModel, beam: int = 1, contexts=None,
                  workers: int = 1) -> List[DecodeResult]:
    contexts = contexts or {}

    def one(s):
        return decode(s, model, beam, contexts.get(s.id))

    if workers <= 1:
        return [one(s) for s in sentences]
    dtype = get_dtype()

    def pooled(s):
        with default_dtype(dtype):
            return one(s)

    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(pooled, sentences))
