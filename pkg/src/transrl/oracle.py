"""Static oracle: gold graphs to action sequences and back."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .data import Sentence, SrlGraph
from .errors import InputError, TransitionError
from .transition import (NO_ARC, NO_PRD, PRD_GEN, SHIFT, ActionStep, ParsingOrder, apply, initial_state,
                         inspect_target, is_terminal, left_arc, right_arc)


def derive_actions(sentence: Sentence, gold: SrlGraph, order=ParsingOrder.CLOSE_FIRST,
                   early_shift: bool = True) -> List[ActionStep]:
    """Canonical action sequence that rebuilds ``gold`` under ``order``.

    With ``early_shift`` the arc search stops as soon as no gold argument is
    left to visit; otherwise it keeps emitting NO-ARC until both context
    stacks are exhausted.
    """
    n = len(sentence)
    gold.validate_for(n, sentence.id)
    roles = {}
    for p, a, r in gold.triplets:
        roles.setdefault(p, {})[a] = r
    predicates = gold.predicates

    state = initial_state(sentence, order)
    actions: List[ActionStep] = []

    def step(a):
        nonlocal state
        state = apply(state, a)
        actions.append(a)

    while not is_terminal(state):
        w = state.beta[0]
        if w not in predicates:
            step(NO_PRD)
            continue
        step(PRD_GEN)
        pending = dict(roles.get(w, {}))
        while True:
            side, tok = inspect_target(state)
            if side is None or (early_shift and not pending):
                break
            if tok in pending:
                role = pending.pop(tok)
                step(left_arc(role) if side == "left" else right_arc(role))
            else:
                step(NO_ARC)
        step(SHIFT)
    return actions


def replay(sentence: Sentence, actions: Sequence[ActionStep], order=ParsingOrder.CLOSE_FIRST) -> SrlGraph:
    state = initial_state(sentence, order)
    for t, a in enumerate(actions):
        try:
            state = apply(state, a)
        except TransitionError as e:
            raise TransitionError(str(e), constraint=e.constraint, step=t) from None
    if not is_terminal(state):
        raise TransitionError(f"action sequence ends before the sentence is consumed "
                              f"({len(state.beta)} tokens left in the buffer)", constraint="incomplete",
                              step=len(actions))
    return state.Y


def action_bound(n: int, k: int) -> int:
    return n + k * (n + 1)


@dataclass
class RoundtripReport:
    checked: int = 0
    failed: int = 0
    first_failure: Optional[str] = None
    errors: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def __str__(self):
        s = f"checked={self.checked} failed={self.failed}"
        if self.first_failure is not None:
            s += f" first_failure={self.first_failure}"
        return s


def roundtrip_check(corpus: Iterable[Tuple[Sentence, SrlGraph]], order=ParsingOrder.CLOSE_FIRST,
                    early_shift: bool = True) -> RoundtripReport:
    report = RoundtripReport()
    errors = []
    for i, (sent, gold) in enumerate(corpus):
        report.checked += 1
        sid = sent.id or str(i)
        try:
            acts = derive_actions(sent, gold, order, early_shift=early_shift)
            ok = replay(sent, acts, order) == gold and len(acts) <= action_bound(len(sent), len(gold.predicates))
            msg = None if ok else f"{sid}: replay mismatch"
        except (InputError, TransitionError) as e:
            ok, msg = False, f"{sid}: {e}"
        if not ok:
            report.failed += 1
            errors.append(msg)
            if report.first_failure is None:
                report.first_failure = sid
    report.errors = tuple(errors)
    return report
