"""Transition system for end-to-end SRL.

A state is ``(sigma_l, alpha_l, lambda_p, alpha_r, sigma_r, beta, Y)`` plus the
action history.  Stacks are tuples stored bottom-to-top.  ``sigma_l`` keeps the
left context with the nearest token on top; ``sigma_r`` is pre-loaded with the
right context in reverse order so its top is the token right after the
candidate.  While a predicate sits in ``lambda_p`` the arc search pops tokens
from ``sigma_*`` into ``alpha_*``; SHIFT puts them back and consumes the
candidate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

from .data import Sentence, SrlGraph
from .errors import ContractViolation, InputError, TransitionError


class Action(str, enum.Enum):
    NO_PRD = "NO-PRD"
    PRD_GEN = "PRD-GEN"
    LEFT_ARC = "LEFT-ARC"
    RIGHT_ARC = "RIGHT-ARC"
    NO_ARC = "NO-ARC"
    SHIFT = "SHIFT"

    def __str__(self):
        return self.value


ACTION_KINDS: Tuple[Action, ...] = tuple(Action)
ARC_KINDS = frozenset({Action.LEFT_ARC, Action.RIGHT_ARC})


class ParsingOrder(str, enum.Enum):
    CLOSE_FIRST = "close_first"
    LEFT_TO_RIGHT = "left_to_right"
    RIGHT_TO_LEFT = "right_to_left"

    @classmethod
    def parse(cls, value) -> "ParsingOrder":
        if isinstance(value, cls):
            return value
        aliases = {"l2r": cls.LEFT_TO_RIGHT, "r2l": cls.RIGHT_TO_LEFT, "close-first": cls.CLOSE_FIRST}
        if value in aliases:
            return aliases[value]
        try:
            return cls(value)
        except ValueError:
            raise InputError(f"unknown parsing order {value!r}") from None


@dataclass(frozen=True)
class ActionStep:
    kind: Action
    role: Optional[str] = None

    def __post_init__(self):
        kind = Action(self.kind)
        object.__setattr__(self, "kind", kind)
        if (kind in ARC_KINDS) != (self.role is not None):
            raise InputError(f"{kind}: role must be given exactly for arc actions (got {self.role!r})")

    def __str__(self):
        return f"{self.kind.value}({self.role})" if self.role is not None else self.kind.value

    @classmethod
    def parse(cls, text: str) -> "ActionStep":
        text = text.strip()
        if text.endswith(")") and "(" in text:
            kind, role = text[:-1].split("(", 1)
            return cls(Action(kind), role)
        return cls(Action(text))


NO_PRD = ActionStep(Action.NO_PRD)
PRD_GEN = ActionStep(Action.PRD_GEN)
NO_ARC = ActionStep(Action.NO_ARC)
SHIFT = ActionStep(Action.SHIFT)


def left_arc(role: str) -> ActionStep:
    return ActionStep(Action.LEFT_ARC, role)


def right_arc(role: str) -> ActionStep:
    return ActionStep(Action.RIGHT_ARC, role)


@dataclass(frozen=True)
class TransitionState:
    sigma_l: Tuple[int, ...]
    alpha_l: Tuple[int, ...]
    lambda_p: Optional[int]
    alpha_r: Tuple[int, ...]
    sigma_r: Tuple[int, ...]
    beta: Tuple[int, ...]
    arcs: Tuple[Tuple[int, int, str], ...] = ()
    predicates: Tuple[int, ...] = ()
    delta: Tuple[ActionStep, ...] = ()
    order: ParsingOrder = ParsingOrder.CLOSE_FIRST

    @property
    def Y(self) -> SrlGraph:
        return SrlGraph.from_triplets(self.arcs, self.predicates)

    @property
    def candidate(self) -> Optional[int]:
        return self.beta[0] if self.beta else None


def initial_state(sentence: Sentence, order=ParsingOrder.CLOSE_FIRST) -> TransitionState:
    n = len(sentence)
    if n == 0:
        raise InputError("cannot build a transition state for an empty sentence")
    return TransitionState(
        sigma_l=(),
        alpha_l=(),
        lambda_p=None,
        alpha_r=(),
        sigma_r=tuple(range(n - 1, 0, -1)),
        beta=tuple(range(n)),
        order=ParsingOrder.parse(order),
    )


def is_terminal(s: TransitionState) -> bool:
    return not s.beta and s.lambda_p is None


def inspect_target(s: TransitionState) -> Tuple[Optional[str], Optional[int]]:
    """Return ``(side, token)`` the next arc decision looks at, or ``(None, None)``.

    close_first picks whichever stack top is nearer to the predicate (ties go
    left).  left_to_right walks the left context from its far end and then the
    right context from near to far; right_to_left mirrors it.
    """
    p = s.lambda_p
    if p is None:
        return None, None
    sl, sr = s.sigma_l, s.sigma_r
    if s.order is ParsingOrder.CLOSE_FIRST:
        if sl and sr:
            if p - sl[-1] <= sr[-1] - p:
                return "left", sl[-1]
            return "right", sr[-1]
        if sl:
            return "left", sl[-1]
        if sr:
            return "right", sr[-1]
        return None, None
    if s.order is ParsingOrder.LEFT_TO_RIGHT:
        if sl:
            return "left", sl[0]
        if sr:
            return "right", sr[-1]
        return None, None
    if sr:
        return "right", sr[0]
    if sl:
        return "left", sl[-1]
    return None, None


def side_schedule(s: TransitionState) -> Optional[str]:
    return inspect_target(s)[0]


def legal_actions(s: TransitionState) -> frozenset:
    if is_terminal(s):
        raise ContractViolation("legal_actions called on a terminal state")
    if s.lambda_p is None:
        return frozenset({Action.NO_PRD, Action.PRD_GEN})
    side = side_schedule(s)
    if side == "left":
        return frozenset({Action.LEFT_ARC, Action.NO_ARC, Action.SHIFT})
    if side == "right":
        return frozenset({Action.RIGHT_ARC, Action.NO_ARC, Action.SHIFT})
    return frozenset({Action.SHIFT})


def legal_mask(s: TransitionState) -> List[bool]:
    legal = legal_actions(s)
    return [k in legal for k in ACTION_KINDS]


def _remove(stack: Tuple[int, ...], token: int) -> Tuple[int, ...]:
    if stack and stack[-1] == token:
        return stack[:-1]
    if stack and stack[0] == token:
        return stack[1:]
    raise ContractViolation(f"token {token} is not at either end of {stack}")


def apply(s: TransitionState, a: ActionStep) -> TransitionState:
    kind = a.kind
    delta = s.delta + (a,)
    if is_terminal(s):
        raise TransitionError(f"{a} applied to a terminal state", constraint="terminal")

    if kind in (Action.NO_PRD, Action.PRD_GEN):
        if s.lambda_p is not None:
            raise TransitionError(
                f"{a} while predicate {s.lambda_p} is still open; only arc actions or SHIFT may follow PRD-GEN",
                constraint="predicate-open")
        w = s.beta[0]
        if kind is Action.PRD_GEN:
            return replace(s, lambda_p=w, predicates=s.predicates + (w,), delta=delta)
        return replace(s, beta=s.beta[1:], sigma_l=s.sigma_l + (w,), sigma_r=s.sigma_r[:-1], delta=delta)

    if s.lambda_p is None:
        raise TransitionError(f"{a} requires a predicate; *-ARC, NO-ARC and SHIFT must start by a PRD-GEN action",
                              constraint="needs-predicate")

    if kind is Action.SHIFT:
        sigma_l = tuple(sorted(s.sigma_l + s.alpha_l))
        sigma_r = tuple(sorted(s.sigma_r + s.alpha_r, reverse=True))
        w = s.beta[0]
        return replace(s, sigma_l=sigma_l + (w,), alpha_l=(), lambda_p=None, alpha_r=(),
                       sigma_r=sigma_r[:-1], beta=s.beta[1:], delta=delta)

    side, token = inspect_target(s)
    if side is None:
        raise TransitionError(f"{a}: both context stacks are exhausted; only SHIFT is legal",
                              constraint="nothing-to-inspect")
    if kind is Action.LEFT_ARC and side != "left":
        raise TransitionError(f"{a}: the schedule inspects the right stack", constraint="side-schedule")
    if kind is Action.RIGHT_ARC and side != "right":
        raise TransitionError(f"{a}: the schedule inspects the left stack", constraint="side-schedule")
    arcs = s.arcs + ((s.lambda_p, token, a.role),) if kind in ARC_KINDS else s.arcs
    if side == "left":
        return replace(s, sigma_l=_remove(s.sigma_l, token), alpha_l=s.alpha_l + (token,), arcs=arcs, delta=delta)
    return replace(s, sigma_r=_remove(s.sigma_r, token), alpha_r=s.alpha_r + (token,), arcs=arcs, delta=delta)


def run(sentence: Sentence, actions: Iterable[ActionStep], order=ParsingOrder.CLOSE_FIRST) -> List[TransitionState]:
    """Apply ``actions`` from the initial state; returns every visited state."""
    states = [initial_state(sentence, order)]
    for t, a in enumerate(actions):
        try:
            states.append(apply(states[-1], a))
        except TransitionError as e:
            raise TransitionError(str(e), constraint=e.constraint, step=t) from None
    return states


def check_invariants(s: TransitionState, n: int) -> None:
    """Raise ContractViolation if ``s`` breaks a structural invariant."""
    left = s.sigma_l + s.alpha_l + ((s.lambda_p,) if s.lambda_p is not None else ())
    right = s.sigma_r + s.alpha_r
    if len(set(left)) != len(left):
        raise ContractViolation(f"duplicate index on the left side: {left}")
    if len(set(right)) != len(right):
        raise ContractViolation(f"duplicate index on the right side: {right}")
    if any(not 0 <= i < n for i in left + right + s.beta):
        raise ContractViolation("index out of range")
    if s.lambda_p is None:
        if s.alpha_l or s.alpha_r:
            raise ContractViolation("alpha stacks must be empty without a predicate")
        if s.sigma_r != tuple(reversed(s.beta[1:])):
            raise ContractViolation(f"sigma_r {s.sigma_r} does not mirror beta {s.beta}")
        if sorted(s.sigma_l + s.beta) != list(range(n)):
            raise ContractViolation("sigma_l and beta do not partition the sentence")
    else:
        if not s.beta or s.beta[0] != s.lambda_p:
            raise ContractViolation("predicate must be the buffer front")
        p = s.lambda_p
        if any(i >= p for i in s.sigma_l + s.alpha_l) or any(i <= p for i in right):
            raise ContractViolation("context stacks hold tokens on the wrong side")
    preds = set(s.predicates)
    if any(p not in preds for p, _, _ in s.arcs):
        raise ContractViolation("arc from a token that was never PRD-GEN'd")


def format_trace(sentence: Sentence, states: Sequence[TransitionState], actions: Sequence[ActionStep],
                 scores: Optional[Sequence[float]] = None) -> str:
    """One line per step: step, action, side, candidate, stack tops, Y delta (and log-prob)."""
    forms = sentence.forms

    def tok(i):
        return "-" if i is None else f"{i}:{forms[i]}"

    def top(stack):
        return tok(stack[-1]) if stack else "-"

    header = ["step", "action", "side", "cand", "pred", "sigma_l", "alpha_l", "alpha_r", "sigma_r", "Y+"]
    if scores is not None:
        header.append("logp")
    rows = [header]
    for t, (s, a) in enumerate(zip(states, actions)):
        side, _ = inspect_target(s)
        if a.kind in ARC_KINDS:
            y = f"({tok(s.lambda_p)},{tok(inspect_target(s)[1])},{a.role})"
        else:
            y = "-"
        row = [str(t + 1), str(a), side or "-", tok(s.candidate), tok(s.lambda_p), top(s.sigma_l),
               top(s.alpha_l), top(s.alpha_r), top(s.sigma_r), y]
        if scores is not None:
            row.append(f"{scores[t]:.4f}")
        rows.append(row)
    return "\n".join("\t".join(r) for r in rows)
