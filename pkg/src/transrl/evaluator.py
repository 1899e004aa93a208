"""Scoring decoded graphs against gold: triplet and predicate F1, distance buckets, role violations, speed."""

from __future__ import annotations

import re
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .data import Sentence, SrlGraph, graph_to_frames
from .errors import InputError

BUCKETS = ("1", "2", "3", "4", "5", "6", ">=7")
CORE_ROLE = re.compile(r"^(A[0-5]|AA)$")


def prf(tp: int, fp: int, fn: int) -> Tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def _as_list(graphs) -> List[SrlGraph]:
    return [graphs] if isinstance(graphs, SrlGraph) else list(graphs)


def _align(gold, pred, gold_ids=None, pred_ids=None):
    gold, pred = _as_list(gold), _as_list(pred)
    if len(gold) != len(pred):
        raise InputError(f"gold has {len(gold)} sentences but prediction has {len(pred)}")
    if gold_ids is not None and pred_ids is not None:
        for i, (a, b) in enumerate(zip(gold_ids, pred_ids)):
            if a != b:
                raise InputError(f"sentence {i}: gold id {a!r} does not match predicted id {b!r}")
    return gold, pred


def triplet_counts(gold, pred) -> Tuple[int, int, int]:
    tp = fp = fn = 0
    for g, p in zip(*_align(gold, pred)):
        hit = len(g.triplets & p.triplets)
        tp += hit
        fp += len(p.triplets) - hit
        fn += len(g.triplets) - hit
    return tp, fp, fn


def score_triplets(gold, pred, gold_ids=None, pred_ids=None) -> Tuple[float, float, float]:
    """Labeled P/R/F1: a triplet counts only if predicate, argument and role all match."""
    gold, pred = _align(gold, pred, gold_ids, pred_ids)
    return prf(*triplet_counts(gold, pred))


def score_predicates(gold, pred) -> float:
    return predicate_prf(gold, pred)[2]


def predicate_prf(gold, pred) -> Tuple[float, float, float]:
    tp = fp = fn = 0
    for g, p in zip(*_align(gold, pred)):
        hit = len(g.predicates & p.predicates)
        tp += hit
        fp += len(p.predicates) - hit
        fn += len(g.predicates) - hit
    return prf(tp, fp, fn)


def bucket_of(distance: int) -> str:
    return str(distance) if distance < 7 else ">=7"


def distance_counts(gold, pred) -> Dict[str, List[int]]:
    counts = {b: [0, 0, 0] for b in BUCKETS}
    for g, p in zip(*_align(gold, pred)):
        for t in g.triplets:
            counts[bucket_of(abs(t[1] - t[0]))][0 if t in p.triplets else 2] += 1
        for t in p.triplets - g.triplets:
            counts[bucket_of(abs(t[1] - t[0]))][1] += 1
    return counts


def distance_buckets(gold, pred) -> Dict[str, float]:
    """F1 per |argument - predicate| bucket (1..6 and >=7); empty buckets report 0."""
    return {b: prf(*c)[2] for b, c in distance_counts(gold, pred).items()}


def _base(role: str) -> str:
    return role[2:]


def frame_violations(frame: Sequence[Tuple[int, str]]) -> Tuple[int, int, int]:
    """(U, C, R) for one predicate frame given as (argument index, role) pairs."""
    u = c = r = 0
    seen_core: Dict[str, int] = {}
    for _, role in frame:
        if CORE_ROLE.match(role):
            seen_core[role] = seen_core.get(role, 0) + 1
    u = sum(k - 1 for k in seen_core.values() if k > 1)
    for idx, role in frame:
        if role.startswith("C-"):
            base = _base(role)
            if not any(a < idx and rr == base for a, rr in frame):
                c += 1
        elif role.startswith("R-"):
            base = _base(role)
            if not any(rr == base for _, rr in frame):
                r += 1
    return u, c, r


def role_violations(graphs) -> Tuple[int, int, int]:
    """Corpus totals of unique-core (U), continuation (C) and reference (R) role violations."""
    u = c = r = 0
    for g in _as_list(graphs):
        for frame in graph_to_frames(g).values():
            du, dc, dr = frame_violations(frame)
            u, c, r = u + du, c + dc, r + dr
    return u, c, r


@dataclass
class EvalReport:
    arg_precision: float
    arg_recall: float
    arg_f1: float
    prd_f1: float
    buckets: Dict[str, float]
    violations: Dict[str, int]
    tokens_per_second: Optional[float] = None
    sentences: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        lines = [
            f"sentences        {self.sentences}",
            f"arg P/R/F1       {self.arg_precision:.4f} {self.arg_recall:.4f} {self.arg_f1:.4f}",
            f"prd F1           {self.prd_f1:.4f}",
            "distance F1      " + " ".join(f"{b}:{v:.3f}" for b, v in self.buckets.items()),
            "violations U/C/R {U} {C} {R}".format(**self.violations),
        ]
        if self.tokens_per_second is not None:
            lines.append(f"tokens/sec       {self.tokens_per_second:.1f}")
        return "\n".join(lines)


def evaluate(gold, pred, tokens_per_second=None) -> EvalReport:
    gold, pred = _align(gold, pred)
    p, r, f = score_triplets(gold, pred)
    u, c, rr = role_violations(pred)
    return EvalReport(p, r, f, score_predicates(gold, pred), distance_buckets(gold, pred),
                      {"U": u, "C": c, "R": rr}, tokens_per_second, len(gold))


def bench_decode(sentences: Sequence[Sentence], model, beam: int = 1, repeats: int = 3,
                 warmup: bool = True) -> Tuple[float, List[float]]:
    """Median tokens/sec over ``repeats`` timed passes; returns (tokens/sec, wall times)."""
    from .decoder import decode

    n_tokens = sum(len(s) for s in sentences)
    if warmup and sentences:
        decode(sentences[0], model, beam)
    times = []
    for _ in range(max(3, repeats)):
        t0 = time.perf_counter()
        for s in sentences:
            decode(s, model, beam)
        times.append(time.perf_counter() - t0)
    med = statistics.median(times)
    return (n_tokens / med if med > 0 else float("inf")), times
