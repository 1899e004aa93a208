"""Seeded synthetic sentences and SRL graphs for property tests."""

from __future__ import annotations

import os
from typing import List, Tuple

import numpy as np

from transrl.data import Sentence, SrlGraph
from transrl.transition import ARC_KINDS, ActionStep, apply, initial_state, is_terminal, legal_actions

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")
ROLES = ("A0", "A1", "A2", "AM-TMP", "C-A1", "R-A0")
WORDS = ("the", "cat", "dog", "saw", "ran", "a", "big", "house", "quickly", "and", "gave", "book")
TAGS = ("DT", "NN", "VBD", "JJ", "RB", "CC")


def fixture(name: str) -> str:
    return os.path.join(FIXTURES, name)


def random_tree(rng: np.random.Generator, n: int) -> List[int]:
    """Heads (-1 for the root) of a uniformly shaped random tree over n tokens."""
    order = rng.permutation(n)
    heads = [-1] * n
    for k in range(1, n):
        heads[order[k]] = int(order[rng.integers(k)])
    return heads


def random_sentence(rng: np.random.Generator, n: int, sid: str = "") -> Sentence:
    forms = [WORDS[i] for i in rng.integers(len(WORDS), size=n)]
    tags = [TAGS[i] for i in rng.integers(len(TAGS), size=n)]
    return Sentence.from_forms(forms, sid, lemmas=forms, pos=tags, heads=random_tree(rng, n), deprels=["DEP"] * n)


def random_graph(rng: np.random.Generator, n: int, max_preds: int = 3, max_args: int = 4) -> SrlGraph:
    k = min(int(rng.integers(max_preds + 1)), n)
    preds = rng.choice(n, size=k, replace=False) if k else []
    triplets = []
    for p in preds:
        others = [i for i in range(n) if i != p]
        m = min(int(rng.integers(max_args + 1)), len(others))
        for a in rng.choice(others, size=m, replace=False) if m else []:
            triplets.append((int(p), int(a), ROLES[rng.integers(len(ROLES))]))
    return SrlGraph.from_triplets(triplets, [int(p) for p in preds])


def synthetic_corpus(seed: int, count: int, max_len: int = 12) -> List[Tuple[Sentence, SrlGraph]]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(1, max_len + 1))
        out.append((random_sentence(rng, n, f"syn-{i}"), random_graph(rng, n)))
    return out


def random_walk(rng: np.random.Generator, n: int, order, role: str = "A1"):
    """Uniformly random legal walk over an n-token sentence; returns (states, actions)."""
    s = initial_state(Sentence.from_forms([f"w{i}" for i in range(n)]), order)
    states, actions = [s], []
    while not is_terminal(s):
        legal = sorted(legal_actions(s), key=lambda k: k.value)
        kind = legal[rng.integers(len(legal))]
        a = ActionStep(kind, role if kind in ARC_KINDS else None)
        s = apply(s, a)
        states.append(s)
        actions.append(a)
    return states, actions
