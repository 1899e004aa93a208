"""Core domain types: tokens, sentences, SRL graphs and vocabularies."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import ConfigurationError, InputError

Triplet = Tuple[int, int, str]


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    lemma: str = "_"
    pos: str = "_"
    head: Optional[int] = None
    deprel: str = "_"

    def __post_init__(self):
        if self.head is not None and self.head == self.index:
            raise InputError(f"token {self.index} ({self.form!r}) is its own head")


@dataclass(frozen=True)
class Sentence:
    tokens: Tuple[Token, ...]
    id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        n = len(self.tokens)
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise InputError(f"sentence {self.id!r}: token indices must be 0..{n - 1}, got {tok.index} at {i}")
            if tok.head is not None and not 0 <= tok.head < n:
                raise InputError(f"sentence {self.id!r}: head {tok.head} of token {i} out of range")
        roots = sum(1 for t in self.tokens if t.head is None)
        if n and roots != n and roots != 1:
            raise InputError(f"sentence {self.id!r}: expected exactly one root, found {roots}")

    @classmethod
    def from_forms(cls, forms: Sequence[str], id: str = "", lemmas=None, pos=None,
                   heads=None, deprels=None) -> "Sentence":
        """Build a sentence from parallel columns; ``heads`` uses -1 (or None) for the root."""
        n = len(forms)
        lemmas = lemmas or ["_"] * n
        pos = pos or ["_"] * n
        deprels = deprels or ["_"] * n
        heads = heads if heads is not None else [None] * n
        if not (len(lemmas) == len(pos) == len(deprels) == len(heads) == n):
            raise InputError(f"sentence {id!r}: column lengths differ")
        toks = []
        for i in range(n):
            h = heads[i]
            h = None if h is None or h < 0 else int(h)
            toks.append(Token(i, forms[i], lemmas[i], pos[i], h, deprels[i]))
        return cls(tuple(toks), id)

    def __len__(self):
        return len(self.tokens)

    @property
    def forms(self) -> List[str]:
        return [t.form for t in self.tokens]

    @property
    def has_syntax(self) -> bool:
        return len(self.tokens) > 0 and any(t.head is not None for t in self.tokens)

    def heads(self) -> List[int]:
        return [-1 if t.head is None else t.head for t in self.tokens]


@dataclass(frozen=True)
class SrlGraph:
    """Set of (predicate, argument, role) triplets plus the identified predicates.

    ``predicates`` always includes every triplet predicate; it may also carry
    predicates that take no arguments. Senses ride along but are not compared.
    """

    triplets: frozenset = frozenset()
    predicates: frozenset = frozenset()
    senses: Mapping[int, str] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        trips = frozenset((int(p), int(a), str(r)) for p, a, r in self.triplets)
        seen = set()
        for p, a, r in trips:
            if p == a:
                raise InputError(f"triplet ({p}, {a}, {r}): predicate equals argument")
            if (p, a) in seen:
                raise InputError(f"duplicate role assignment for pair ({p}, {a})")
            seen.add((p, a))
        preds = frozenset(int(p) for p in self.predicates) | {p for p, _, _ in trips}
        object.__setattr__(self, "triplets", trips)
        object.__setattr__(self, "predicates", preds)

    @classmethod
    def from_triplets(cls, triplets: Iterable[Triplet], predicates: Iterable[int] = (),
                      senses: Optional[Mapping[int, str]] = None) -> "SrlGraph":
        return cls(frozenset(tuple(t) for t in triplets), frozenset(predicates), dict(senses or {}))

    def __len__(self):
        return len(self.triplets)

    def validate_for(self, n: int, id: str = "") -> None:
        for p, a, r in self.triplets:
            if not (0 <= p < n and 0 <= a < n):
                raise InputError(f"sentence {id!r}: triplet ({p}, {a}, {r}) out of range for {n} tokens")
        for p in self.predicates:
            if not 0 <= p < n:
                raise InputError(f"sentence {id!r}: predicate {p} out of range for {n} tokens")

    def sorted_triplets(self) -> List[Triplet]:
        return sorted(self.triplets)


def graph_to_frames(g: SrlGraph) -> Dict[int, List[Tuple[int, str]]]:
    """Group triplets by predicate; arguments are listed in token order.

    Argument-less predicates appear with an empty frame only when the graph
    lists them explicitly in ``predicates``.
    """
    frames: Dict[int, List[Tuple[int, str]]] = {p: [] for p in sorted(g.predicates)}
    for p, a, r in sorted(g.triplets):
        frames[p].append((a, r))
    return frames


def frames_to_graph(frames: Mapping[int, Sequence[Tuple[int, str]]]) -> SrlGraph:
    return SrlGraph.from_triplets(((p, a, r) for p, args in frames.items() for a, r in args),
                                  predicates=frames.keys())


PAD = "<pad>"
UNK = "<unk>"


class Vocab:
    """String/id mapping with reserved PAD (0) and UNK (1) ids."""

    reserved = (PAD, UNK)

    def __init__(self, symbols: Iterable[str] = ()):
        self._itos: List[str] = list(self.reserved)
        self._stoi: Dict[str, int] = {s: i for i, s in enumerate(self._itos)}
        for s in symbols:
            self.add(s)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def unk_id(self) -> int:
        return 1

    @property
    def n_reserved(self) -> int:
        return len(self.reserved)

    def add(self, symbol: str) -> int:
        if symbol not in self._stoi:
            self._stoi[symbol] = len(self._itos)
            self._itos.append(symbol)
        return self._stoi[symbol]

    def __len__(self):
        return len(self._itos)

    def __contains__(self, symbol):
        return symbol in self._stoi

    def __getitem__(self, symbol: str) -> int:
        return self._stoi.get(symbol, self.unk_id)

    def lookup(self, symbols: Iterable[str]) -> List[int]:
        return [self[s] for s in symbols]

    def symbol(self, idx: int) -> str:
        return self._itos[idx]

    @property
    def symbols(self) -> List[str]:
        """Non-reserved symbols in id order."""
        return self._itos[self.n_reserved:]

    # label-style access used by classifier heads, which skip reserved ids
    def label_index(self, symbol: str) -> int:
        if symbol not in self._stoi:
            raise KeyError(symbol)
        return self._stoi[symbol] - self.n_reserved

    def label(self, index: int) -> str:
        return self._itos[index + self.n_reserved]

    def to_list(self) -> List[str]:
        return list(self.symbols)

    @classmethod
    def from_list(cls, symbols: Sequence[str]) -> "Vocab":
        return cls(symbols)

    def __eq__(self, other):
        return isinstance(other, Vocab) and self._itos == other._itos

    def __repr__(self):
        return f"Vocab({len(self.symbols)} symbols)"


@dataclass
class Vocabs:
    words: Vocab
    chars: Vocab
    pos: Vocab
    deprels: Vocab
    roles: Vocab
    actions: Vocab

    def to_dict(self) -> Dict[str, List[str]]:
        return {k: getattr(self, k).to_list() for k in ("words", "chars", "pos", "deprels", "roles", "actions")}

    @classmethod
    def from_dict(cls, d: Mapping[str, Sequence[str]]) -> "Vocabs":
        return cls(**{k: Vocab.from_list(v) for k, v in d.items()})


def build_vocabs(corpus: Sequence[Tuple[Sentence, SrlGraph]], min_freq: int = 1) -> Vocabs:
    """Build all vocabularies from a training corpus.

    Ids are assigned in first-occurrence order, so a fixed corpus order gives
    fixed ids. ``min_freq`` filters words and characters.
    """
    from .transition import ACTION_KINDS

    if not corpus:
        raise ConfigurationError("cannot build vocabularies from an empty corpus")
    words, chars, pos, deprels, roles = Counter(), Counter(), Counter(), Counter(), Counter()
    for sent, graph in corpus:
        for tok in sent.tokens:
            words[tok.form] += 1
            chars.update(tok.form)
            pos[tok.pos] += 1
            deprels[tok.deprel] += 1
        for _, _, r in sorted(graph.triplets):
            roles[r] += 1

    def keep(counter, threshold):
        # Counter preserves insertion order -> first-occurrence ids
        return [s for s, c in counter.items() if c >= threshold]

    return Vocabs(
        words=Vocab(keep(words, min_freq)),
        chars=Vocab(keep(chars, min_freq)),
        pos=Vocab(keep(pos, 1)),
        deprels=Vocab(keep(deprels, 1)),
        roles=Vocab(keep(roles, 1)),
        actions=Vocab(k.value for k in ACTION_KINDS),
    )
