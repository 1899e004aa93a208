"""Pretrained word vectors and the optional precomputed per-token vector hook."""

from __future__ import annotations

import json
from typing import Dict, List, Optional

import numpy as np

from .errors import ParseError


class PretrainedEmbeddings:
    def __init__(self, words: List[str], vectors: np.ndarray):
        self.words = list(words)
        self.vectors = np.asarray(vectors, dtype=np.float64)
        self.index = {w: i for i, w in enumerate(self.words)}

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return self.get(word) is not None

    def get(self, word: str) -> Optional[np.ndarray]:
        i = self.index.get(word)
        if i is None:
            i = self.index.get(word.lower())
        return None if i is None else self.vectors[i]

    def frozen_vector(self, word: str) -> np.ndarray:
        """Fixed vector for ``word``; zeros when the file lacks it."""
        v = self.get(word)
        return np.zeros(self.dim) if v is None else v


def load_pretrained_embeddings(path: str) -> PretrainedEmbeddings:
    """Read a text embedding file: ``word v1 v2 ...`` per line.

    A leading ``count dim`` header (fastText style) is detected and skipped.
    """
    words, rows, dim = [], [], None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue
            word, values = parts[0], parts[1:]
            try:
                vec = [float(v) for v in values]
            except ValueError:
                raise ParseError(f"non-numeric vector value for {word!r}", line=lineno, path=path) from None
            if dim is None:
                dim = len(vec)
                if dim == 0:
                    raise ParseError(f"no vector values for {word!r}", line=lineno, path=path)
            elif len(vec) != dim:
                raise ParseError(f"vector for {word!r} has {len(vec)} values, expected {dim}", line=lineno, path=path)
            words.append(word)
            rows.append(vec)
    if dim is None:
        raise ParseError("embedding file holds no vectors", path=path)
    return PretrainedEmbeddings(words, np.array(rows))


def load_context_vectors(path: str) -> Dict[str, np.ndarray]:
    """Per-token vectors computed offline, one JSON object per line: ``{"id": ..., "vectors": [[...], ...]}``."""
    out = {}
    dim = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                arr = np.asarray(obj["vectors"], dtype=np.float64)
                sid = str(obj["id"])
            except (ValueError, KeyError, TypeError) as e:
                raise ParseError(f"bad context-vector record: {e}", line=lineno, path=path) from None
            if arr.ndim != 2 or (dim is not None and arr.shape[1] != dim):
                raise ParseError(f"inconsistent vector shape {arr.shape}", line=lineno, path=path)
            dim = arr.shape[1]
            out[sid] = arr
    return out
