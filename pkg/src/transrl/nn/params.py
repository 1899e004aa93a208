"""Named parameter store and the on-disk checkpoint container."""

from __future__ import annotations

import json
import os
from collections import OrderedDict
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, InputError
from .tensor import Tensor, get_dtype

FORMAT_VERSION = 1


def xavier_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    fan_out, fan_in = shape[0], int(np.prod(shape[1:]))
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class ParamStore:
    """Ordered ``name -> Tensor`` map of every parameter in a model.

    Frozen entries (e.g. fixed pretrained vectors) live here too so they are
    checkpointed, but they are skipped by the optimizer and the L2 penalty.
    """

    def __init__(self, rng: Optional[np.random.Generator] = None):
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._params: "OrderedDict[str, Tensor]" = OrderedDict()
        self._trainable: Dict[str, bool] = {}

    def __contains__(self, name):
        return name in self._params

    def __getitem__(self, name) -> Tensor:
        return self._params[name]

    def __len__(self):
        return len(self._params)

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def items(self):
        return self._params.items()

    def add(self, name: str, value: np.ndarray, trainable: bool = True) -> Tensor:
        if name in self._params:
            raise ConfigurationError(f"duplicate parameter name {name!r}")
        t = Tensor(np.ascontiguousarray(value, dtype=get_dtype()), requires_grad=trainable, name=name)
        self._params[name] = t
        self._trainable[name] = trainable
        return t

    def matrix(self, name, rows, cols) -> Tensor:
        return self.add(name, xavier_uniform(self.rng, (rows, cols)))

    def bias(self, name, dim, value=0.0) -> Tensor:
        return self.add(name, np.full(dim, value))

    def vector(self, name, dim, scale=0.1) -> Tensor:
        return self.add(name, self.rng.uniform(-scale, scale, size=dim))

    def embedding(self, name, num, dim, init: Optional[np.ndarray] = None, trainable=True) -> Tensor:
        if init is None:
            limit = np.sqrt(3.0 / dim)
            init = self.rng.uniform(-limit, limit, size=(num, dim))
        return self.add(name, init, trainable=trainable)

    def is_trainable(self, name) -> bool:
        return self._trainable[name]

    def trainable(self) -> List[Tuple[str, Tensor]]:
        return [(n, t) for n, t in self._params.items() if self._trainable[n]]

    def zero_grad(self):
        for t in self._params.values():
            t.grad = None

    def num_values(self, trainable_only=True) -> int:
        return sum(t.data.size for n, t in self._params.items() if self._trainable[n] or not trainable_only)

    def state(self) -> Dict[str, np.ndarray]:
        return {n: t.data.copy() for n, t in self._params.items()}

    def load_state(self, state: Dict[str, np.ndarray]):
        for n, t in self._params.items():
            if n not in state:
                raise InputError(f"checkpoint lacks parameter {n!r}")
            v = state[n]
            if v.shape != t.data.shape:
                raise InputError(f"parameter {n!r}: checkpoint shape {v.shape} != model shape {t.data.shape}")
            t.data = np.array(v, dtype=t.data.dtype)


# ------------------------------------------------------------------ checkpoint

def save_checkpoint(path: str, store: ParamStore, config: dict, vocabs: Dict[str, List[str]],
                    extra: Optional[dict] = None) -> None:
    """Write ``manifest.json``, one little-endian blob per tensor and the vocab files."""
    os.makedirs(os.path.join(path, "tensors"), exist_ok=True)
    os.makedirs(os.path.join(path, "vocabs"), exist_ok=True)
    entries = []
    for i, (name, t) in enumerate(store.items()):
        fname = f"tensors/{i:04d}.bin"
        arr = np.ascontiguousarray(t.data, dtype=t.data.dtype.newbyteorder("<"))
        with open(os.path.join(path, fname), "wb") as f:
            f.write(arr.tobytes())
        entries.append({"name": name, "shape": list(t.data.shape), "dtype": t.data.dtype.name,
                        "file": fname, "trainable": store.is_trainable(name)})
    vocab_files = {}
    for key, symbols in vocabs.items():
        fname = f"vocabs/{key}.json"
        with open(os.path.join(path, fname), "w", encoding="utf-8") as f:
            json.dump(symbols, f, ensure_ascii=False, indent=0)
            f.write("\n")
        vocab_files[key] = fname
    manifest = {"format_version": FORMAT_VERSION, "config": config, "params": entries, "vocabs": vocab_files}
    if extra:
        manifest["extra"] = extra
    with open(os.path.join(path, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def read_checkpoint(path: str):
    """Return ``(manifest, {name: array}, {vocab: symbols})``."""
    mpath = os.path.join(path, "manifest.json")
    if not os.path.exists(mpath):
        raise InputError(f"{path}: not a checkpoint directory (manifest.json missing)")
    with open(mpath, encoding="utf-8") as f:
        manifest = json.load(f)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise InputError(f"{path}: unsupported checkpoint version {manifest.get('format_version')}")
    arrays = {}
    for e in manifest["params"]:
        dtype = np.dtype(e["dtype"]).newbyteorder("<")
        with open(os.path.join(path, e["file"]), "rb") as f:
            raw = f.read()
        arr = np.frombuffer(raw, dtype=dtype)
        if arr.size != int(np.prod(e["shape"])):
            raise InputError(f"{path}: tensor {e['name']!r} has {arr.size} values, expected shape {e['shape']}")
        arrays[e["name"]] = arr.reshape(e["shape"]).astype(dtype.newbyteorder("="))
    vocabs = {}
    for key, fname in manifest.get("vocabs", {}).items():
        with open(os.path.join(path, fname), encoding="utf-8") as f:
            vocabs[key] = json.load(f)
    return manifest, arrays, vocabs
