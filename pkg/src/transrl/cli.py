"""Command-line entry point: oracle-check, train, decode, eval, bench, trace.

Exit codes: 0 success, 1 bad input / configuration / usage, 2 internal
assertion.  Logs go to stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import traceback
from typing import Dict, Optional, Sequence

import numpy as np

from .conll import read_corpus, write_corpus
from .decoder import decode, decode_corpus
from .embeddings import load_context_vectors, load_pretrained_embeddings
from .errors import ConfigurationError, InputError, TransrlError
from .evaluator import bench_decode, evaluate
from .oracle import derive_actions, roundtrip_check
from .scorer import ModelConfig, TransitionSrlModel
from .trainer import TrainConfig, train
from .transition import ParsingOrder, format_trace, run

logger = logging.getLogger("transrl")


class UsageError(TransrlError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage().strip()}")


class JsonFormatter(logging.Formatter):
    def format(self, record):
        out = {"level": record.levelname.lower(), "logger": record.name}
        if isinstance(record.msg, dict):
            out.update(record.msg)
        else:
            out["message"] = record.getMessage()
        return json.dumps(out, sort_keys=True, default=str)


def _setup_logging(level: str):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonFormatter())
    root = logging.getLogger("transrl")
    root.handlers[:] = [handler]
    root.setLevel(level.upper())
    root.propagate = False


def _load_json(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            cfg = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}:{e.lineno}: invalid JSON config: {e.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigurationError(f"{path}: config must be a JSON object")
    unknown = set(cfg) - {"model", "train"}
    if unknown:
        raise ConfigurationError(f"{path}: unknown config sections {sorted(unknown)}; use 'model' and 'train'")
    return cfg


def _contexts(path: Optional[str]) -> Dict[str, np.ndarray]:
    return load_context_vectors(path) if path else {}


def _pick(corpus, index: int):
    if not 0 <= index < len(corpus):
        raise InputError(f"sentence index {index} out of range; corpus has {len(corpus)} sentences")
    return corpus[index]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="seed for every random draw (overrides the config file)")
    p.add_argument("--workers", type=int, default=1, help="decode threads (1 keeps runs bit-reproducible)")
    p.add_argument("--log-level", default="info", choices=["debug", "info", "warning", "error"])
    p.add_argument("--predicted-syntax", action="store_true", help="read PHEAD/PDEPREL from CoNLL-2009 input")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="transrl", description="Transition-based semantic role labeling.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("oracle-check", help="round-trip gold graphs through the oracle")
    p.add_argument("--input", required=True)
    p.add_argument("--order", default="close_first")
    p.add_argument("--no-early-shift", action="store_true")
    _add_common(p)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--train", required=True)
    p.add_argument("--dev")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON file with optional 'model' and 'train' sections")
    p.add_argument("--order")
    p.add_argument("--high-order", choices=["on", "off"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--l2", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--pretrained", help="text word-vector file")
    p.add_argument("--context-vectors", help="JSONL of precomputed per-token vectors")
    _add_common(p)

    p = sub.add_parser("decode", help="label a corpus with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="output corpus (.json or CoNLL-2009); stdout JSON lines if omitted")
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--trace", help="write every sentence's step table to this file")
    p.add_argument("--context-vectors")
    _add_common(p)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", help="predicted corpus; otherwise decode --gold with --model")
    p.add_argument("--model")
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--context-vectors")
    p.add_argument("--report", choices=["text", "json"], default="text")
    _add_common(p)

    p = sub.add_parser("bench", help="decode throughput in tokens/sec")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--repeats", type=int, default=3)
    _add_common(p)

    p = sub.add_parser("trace", help="print the step table for one sentence")
    p.add_argument("--input", required=True)
    p.add_argument("--sentence", type=int, default=0)
    p.add_argument("--model", help="decode with this model instead of following the oracle")
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--order", default="close_first")
    p.add_argument("--no-early-shift", action="store_true")
    _add_common(p)
    return parser


def _resolve_train(args) -> tuple:
    cfg = _load_json(args.config)
    model_cfg = dict(cfg.get("model", {}))
    train_cfg = dict(cfg.get("train", {}))
    if args.order:
        model_cfg["order"] = args.order
    if args.high_order:
        model_cfg["high_order"] = args.high_order == "on"
    if args.pretrained:
        model_cfg["pretrained"] = True
    for flag, key in (("epochs", "max_epochs"), ("lr", "lr"), ("l2", "l2"), ("batch_size", "batch_size"),
                      ("patience", "patience")):
        if getattr(args, flag) is not None:
            train_cfg[key] = getattr(args, flag)
    if args.seed is not None:
        train_cfg["seed"] = args.seed
    return ModelConfig.from_dict(model_cfg), TrainConfig.from_dict(train_cfg)


def cmd_oracle_check(args) -> int:
    corpus = read_corpus(args.input, args.predicted_syntax)
    order = ParsingOrder.parse(args.order)
    report = roundtrip_check(corpus, order, early_shift=not args.no_early_shift)
    print(f"checked {report.checked} sentences, {report.failed} failed")
    if report.failed:
        print(f"first failure: sentence {report.first_failure}")
        for err in report.errors[:5]:
            print(f"  {err}")
        return 1
    return 0


def cmd_train(args) -> int:
    model_cfg, train_cfg = _resolve_train(args)
    train_set = read_corpus(args.train, args.predicted_syntax)
    dev_set = read_corpus(args.dev, args.predicted_syntax) if args.dev else []
    pretrained = load_pretrained_embeddings(args.pretrained) if args.pretrained else None
    contexts = _contexts(args.context_vectors)
    if contexts and not model_cfg.context_dim:
        model_cfg.context_dim = next(iter(contexts.values())).shape[1]
    logger.info({"event": "config", "command": "train", "model": model_cfg.to_dict(), "train": train_cfg.to_dict(),
                 "train_path": args.train, "dev_path": args.dev, "out": args.out})
    result = train(train_set, dev_set, train_cfg, model_cfg, args.out, pretrained, contexts)
    if not dev_set:
        result.model.save(os.path.join(args.out, "model"), extra={"epoch": len(result.metrics)})
    logger.info({"event": "done", "best_epoch": result.best_epoch, "best_score": result.best_score,
                 "epochs": len(result.metrics)})
    return 0


def _load_model(path: str) -> TransitionSrlModel:
    if not os.path.isdir(path):
        raise InputError(f"model directory {path!r} does not exist")
    return TransitionSrlModel.load(path)


def _decode_all(model, corpus, beam, contexts, workers):
    results = decode_corpus([s for s, _ in corpus], model, beam, contexts, workers)
    return [(s, r.graph) for (s, _), r in zip(corpus, results)]


def cmd_decode(args) -> int:
    model = _load_model(args.model)
    corpus = read_corpus(args.input, args.predicted_syntax)
    logger.info({"event": "config", "command": "decode", "model": args.model, "input": args.input,
                 "beam": args.beam, "workers": args.workers})
    results = decode_corpus([s for s, _ in corpus], model, args.beam, _contexts(args.context_vectors), args.workers)
    out = [(s, r.graph) for (s, _), r in zip(corpus, results)]
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as f:
            for (s, _), r in zip(corpus, results):
                f.write(f"# {s.id}\n{r.format(s)}\n\n")
    if args.output:
        write_corpus(out, args.output)
    else:
        from .conll import item_to_obj
        for s, g in out:
            print(json.dumps(item_to_obj(s, g), ensure_ascii=False))
    return 0


def cmd_eval(args) -> int:
    gold = read_corpus(args.gold, args.predicted_syntax)
    if args.pred:
        pred = read_corpus(args.pred, args.predicted_syntax)
        if [s.forms for s, _ in gold] != [s.forms for s, _ in pred]:
            raise InputError("gold and predicted corpora hold different sentences")
    elif args.model:
        pred = _decode_all(_load_model(args.model), gold, args.beam, _contexts(args.context_vectors), args.workers)
    else:
        raise UsageError("eval needs --pred or --model")
    report = evaluate([g for _, g in gold], [g for _, g in pred])
    print(json.dumps(report.to_dict(), sort_keys=True) if args.report == "json" else report.to_text())
    return 0


def cmd_bench(args) -> int:
    model = _load_model(args.model)
    sentences = [s for s, _ in read_corpus(args.input, args.predicted_syntax)]
    tps, times = bench_decode(sentences, model, args.beam, args.repeats)
    print(f"tokens/sec {tps:.1f}")
    logger.info({"event": "bench", "tokens": sum(len(s) for s in sentences), "beam": args.beam,
                 "tokens_per_second": tps, "times": times})
    return 0


def cmd_trace(args) -> int:
    corpus = read_corpus(args.input, args.predicted_syntax)
    sent, gold = _pick(corpus, args.sentence)
    if args.model:
        model = _load_model(args.model)
        print(decode(sent, model, args.beam).format(sent))
        return 0
    order = ParsingOrder.parse(args.order)
    actions = derive_actions(sent, gold, order, early_shift=not args.no_early_shift)
    states = run(sent, actions, order)
    print(format_trace(sent, states[:-1], actions))
    return 0


COMMANDS = {"oracle-check": cmd_oracle_check, "train": cmd_train, "decode": cmd_decode, "eval": cmd_eval,
            "bench": cmd_bench, "trace": cmd_trace}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _setup_logging(args.log_level)
        if args.workers < 1:
            raise ConfigurationError("--workers must be >= 1")
        return COMMANDS[args.command](args)
    except (TransrlError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except AssertionError as e:
        traceback.print_exc(file=sys.stderr)
        print(f"internal error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
