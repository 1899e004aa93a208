"""Corpus readers and writers: CoNLL-2009 columns and a small JSON schema.

JSON corpus objects carry ``tokens`` plus optional ``id``, ``lemmas``,
``pos``, ``heads`` (0-based, -1 for the root), ``deprels``, ``triplets``
(``[[pred, arg, role], ...]`` with 0-based indices), ``predicates`` and
``senses`` (``{"pred index": sense}``).  A file holds either one JSON array
or one object per line.
"""

from __future__ import annotations

import json
from typing import Dict, List, Sequence, Tuple

from .data import Sentence, SrlGraph, Token
from .errors import InputError, ParseError

Item = Tuple[Sentence, SrlGraph]

N_FIXED = 14
ID, FORM, LEMMA, PLEMMA, POS, PPOS, FEAT, PFEAT, HEAD, PHEAD, DEPREL, PDEPREL, FILLPRED, PRED = range(N_FIXED)


def _blocks(path: str):
    """Yield (first line number, [(line number, cells), ...]) per sentence block."""
    block: List[Tuple[int, List[str]]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                if block:
                    yield block[0][0], block
                    block = []
                continue
            block.append((lineno, line.split("\t")))
    if block:
        yield block[0][0], block


def _parse_block(rows, path: str, sid: str, use_predicted_syntax: bool) -> Item:
    width = len(rows[0][1])
    if width < N_FIXED:
        raise ParseError(f"expected at least {N_FIXED} columns, found {width}", line=rows[0][0], path=path)
    head_col, rel_col = (PHEAD, PDEPREL) if use_predicted_syntax else (HEAD, DEPREL)
    n = len(rows)
    preds = []
    tokens = []
    for i, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise ParseError(f"ragged row: {len(cells)} columns, block started with {width}", line=lineno, path=path)
        if cells[ID] != str(i + 1):
            raise ParseError(f"token id {cells[ID]!r}, expected {i + 1}", line=lineno, path=path)
        try:
            head = int(cells[head_col])
        except ValueError:
            raise ParseError(f"non-numeric head {cells[head_col]!r}", line=lineno, path=path) from None
        if not 0 <= head <= n:
            raise ParseError(f"head {head} out of range for {n} tokens", line=lineno, path=path)
        if cells[FILLPRED] == "Y":
            preds.append(i)
        tokens.append(Token(i, cells[FORM], cells[LEMMA], cells[POS], None if head == 0 else head - 1, cells[rel_col]))
    n_apred = width - N_FIXED
    if n_apred != len(preds):
        raise ParseError(f"{n_apred} APRED columns but {len(preds)} FILLPRED=Y rows", line=rows[0][0], path=path)
    triplets = []
    for i, (_, cells) in enumerate(rows):
        for j, p in enumerate(preds):
            role = cells[N_FIXED + j]
            if role != "_":
                triplets.append((p, i, role))
    senses = {p: rows[p][1][PRED] for p in preds if rows[p][1][PRED] != "_"}
    try:
        sent = Sentence(tuple(tokens), sid)
        graph = SrlGraph.from_triplets(triplets, preds, senses)
    except InputError as e:
        raise ParseError(str(e), line=rows[0][0], path=path) from None
    return sent, graph


def read_conll09(path: str, use_predicted_syntax: bool = False) -> List[Item]:
    """Read a CoNLL-2009 file; sentence ids are the 0-based block numbers."""
    return [_parse_block(rows, path, str(k), use_predicted_syntax) for k, (_, rows) in enumerate(_blocks(path))]


def _conll_lines(sent: Sentence, graph: SrlGraph) -> List[str]:
    graph.validate_for(len(sent), sent.id)
    preds = sorted(graph.predicates)
    roles = {(p, a): r for p, a, r in graph.triplets}
    lines = []
    for tok in sent.tokens:
        head = "0" if tok.head is None else str(tok.head + 1)
        is_pred = tok.index in graph.predicates
        sense = graph.senses.get(tok.index, "_") if is_pred else "_"
        cells = [str(tok.index + 1), tok.form, tok.lemma, tok.lemma, tok.pos, tok.pos, "_", "_",
                 head, head, tok.deprel, tok.deprel, "Y" if is_pred else "_", sense]
        cells += [roles.get((p, tok.index), "_") for p in preds]
        lines.append("\t".join(cells))
    return lines


def write_conll09(items: Sequence[Item], path: str) -> None:
    """Write CoNLL-2009; predicted columns duplicate the gold ones and FEAT is ``_``."""
    blocks = ["\n".join(_conll_lines(s, g)) + "\n" for s, g in items]
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(blocks))


def _item_from_obj(obj, where: int, path: str) -> Item:
    if not isinstance(obj, dict) or "tokens" not in obj:
        raise ParseError("expected an object with a 'tokens' list", line=where, path=path)
    try:
        forms = [str(t) for t in obj["tokens"]]
        n = len(forms)
        sid = str(obj.get("id", where - 1))
        sent = Sentence.from_forms(forms, sid, obj.get("lemmas"), obj.get("pos"), obj.get("heads"),
                                   obj.get("deprels"))
        for h in obj.get("heads") or []:
            if h is not None and not -1 <= h < n:
                raise InputError(f"head {h} out of range for {n} tokens")
        triplets = []
        for t in obj.get("triplets", []):
            if len(t) != 3:
                raise InputError(f"triplet {t!r} must have three fields")
            p, a, r = int(t[0]), int(t[1]), str(t[2])
            triplets.append((p, a, r))
        senses = {int(k): v for k, v in (obj.get("senses") or {}).items()}
        graph = SrlGraph.from_triplets(triplets, obj.get("predicates", ()), senses)
        graph.validate_for(n, sid)
    except (InputError, TypeError, ValueError) as e:
        raise ParseError(str(e), line=where, path=path) from None
    return sent, graph


def read_json_corpus(path: str) -> List[Item]:
    """Read a JSON array of sentence objects, or one object per line.

    Error line numbers refer to the file line for JSONL and to the 1-based
    item position for an array.
    """
    with open(path, encoding="utf-8") as f:
        text = f.read()
    if text.lstrip().startswith("["):
        try:
            objs = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", line=e.lineno, path=path) from None
        return [_item_from_obj(o, k + 1, path) for k, o in enumerate(objs)]
    items = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", line=lineno, path=path) from None
        if "id" not in obj:
            obj = dict(obj, id=str(len(items)))
        items.append(_item_from_obj(obj, lineno, path))
    return items


def item_to_obj(sent: Sentence, graph: SrlGraph) -> Dict:
    obj = {"id": sent.id, "tokens": sent.forms,
           "lemmas": [t.lemma for t in sent.tokens], "pos": [t.pos for t in sent.tokens]}
    if sent.has_syntax:
        obj["heads"] = sent.heads()
        obj["deprels"] = [t.deprel for t in sent.tokens]
    obj["predicates"] = sorted(graph.predicates)
    obj["triplets"] = [list(t) for t in graph.sorted_triplets()]
    if graph.senses:
        obj["senses"] = {str(k): v for k, v in sorted(graph.senses.items())}
    return obj


def write_json_corpus(items: Sequence[Item], path: str) -> None:
    """Write one sentence object per line: bare lines for ``.jsonl``, otherwise wrapped in a JSON array."""
    lines = [json.dumps(item_to_obj(s, g), ensure_ascii=False) for s, g in items]
    with open(path, "w", encoding="utf-8") as f:
        if path.endswith(".jsonl"):
            f.write("".join(line + "\n" for line in lines))
        else:
            f.write("[\n" + ",\n".join(lines) + "\n]\n" if lines else "[]\n")


def read_corpus(path: str, use_predicted_syntax: bool = False) -> List[Item]:
    """Dispatch on extension: ``.json``/``.jsonl`` use the JSON reader, anything else CoNLL-2009."""
    if path.endswith((".json", ".jsonl")):
        return read_json_corpus(path)
    return read_conll09(path, use_predicted_syntax)


def write_corpus(items: Sequence[Item], path: str) -> None:
    if path.endswith((".json", ".jsonl")):
        write_json_corpus(items, path)
    else:
        write_conll09(items, path)
