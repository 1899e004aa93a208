import numpy as np
import pytest

from transrl.embeddings import load_context_vectors, load_pretrained_embeddings
from transrl.errors import ParseError


def write(tmp_path, text, name="e.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_two_lines(tmp_path):
    emb = load_pretrained_embeddings(write(tmp_path, "cat 0.1 0.2\ndog -1 2\n"))
    assert emb.dim == 2 and len(emb) == 2
    np.testing.assert_allclose(emb.get("dog"), [-1, 2])


def test_header_is_skipped(tmp_path):
    emb = load_pretrained_embeddings(write(tmp_path, "2 3\na 1 2 3\nb 4 5 6\n"))
    assert len(emb) == 2 and emb.dim == 3 and "2" not in emb


def test_unknown_word(tmp_path):
    emb = load_pretrained_embeddings(write(tmp_path, "cat 0.1 0.2\n"))
    assert emb.get("zebra") is None and "zebra" not in emb


def test_dimension_mismatch_names_the_line(tmp_path):
    with pytest.raises(ParseError) as err:
        load_pretrained_embeddings(write(tmp_path, "a 1 2\nb 1 2\nc 1\n"))
    assert err.value.line == 3


def test_non_numeric(tmp_path):
    with pytest.raises(ParseError):
        load_pretrained_embeddings(write(tmp_path, "a 1 x\n"))


def test_empty_file(tmp_path):
    with pytest.raises(ParseError):
        load_pretrained_embeddings(write(tmp_path, ""))


def test_context_vectors(tmp_path):
    path = write(tmp_path, '{"id": "0", "vectors": [[1, 2], [3, 4]]}\n\n{"id": "1", "vectors": [[5, 6]]}\n', "c.jsonl")
    ctx = load_context_vectors(path)
    assert ctx["0"].shape == (2, 2) and ctx["1"].tolist() == [[5.0, 6.0]]


def test_context_vectors_inconsistent_width(tmp_path):
    path = write(tmp_path, '{"id": "0", "vectors": [[1, 2]]}\n{"id": "1", "vectors": [[5]]}\n', "c.jsonl")
    with pytest.raises(ParseError) as err:
        load_context_vectors(path)
    assert err.value.line == 2


def test_model_keeps_pretrained_table_frozen(tmp_path, train_corpus):
    from transrl.data import build_vocabs
    from transrl.scorer import ModelConfig, TransitionSrlModel
    from transrl.trainer import sentence_loss
    from transrl.nn.optim import Adam
    vocabs = build_vocabs(train_corpus)
    word = vocabs.words.symbols[0]
    emb = load_pretrained_embeddings(write(tmp_path, f"{word} 0.5 -0.5 1.0\nnotinvocab 1 1 1\n"))
    model = TransitionSrlModel(ModelConfig.small(pretrained=True), vocabs, pretrained=emb)
    table = model.store["input.word_fixed"].data
    np.testing.assert_allclose(table[vocabs.words[word]], [0.5, -0.5, 1.0])
    assert np.all(table[vocabs.words[vocabs.words.symbols[1]]] == 0)
    before = table.copy()
    loss = sentence_loss(*train_corpus[0], model)
    loss.backward()
    Adam(model.store, lr=0.1).step()
    np.testing.assert_array_equal(model.store["input.word_fixed"].data, before)
