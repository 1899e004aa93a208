import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transrl.data import (Sentence, SrlGraph, Token, Vocab, Vocabs, build_vocabs, frames_to_graph,
                          graph_to_frames)
from transrl.errors import ConfigurationError, InputError

EXAMPLE_FORMS = ["When", "witnesses", "victims", "stay", "silent", ",", "nothing", "changes"]
STAY, SILENT, VICTIMS, CHANGES, NOTHING = 3, 4, 2, 7, 6


def example_graph():
    return SrlGraph.from_triplets([(STAY, SILENT, "A3"), (STAY, VICTIMS, "A1"),
                                   (CHANGES, STAY, "A-TMP"), (CHANGES, NOTHING, "A1")])


def corpus_with_roles(roles, words=("a", "b", "c")):
    sent = Sentence.from_forms(list(words))
    graph = SrlGraph.from_triplets([(0, i + 1, r) for i, r in enumerate(roles)])
    return [(sent, graph)]


class TestTokenSentence:
    def test_token_cannot_head_itself(self):
        with pytest.raises(InputError):
            Token(2, "x", head=2)

    def test_head_out_of_range(self):
        with pytest.raises(InputError):
            Sentence.from_forms(["a", "b"], heads=[-1, 5])

    def test_single_root_required_when_syntax_given(self):
        with pytest.raises(InputError):
            Sentence.from_forms(["a", "b", "c"], heads=[-1, -1, 0])
        s = Sentence.from_forms(["a", "b", "c"], heads=[1, -1, 1])
        assert s.has_syntax and s.heads() == [1, -1, 1]

    def test_no_syntax_is_allowed(self):
        s = Sentence.from_forms(["a", "b"])
        assert not s.has_syntax
        assert [t.index for t in s.tokens] == [0, 1]

    def test_noncontiguous_indices_rejected(self):
        with pytest.raises(InputError):
            Sentence((Token(0, "a"), Token(2, "b")))


class TestSrlGraph:
    def test_predicate_equal_argument_rejected(self):
        with pytest.raises(InputError):
            SrlGraph.from_triplets([(1, 1, "A0")])

    def test_duplicate_pair_rejected(self):
        with pytest.raises(InputError):
            SrlGraph.from_triplets([(1, 0, "A0"), (1, 0, "A1")])

    def test_predicates_include_triplet_heads(self):
        g = SrlGraph.from_triplets([(1, 0, "A0")], predicates=[4])
        assert g.predicates == {1, 4}

    def test_senses_do_not_affect_equality(self):
        a = SrlGraph.from_triplets([(1, 0, "A0")], senses={1: "x.01"})
        b = SrlGraph.from_triplets([(1, 0, "A0")])
        assert a == b

    def test_validate_for_range(self):
        with pytest.raises(InputError):
            SrlGraph.from_triplets([(1, 3, "A0")]).validate_for(3)


class TestFrames:
    def test_running_example_has_two_frames_of_two(self):
        frames = graph_to_frames(example_graph())
        assert sorted(frames) == [STAY, CHANGES]
        assert frames[STAY] == [(VICTIMS, "A1"), (SILENT, "A3")]
        assert frames[CHANGES] == [(STAY, "A-TMP"), (NOTHING, "A1")]

    def test_empty_graph(self):
        assert graph_to_frames(SrlGraph()) == {}

    def test_single_triplet(self):
        assert graph_to_frames(SrlGraph.from_triplets([(2, 0, "A0")])) == {2: [(0, "A0")]}

    def test_argumentless_predicate_only_when_listed(self):
        assert graph_to_frames(SrlGraph.from_triplets([], predicates=[3])) == {3: []}

    @given(st.sets(st.tuples(st.integers(0, 8), st.integers(0, 8)), max_size=20),
           st.sampled_from(["A0", "A1", "AM-TMP", "C-A1"]))
    def test_flatten_roundtrip(self, pairs, role):
        trips = [(p, a, role) for p, a in pairs if p != a]
        g = SrlGraph.from_triplets(trips)
        flat = {(p, a, r) for p, frame in graph_to_frames(g).items() for a, r in frame}
        assert flat == g.triplets
        assert frames_to_graph(graph_to_frames(g)) == g


class TestVocab:
    def test_unseen_maps_to_unk_and_known_roundtrips(self):
        v = Vocab(["x", "y"])
        assert v["zzz"] == v.unk_id == 1
        for s in ("x", "y"):
            assert v[v.symbol(v[s])] == v[s]
        assert v.pad_id == 0

    def test_role_vocab_exact(self):
        vocabs = build_vocabs(corpus_with_roles(["A0", "A1"]))
        assert vocabs.roles.symbols == ["A0", "A1"]
        assert len(vocabs.roles) == 2 + 2

    def test_min_freq_threshold(self):
        sent = Sentence.from_forms(["the"] * 5 + ["rare"])
        vocabs = build_vocabs([(sent, SrlGraph())], min_freq=2)
        assert vocabs.words["the"] != vocabs.words.unk_id
        assert vocabs.words["rare"] == vocabs.words.unk_id

    def test_empty_corpus(self):
        with pytest.raises(ConfigurationError):
            build_vocabs([])

    def test_deterministic_ids(self, train_corpus):
        assert build_vocabs(train_corpus).to_dict() == build_vocabs(list(train_corpus)).to_dict()

    def test_serialization_roundtrip(self, train_corpus):
        v = build_vocabs(train_corpus)
        assert Vocabs.from_dict(v.to_dict()) == v

    @settings(max_examples=50)
    @given(st.lists(st.text(min_size=1, max_size=5), max_size=30))
    def test_label_index_inverse(self, symbols):
        v = Vocab(symbols)
        for s in set(symbols):
            assert v.label(v.label_index(s)) == s
