import numpy as np
import pytest

from synth import random_sentence
from transrl.data import Sentence, SrlGraph, build_vocabs
from transrl.decoder import decode, decode_beam, decode_corpus, decode_greedy
from transrl.errors import ConfigurationError
from transrl.nn.tensor import grad_enabled
from transrl.oracle import action_bound
from transrl.scorer import ModelConfig, TransitionSrlModel
from transrl.transition import ARC_KINDS, Action, legal_actions

RANDOM = [random_sentence(np.random.default_rng(i), int(np.random.default_rng(i).integers(1, 10)), f"r{i}")
          for i in range(100)]


@pytest.fixture(scope="module")
def zero_model(train_corpus):
    model = TransitionSrlModel(ModelConfig.small(), build_vocabs(train_corpus))
    for _, p in model.store.trainable():
        p.data[:] = 0
    return model


def actions(result):
    return [t.action for t in result.trace]


def check_trace(sentence, result):
    for t in result.trace:
        assert t.action.kind in legal_actions(t.state)
        assert t.logp <= 1e-6
        assert (t.action.role is not None) == (t.action.kind in ARC_KINDS)
    assert len(result.trace) <= action_bound(len(sentence), len(result.graph.predicates))
    result.graph.validate_for(len(sentence))


class TestGreedy:
    def test_zero_parameter_model_terminates(self, zero_model, train_corpus):
        for s, _ in train_corpus[:5]:
            check_trace(s, decode_greedy(s, zero_model))

    def test_one_token_sentence(self, trained_small):
        s = Sentence.from_forms(["Go"])
        kinds = [a.kind for a in actions(decode_greedy(s, trained_small))]
        assert kinds in ([Action.NO_PRD], [Action.PRD_GEN, Action.SHIFT])

    def test_score_is_sum_of_step_logprobs(self, trained_small, dev_corpus):
        r = decode_greedy(dev_corpus[0][0], trained_small)
        assert r.score == pytest.approx(sum(t.logp for t in r.trace))

    def test_scores_nonincreasing_along_trace(self, trained_small, dev_corpus):
        r = decode_greedy(dev_corpus[1][0], trained_small)
        partial = np.cumsum([t.logp for t in r.trace])
        assert np.all(np.diff(partial) <= 1e-9)

    def test_trace_format(self, trained_small, dev_corpus):
        s = dev_corpus[0][0]
        r = decode_greedy(s, trained_small)
        assert len(r.format(s).splitlines()) == len(r.trace) + 1


class TestBeam:
    def test_zero_width_rejected(self, trained_small, dev_corpus):
        with pytest.raises(ConfigurationError):
            decode_beam(dev_corpus[0][0], trained_small, 0)

    def test_width_one_is_greedy_on_random_sentences(self, trained_small):
        for s in RANDOM:
            g, b = decode_greedy(s, trained_small), decode_beam(s, trained_small, 1)
            assert b.score == g.score and b.graph == g.graph and actions(b) == actions(g)

    @pytest.mark.parametrize("width", [2, 4, 32])
    def test_beam_never_below_greedy(self, trained_small, dev_corpus, width):
        for s, _ in dev_corpus:
            assert decode_beam(s, trained_small, width).score >= decode_greedy(s, trained_small).score

    def test_valid_outputs(self, trained_small):
        for s in RANDOM[:30]:
            check_trace(s, decode_beam(s, trained_small, 4))

    def test_role_expansion_is_valid(self, trained_small, dev_corpus):
        s = dev_corpus[0][0]
        check_trace(s, decode_beam(s, trained_small, 4, expand_roles=True))

    def test_action_only_scores(self, trained_small, dev_corpus):
        s = dev_corpus[0][0]
        full = decode_greedy(s, trained_small)
        bare = decode_greedy(s, trained_small, include_roles=False)
        assert bare.score >= full.score

    def test_dispatch(self, trained_small, dev_corpus):
        s = dev_corpus[0][0]
        assert actions(decode(s, trained_small, 1)) == actions(decode_greedy(s, trained_small))


def test_decode_corpus_workers_match_serial(trained_small, dev_corpus):
    sents = [s for s, _ in dev_corpus]
    serial = decode_corpus(sents, trained_small, 2)
    pooled = decode_corpus(sents, trained_small, 2, workers=3)
    assert [r.graph for r in serial] == [r.graph for r in pooled]
    assert all(isinstance(r.graph, SrlGraph) for r in serial)


def test_pooled_decode_leaves_grad_mode_on(trained_small, dev_corpus):
    sents = [s for s, _ in dev_corpus] * 3
    for _ in range(5):
        decode_corpus(sents, trained_small, 2, workers=4)
        assert grad_enabled()
