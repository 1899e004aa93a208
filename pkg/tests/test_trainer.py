import json
import math

import numpy as np
import pytest

import transrl.trainer as trainer_mod
from gradcases import _params, _perturb, sampled_check, tiny_model_config
from transrl.data import Sentence, SrlGraph, build_vocabs
from transrl.errors import ConfigurationError
from transrl.nn import tensor as T
from transrl.nn.tensor import default_dtype
from transrl.oracle import derive_actions
from transrl.scorer import ModelConfig, TransitionSrlModel
from transrl.trainer import TrainConfig, batch_loss, evaluate_model, sentence_loss, train
from transrl.transition import ARC_KINDS, legal_actions, run


def three_token():
    s = Sentence.from_forms(["w1", "w2", "w3"], "three")
    return s, SrlGraph.from_triplets([(1, 0, "A0"), (1, 2, "A1")])


def fast_config(**kw):
    base = dict(lr=1e-2, l2=0.0, max_epochs=3, patience=100, seed=0)
    base.update(kw)
    return TrainConfig(**base)


class TestSentenceLoss:
    def test_uniform_model_gives_log_of_legal_counts(self, train_corpus):
        model = TransitionSrlModel(ModelConfig.small(), build_vocabs(train_corpus))
        for name in ("action.1.W", "action.1.b", "role.1.W", "role.1.b"):
            model.store[name].data[:] = 0
        s, g = train_corpus[1]
        acts = derive_actions(s, g)
        states = run(s, acts)[:-1]
        want = sum(math.log(len(legal_actions(st))) for st in states)
        want += sum(a.kind in ARC_KINDS for a in acts) * math.log(model.n_roles)
        assert sentence_loss(s, g, model).item() == pytest.approx(want, rel=1e-5)

    def test_l2_term_is_added_once(self, train_corpus):
        model = TransitionSrlModel(ModelConfig.small(), build_vocabs(train_corpus))
        s, g = train_corpus[0]
        params = [p for _, p in model.store.trainable()]
        penalty = 0.1 * sum(float((p.data.astype(np.float64) ** 2).sum()) for p in params)
        base = sentence_loss(s, g, model).item()
        assert sentence_loss(s, g, model, l2=0.2).item() == pytest.approx(base + penalty, rel=1e-4)

    def test_nonnegative_and_finite(self, train_corpus):
        model = TransitionSrlModel(ModelConfig.small(), build_vocabs(train_corpus), seed=9)
        for s, g in train_corpus:
            v = sentence_loss(s, g, model).item()
            assert np.isfinite(v) and v >= 0

    def test_teacher_forcing_never_decodes(self, train_corpus, monkeypatch):
        def boom(*a, **k):
            raise AssertionError("decoder consulted during loss")
        monkeypatch.setattr(trainer_mod, "decode", boom)
        model = TransitionSrlModel(ModelConfig.small(), build_vocabs(train_corpus))
        sentence_loss(*train_corpus[0], model)

    def test_three_token_gradient(self):
        rng = np.random.default_rng(21)
        s, g = three_token()
        with default_dtype(np.float64):
            model = TransitionSrlModel(tiny_model_config(), build_vocabs([(s, g)]), rng=rng)
            _perturb(model.store, rng)
            err = sampled_check(lambda: sentence_loss(s, g, model, l2=0.2), _params(model.store), rng, points=50)
        assert err <= 1e-4

    def test_batch_loss_is_mean_plus_one_penalty(self, train_corpus):
        model = TransitionSrlModel(ModelConfig.small(), build_vocabs(train_corpus))
        batch = [(s, g, derive_actions(s, g)) for s, g in train_corpus[:3]]
        mean = np.mean([sentence_loss(s, g, model, a).item() for s, g, a in batch])
        pen = T.l2_penalty([p for _, p in model.store.trainable()], 0.2).item()
        assert batch_loss(batch, model, 0.2).item() == pytest.approx(mean + pen, rel=1e-4)


class TestTrain:
    def test_empty_corpus(self):
        with pytest.raises(ConfigurationError):
            train([], [], fast_config(), ModelConfig.small())

    def test_patience_stops_three_after_best(self, train_corpus):
        # dev is empty, so the score is flat at 0 and the best epoch is the first
        r = train(train_corpus[:2], [], fast_config(max_epochs=50, patience=3), ModelConfig.small())
        assert r.best_epoch == 1 and len(r.metrics) == 4 and r.stop_reason == "patience"

    def test_time_budget(self, train_corpus):
        r = train(train_corpus[:2], [], fast_config(max_epochs=50, max_seconds=0.0), ModelConfig.small())
        assert len(r.metrics) == 1 and r.stop_reason == "time" and r.stopped_early

    def test_identical_seeds_give_identical_logs(self, train_corpus, tmp_path):
        logs, stores = [], []
        for k in range(2):
            r = train(train_corpus[:4], train_corpus[:2], fast_config(max_epochs=2), ModelConfig.small(),
                      out_dir=str(tmp_path / str(k)))
            logs.append((tmp_path / str(k) / "metrics.jsonl").read_text())
            stores.append(r.model.store.state())
        assert logs[0] == logs[1]
        assert all(np.array_equal(stores[0][n], stores[1][n]) for n in stores[0])
        lines = [json.loads(x) for x in logs[0].splitlines()]
        assert [x["epoch"] for x in lines] == [1, 2]
        assert {"loss", "dev_arg_f1", "dev_prd_f1"} <= set(lines[0])
        assert (tmp_path / "0" / "model").is_dir()

    def test_default_config_loss_decreases_after_first_epoch(self, train_corpus):
        r = train(train_corpus, [], TrainConfig(max_epochs=2, patience=100), ModelConfig())
        assert r.metrics[1]["loss"] < r.metrics[0]["loss"]

    def test_defaults(self):
        c = TrainConfig()
        assert (c.lr, c.l2, c.batch_size) == (1e-5, 0.2, 16)

    def test_unknown_keys(self):
        with pytest.raises(ConfigurationError):
            TrainConfig.from_dict({"learning_rate": 1})

    def test_small_model_fits_the_training_set(self, train_corpus):
        r = train(train_corpus, train_corpus, fast_config(max_epochs=60, patience=60, target_score=1.0),
                  ModelConfig.small())
        m = evaluate_model(r.model, train_corpus)
        assert m["arg_f1"] >= 0.99 and m["prd_f1"] == 1.0
