"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records one ``criterion N: PASS|FAIL ...`` line, printed in the
terminal summary.  Criterion 4 trains the default configuration against a
ten-minute wall-clock budget and dominates the runtime of this file.
"""

import math
import os
import time

import numpy as np
from gradcases import LAYER_CASES, OP_CASES, sampled_check, sentence_loss_case
from synth import fixture, random_walk, synthetic_corpus
from transrl.cli import main
from transrl.conll import read_json_corpus
from transrl.data import build_vocabs
from transrl.decoder import decode_beam, decode_greedy
from transrl.evaluator import bench_decode, frame_violations, role_violations
from transrl.nn import tensor as T
from transrl.nn.gradcheck import check_gradients
from transrl.nn.tensor import default_dtype, no_grad
from transrl.oracle import action_bound, derive_actions, replay
from transrl.scorer import ModelConfig, TransitionSrlModel
from transrl.trainer import TrainConfig, evaluate_model, train
from transrl.transition import Action, ParsingOrder, check_invariants, inspect_target, run
from test_evaluator import FRAME_ROLES, reference_violations

RESULTS = []
CORPUS = synthetic_corpus(seed=2024, count=1000, max_len=12)


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_oracle_roundtrip():
    t0 = time.perf_counter()
    failures = 0
    for order in ParsingOrder:
        for s, g in CORPUS:
            try:
                failures += replay(s, derive_actions(s, g, order), order) != g
            except Exception:
                failures += 1
    elapsed = time.perf_counter() - t0
    assert all(len(s) <= 12 and len(g.predicates) <= 3 for s, g in CORPUS)
    record(1, failures == 0 and elapsed < 10,
           f"{len(CORPUS)} graphs x 3 orders, {failures} failures, {elapsed:.2f}s")


def test_criterion_2_legality_fuzz():
    rng = np.random.default_rng(99)
    orders = list(ParsingOrder)
    failures = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 13))
        try:
            states, actions = random_walk(rng, n, orders[rng.integers(3)])
            for s in states:
                check_invariants(s, n)
            assert len(actions) <= action_bound(n, len(states[-1].predicates))
        except AssertionError:
            failures += 1
    record(2, failures == 0, f"10000 walks, {failures} failures")


def test_criterion_3_gradients():
    rng = np.random.default_rng(5)
    worst = {}
    with default_dtype(np.float64):
        for name, case in {**OP_CASES, **LAYER_CASES}.items():
            f, inputs = case(rng)
            worst[name] = max(check_gradients(f, inputs).values())
        f, params, _ = sentence_loss_case(rng)
        worst["sentence_loss"] = sampled_check(f, params, rng, points=100)
    name = max(worst, key=worst.get)
    record(3, worst[name] <= 1e-4,
           f"{len(worst)} checks, max relative error {worst[name]:.2e} ({name}), e2e {worst['sentence_loss']:.2e}")


def test_criterion_4_overfit_default_config(train_corpus):
    budget = 600.0
    cfg = TrainConfig(max_epochs=500, patience=500, target_score=0.99, select_metric="arg_f1",
                      max_seconds=budget)
    t0 = time.perf_counter()
    result = train(train_corpus, train_corpus, cfg, ModelConfig())
    elapsed = time.perf_counter() - t0
    m = evaluate_model(result.model, train_corpus)
    ok = m["arg_f1"] >= 0.99 and m["prd_f1"] == 1.0 and elapsed < budget
    record(4, ok, f"default config, {len(result.metrics)} epochs in {elapsed:.0f}s (stop: {result.stop_reason}), "
                  f"train Arg-F1 {m['arg_f1']:.3f}, Prd-F1 {m['prd_f1']:.3f}")


def test_criterion_5_beam_dominance(trained_small, dev_corpus):
    dominated = identical = 0
    for s, _ in dev_corpus:
        g = decode_greedy(s, trained_small)
        b1 = decode_beam(s, trained_small, 1)
        b32 = decode_beam(s, trained_small, 32)
        dominated += b32.score >= b1.score
        identical += (b1.score == g.score and b1.graph == g.graph
                      and [t.action for t in b1.trace] == [t.action for t in g.trace])
    n = len(dev_corpus)
    record(5, dominated == n and identical == n,
           f"{dominated}/{n} with score(B=32) >= score(B=1), {identical}/{n} B=1 identical to greedy")


def test_criterion_6_high_order_ablation(train_corpus):
    vocabs = build_vocabs(train_corpus)
    on = TransitionSrlModel(ModelConfig.small(), vocabs, seed=1)
    off = TransitionSrlModel(ModelConfig.small(high_order=False), vocabs, seed=1)
    no_extra = not any(n.startswith("high.") or ".high." in n for n in off.store)
    off.copy_params_from(on)
    on.store["action.0.high.W"].data[:] = 0
    on.store["role.0.high.W"].data[:] = 0
    mismatches = checked = 0
    with no_grad():
        for s, g in train_corpus:
            e_on, e_off = on.encode_sentence(s), off.encode_sentence(s)
            for st in run(s, derive_actions(s, g))[:-1]:
                a, b = on.score(st, e_on, need_roles=True), off.score(st, e_off, need_roles=True)
                gv = off.state_repr(st, e_off)
                vanilla = off.action_out(T.tanh(off.action_in(gv))).data
                checked += 1
                mismatches += not (np.array_equal(a.action_logits.data, b.action_logits.data)
                                   and np.array_equal(a.role_logits.data, b.role_logits.data)
                                   and np.array_equal(b.action_logits.data, vanilla))
    record(6, no_extra and mismatches == 0,
           f"{checked} states, {mismatches} mismatches, high-order parameters absent when off: {no_extra}")


def test_criterion_7_role_violations():
    rng = np.random.default_rng(7)
    mismatches = 0
    for _ in range(1000):
        idx = sorted(rng.choice(20, size=int(rng.integers(0, 7)), replace=False).tolist())
        frame = [(i, FRAME_ROLES[rng.integers(len(FRAME_ROLES))]) for i in idx]
        mismatches += frame_violations(frame) != reference_violations(frame)
    counts = role_violations([g for _, g in read_json_corpus(fixture("violations.json"))])
    record(7, mismatches == 0 and counts == (4, 2, 1),
           f"1000 random frames, {mismatches} mismatches; fixture (U,C,R) = {counts}, hand count (4, 2, 1)")


def test_criterion_8_close_first_monotone():
    violations = 0
    for s, g in CORPUS:
        acts = derive_actions(s, g, ParsingOrder.CLOSE_FIRST)
        last = {}
        for st, a in zip(run(s, acts), acts):
            if a.kind in (Action.LEFT_ARC, Action.RIGHT_ARC):
                _, tok = inspect_target(st)
                d = abs(tok - st.lambda_p)
                violations += d < last.get(st.lambda_p, 0)
                last[st.lambda_p] = d
    record(8, violations == 0, f"{len(CORPUS)} oracle sequences, {violations} violations")


def test_criterion_9_throughput_scaling(trained_small, dev_corpus):
    base = [s for s, _ in dev_corpus] * 2
    tps, t1 = bench_decode(base, trained_small, repeats=5)
    _, t2 = bench_decode(base * 2, trained_small, repeats=5)
    ratio = float(np.median(t2) / np.median(t1))
    ok = math.isfinite(tps) and tps > 0 and 1.5 <= ratio <= 2.5
    record(9, ok, f"{tps:.0f} tokens/s, wall-time ratio {ratio:.2f} for 2x corpus (allowed 1.50-2.50)")


def _run_pipeline(root):
    out = os.path.join(root, "run")
    pred = os.path.join(root, "pred.json")
    common = ["--seed", "7", "--log-level", "error"]
    assert main(["train", "--train", fixture("train.json"), "--dev", fixture("dev.json"), "--out", out,
                 "--config", fixture("small_config.json"), "--epochs", "4"] + common) == 0
    assert main(["decode", "--model", os.path.join(out, "model"), "--input", fixture("dev.json"),
                 "--output", pred, "--beam", "4"] + common) == 0
    files = {}
    for dirpath, _, names in os.walk(root):
        for name in names:
            path = os.path.join(dirpath, name)
            with open(path, "rb") as f:
                files[os.path.relpath(path, root)] = f.read()
    return files


def test_criterion_10_determinism(tmp_path):
    a = _run_pipeline(str(tmp_path / "a"))
    b = _run_pipeline(str(tmp_path / "b"))
    differing = sorted(k for k in set(a) | set(b) if a.get(k) != b.get(k))
    record(10, not differing and len(a) > 2,
           f"{len(a)} files compared (checkpoint, metrics, decoded output), {len(differing)} differ")

