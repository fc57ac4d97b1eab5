"""End-to-end acceptance checks, one test per criterion; each prints a PASS/FAIL line."""
import math
import random
import time

import numpy as np
import pytest

from conftest import random_flows
from gbstflow import boost, evalkit, testkit
from gbstflow.cli import main
from gbstflow.settree import SetOperator, TreeConfig, Split, eval_statistic, fit_tree
from oracles import best_root_gain, power_statistic, random_instance

N_PER_CLASS = 1000
TEST_PER_CLASS = 500


@pytest.fixture
def verdict(capsys):
    def report(criterion: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail
    return report


@pytest.fixture(scope="module")
def rule_model():
    rule = testkit.SynthRule.make("forward_length_count")
    train = testkit.generate(rule, N_PER_CLASS, seed=1)
    test = testkit.generate(rule, TEST_PER_CLASS, seed=2)
    t0 = time.perf_counter()
    model = boost.fit(train, None, boost.BoostConfig())
    return model, test, time.perf_counter() - t0


def test_criterion_1_set_rule_learnability(rule_model, verdict):
    model, test, seconds = rule_model
    acc = evalkit.evaluate(model, test).accuracy
    verdict(1, acc >= 0.99 and seconds < 300,
            f"held-out accuracy {acc:.4f} (need >= 0.99), fit {seconds:.1f}s")


def test_criterion_2_early_detection_parity(verdict):
    rule = testkit.SynthRule.make("prefix_signature")
    model = boost.fit(testkit.generate(rule, N_PER_CLASS, seed=1), None, boost.BoostConfig())
    test = testkit.generate(rule, TEST_PER_CLASS, seed=2)
    full = evalkit.evaluate(model, test).accuracy
    p2 = evalkit.evaluate(model, test, prefix=2).accuracy
    verdict(2, abs(p2 - full) <= 0.01, f"accuracy full {full:.4f}, first 2 packets {p2:.4f}")


def test_criterion_3_statistic_oracle(verdict):
    ops = (SetOperator.COUNT, SetOperator.SUM, SetOperator.MEAN,
           SetOperator.INV_HARMONIC_MEAN, SetOperator.SECOND_MOMENT_MEAN)
    rnd = random.Random(2024)
    worst = 0.0
    for op in ops:
        for _ in range(1000):
            k = rnd.randint(1, 50)
            values = [0.0 if rnd.random() < 0.1 else rnd.random() * 10 ** rnd.uniform(-4, 4) for _ in range(k)]
            want = power_statistic(op, values)
            got = eval_statistic(op, values)
            worst = max(worst, abs(got - want) / want if want else abs(got))
    verdict(3, worst <= 1e-9, f"max relative error {worst:.2e} over 5,000 sets")


def test_criterion_4_split_search_oracle(verdict):
    mismatches, checked = [], 0
    for seed in range(30):
        flows, g, h = random_instance(np.random.default_rng(1000 + seed))
        want = best_root_gain(flows, g, h)
        tree = fit_tree(list(zip(flows, g, h)), TreeConfig(max_depth=1))
        got = tree.gain if isinstance(tree, Split) else -math.inf
        checked += 1
        if want > 0 and got != want or want <= 0 and isinstance(tree, Split):
            mismatches.append(seed)
    verdict(4, not mismatches, f"{checked} instances, exact-gain mismatches: {mismatches}")


def test_criterion_5_permutation_invariance(rule_model, verdict):
    model = rule_model[0]
    flows = random_flows(100, 55, max_packets=40)
    rng = np.random.default_rng(56)
    shuffled = [f.with_packets(f.packets[i] for i in rng.permutation(len(f))) for f in flows]
    a, b = boost.predict_scores(model, flows), boost.predict_scores(model, shuffled)
    single = all(boost.predict_score(model, x) == boost.predict_score(model, y) for x, y in zip(flows, shuffled))
    same = bool(np.array_equal(a, b)) and single
    verdict(5, same, f"{int(np.sum(a != b))} of 100 shuffled flows changed score")


def test_criterion_6_time_saving(verdict):
    overall = evalkit.time_saving(10.391, 4918.738)
    ntp = evalkit.time_saving(0.494, 15.407)
    ok = abs(overall - 99.79) <= 0.01 and abs(ntp - 96.8) <= 0.1
    verdict(6, ok, f"TS% {overall:.3f} and {ntp:.3f}")


def test_criterion_7_metric_identities(verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(500):
        tp, fp, tn, fn = (int(x) for x in rng.integers(1, 10**6, 4))
        r = evalkit.metrics_from_counts(tp, fp, tn, fn)
        errs = [r.recall - tp / (tp + fn), r.precision - tp / (tp + fp),
                r.accuracy - (tp + tn) / (tp + fp + tn + fn),
                r.f1 - 2 * r.recall * r.precision / (r.recall + r.precision)]
        worst = max(worst, max(abs(e) for e in errs))
    recall, precision = 0.999749975, 0.99984997
    f1 = 2 * recall * precision / (recall + precision)
    ok = worst <= 1e-12 and round(f1, 5) == round(0.99979997, 5)
    verdict(7, ok, f"max closed-form deviation {worst:.1e}; reference triple gives F1 {f1:.8f}")


def test_criterion_8_importance_contract(rule_model, verdict):
    imp = boost.feature_importance(rule_model[0])
    total = sum(imp.importance.values())
    top2 = [name for name, _ in imp.ranked()[:2]]
    ok = abs(total - 1) <= 1e-9 and set(top2) == {"length", "is_forward"}
    verdict(8, ok, f"sum {total:.12f}, top-2 {top2}")


def test_criterion_9_determinism(tmp_path, verdict):
    synth = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    for p in synth:
        assert main(["synth", "--rule", "forward_length_count", "--n", "100", "--seed", "9", "--out", str(p)]) == 0
    models = [tmp_path / "a.json", tmp_path / "b.json"]
    for m in models:
        assert main(["train", "--flows", str(synth[0]), "--seed", "3", "--out", str(m)]) == 0
    same_synth = synth[0].read_bytes() == synth[1].read_bytes()
    same_model = models[0].read_bytes() == models[1].read_bytes()
    verdict(9, same_synth and same_model, f"synth identical: {same_synth}, model identical: {same_model}")
