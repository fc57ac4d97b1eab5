import pytest

from gbstflow import testkit
from gbstflow.flowmodel import Label


@pytest.mark.parametrize("name", testkit.RULE_NAMES)
def test_generate_counts_and_rule(name):
    rule = testkit.SynthRule.make(name)
    flows = testkit.generate(rule, 60, seed=1)
    assert sum(f.label is Label.ATTACK for f in flows) == 60
    assert sum(f.label is Label.BENIGN for f in flows) == 60
    for f in flows:
        f.check()
        assert testkit.MIN_PACKETS <= len(f) <= testkit.MAX_PACKETS
        assert rule.holds(f) == (f.label is Label.ATTACK)
        assert f.vector_tag == (name if f.label is Label.ATTACK else "BENIGN")


def test_generation_is_seeded():
    rule = testkit.SynthRule.make("forward_length_count")
    assert testkit.generate(rule, 20, seed=5) == testkit.generate(rule, 20, seed=5)
    assert testkit.generate(rule, 20, seed=5) != testkit.generate(rule, 20, seed=6)


def test_forward_length_count_rule_definition():
    from conftest import make_flow
    rule = testkit.SynthRule.make("forward_length_count")
    assert rule.holds(make_flow([71] * 5))
    assert not rule.holds(make_flow([70] * 9))
    assert not rule.holds(make_flow([500] * 5, forward=[True, True, True, True, False]))
    assert testkit.SynthRule.make("forward_length_count", count=2).holds(make_flow([100, 100]))


def test_prefix_signature_signal_lives_in_first_two_packets():
    from gbstflow.evalkit import truncate
    rule = testkit.SynthRule.make("prefix_signature")
    for f in testkit.generate(rule, 50, seed=2):
        assert rule.holds(truncate(f, 2)) == rule.holds(f)


def test_noise_flips_some_labels():
    rule = testkit.SynthRule.make("forward_length_count", noise=0.2)
    flows = testkit.generate(rule, 200, seed=3)
    flipped = sum(rule.holds(f) != (f.label is Label.ATTACK) for f in flows)
    assert 40 < flipped < 120


def test_bad_rules():
    with pytest.raises(ValueError):
        testkit.SynthRule.make("nope")
    with pytest.raises(ValueError):
        testkit.SynthRule.make("forward_length_count", noise=0.5)
    with pytest.raises(ValueError):
        testkit.SynthRule.make("forward_length_count", width=3)
    with pytest.raises(ValueError):
        testkit.generate(testkit.SynthRule.make("prefix_signature"), 0, seed=1)
