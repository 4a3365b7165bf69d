"""Equalizer: simplex closure, feedback updates, presets, prompt rendering."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aoecr.equalizer import (
    METRICS,
    EqualizerWeights,
    Metric,
    MetricVector,
    emphasis_band,
    equalizer_presets,
    render_equalizer_lines,
    update_equalizer,
)

scores = st.floats(min_value=1.0, max_value=5.0, allow_nan=False)
feedbacks = st.builds(lambda s: MetricVector(tuple(s)), st.lists(scores, min_size=8, max_size=8))
raw_weights = st.lists(st.floats(min_value=0.0, max_value=100.0, allow_nan=False), min_size=8, max_size=8)


def test_exactly_eight_metrics_fixed_order():
    assert [m.value for m in METRICS] == [
        "conciseness",
        "appropriateness",
        "clarity",
        "empathy",
        "encouragement",
        "explanation",
        "safety",
        "understanding",
    ]


def test_uniform_default():
    w = EqualizerWeights.uniform()
    assert all(v == 0.125 for v in w.values)


def test_weights_validate_simplex():
    with pytest.raises(ValueError):
        EqualizerWeights(tuple([0.5] * 8))
    with pytest.raises(ValueError):
        EqualizerWeights((-0.1, 0.2, 0.125, 0.125, 0.125, 0.15, 0.15, 0.125))


def test_metric_vector_range():
    with pytest.raises(ValueError):
        MetricVector(tuple([0.5] * 8))
    with pytest.raises(ValueError):
        MetricVector(tuple([5.5] * 8))


def test_update_all_threes_is_identity():
    w = EqualizerWeights.normalized([1, 2, 3, 4, 5, 6, 7, 8])
    updated = update_equalizer(w, MetricVector.constant(3.0))
    for a, b in zip(w.values, updated.values):
        assert abs(a - b) <= 1e-12


def test_update_direction_low_score_gains():
    w = EqualizerWeights.uniform()
    fb = dict.fromkeys((m.value for m in METRICS), 3.0)
    fb["conciseness"] = 1.0
    updated = update_equalizer(w, MetricVector.from_dict(fb))
    assert updated[Metric.CONCISENESS] > 0.125
    for metric in METRICS:
        if metric is not Metric.CONCISENESS:
            assert updated[metric] < 0.125
    assert abs(sum(updated.values) - 1.0) <= 1e-12


def test_fifty_rounds_drives_weight_above_09():
    w = EqualizerWeights.uniform()
    fb = dict.fromkeys((m.value for m in METRICS), 5.0)
    fb["conciseness"] = 1.0
    vector = MetricVector.from_dict(fb)
    for _ in range(50):
        w = update_equalizer(w, vector)
    assert w[Metric.CONCISENESS] > 0.9


def test_update_matches_closed_form():
    # after n rounds of (target=1, rest=5): w_t = e^{0.4n} / (e^{0.4n} + 7)
    w = EqualizerWeights.uniform()
    fb = dict.fromkeys((m.value for m in METRICS), 5.0)
    fb["empathy"] = 1.0
    vector = MetricVector.from_dict(fb)
    for n in range(1, 20):
        w = update_equalizer(w, vector)
        expected = math.exp(0.4 * n) / (math.exp(0.4 * n) + 7)
        assert w[Metric.EMPATHY] == pytest.approx(expected, rel=1e-9)


@settings(max_examples=500, deadline=None)
@given(raw=raw_weights, fb=feedbacks, rate=st.floats(min_value=0.01, max_value=1.0))
def test_simplex_closure_fuzzed(raw, fb, rate):
    w = EqualizerWeights.normalized(raw)
    updated = update_equalizer(w, fb, rate)
    assert abs(sum(updated.values) - 1.0) <= 1e-9
    assert all(v >= 0.0 for v in updated.values)


def test_argmax_responsiveness():
    w = EqualizerWeights.normalized([5, 1, 1, 1, 1, 1, 1, 1])  # conciseness starts dominant
    fb = dict.fromkeys((m.value for m in METRICS), 4.0)
    fb["safety"] = 1.0  # safety persistently worst
    vector = MetricVector.from_dict(fb)
    for _ in range(60):
        w = update_equalizer(w, vector)
    assert w.ranked()[0][0] is Metric.SAFETY


def test_presets_on_simplex_with_expected_shape():
    presets = equalizer_presets()
    assert set(presets) == {"default", "conciseness", "safety_encouragement"}
    for weights in presets.values():
        assert abs(sum(weights.values) - 1.0) <= 1e-9
    assert presets["default"].values == EqualizerWeights.uniform().values
    conc = presets["conciseness"]
    assert conc[Metric.CONCISENESS] == pytest.approx(0.40)
    assert conc.ranked()[0][0] is Metric.CONCISENESS
    se = presets["safety_encouragement"]
    assert se[Metric.SAFETY] == se[Metric.ENCOURAGEMENT] == pytest.approx(0.25)
    others = [se[m] for m in METRICS if m not in (Metric.SAFETY, Metric.ENCOURAGEMENT)]
    assert all(se[Metric.SAFETY] > v for v in others)


def test_emphasis_bands():
    assert emphasis_band(0.40) == "dominant"
    assert emphasis_band(0.17) == "raised"
    assert emphasis_band(0.125) == "neutral"
    assert emphasis_band(0.05) == "de-emphasized"


def test_render_lines_uniform_all_neutral():
    lines = render_equalizer_lines(EqualizerWeights.uniform())
    assert len(lines) == 8
    assert all("(neutral)" in line for line in lines)


def test_render_lines_ranks_dominant_first():
    lines = render_equalizer_lines(equalizer_presets()["conciseness"])
    assert lines[0].startswith("- conciseness (dominant)")
