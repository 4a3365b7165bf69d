"""Expert optimization and panel scoring."""

from __future__ import annotations

import json

import pytest

from aoecr.equalizer import METRIC_NAMES, EqualizerWeights, MetricVector, equalizer_presets
from aoecr.expert import (
    AllBallotsInvalid,
    optimization_prompt,
    optimize_response,
    score_response,
    scoring_prompt,
)
from aoecr.gateway import OracleBackend, OracleConfig, ScriptedBackend, render_sections
from aoecr.gateway.backends import BackendTransport

TENTATIVE = "Of course. I'm raising your backrest now."
REQUEST = "please raise the backrest"


class FailingBackend:
    def complete(self, messages):
        raise BackendTransport("connection refused")


def constant_judge(value: float) -> ScriptedBackend:
    backend = ScriptedBackend()
    ballot = {name: value for name in METRIC_NAMES}
    backend.pin(scoring_prompt(TENTATIVE, REQUEST), render_sections({"scores": json.dumps(ballot)}))
    return backend


# --- optimize_response -----------------------------------------------------------

def test_optimize_prompt_lists_all_metrics_with_bands():
    text = "\n".join(m.content for m in optimization_prompt(TENTATIVE, REQUEST, EqualizerWeights.uniform()))
    for name in METRIC_NAMES:
        assert f"- {name} (neutral)" in text


def test_optimize_prompt_ranks_dominant_conciseness_first():
    weights = equalizer_presets()["conciseness"]
    text = optimization_prompt(TENTATIVE, REQUEST, weights)[-1].content
    lines = [line for line in text.splitlines() if line.startswith("- ")]
    assert lines[0].startswith("- conciseness (dominant)")


def test_optimize_scripted_transform():
    backend = ScriptedBackend()
    weights = EqualizerWeights.uniform()
    backend.pin(
        optimization_prompt(TENTATIVE, REQUEST, weights),
        render_sections({"response": "Of course, dear. I'm raising your backrest now, nice and gently."}),
    )
    out = optimize_response(TENTATIVE, REQUEST, weights, backend)
    assert out == "Of course, dear. I'm raising your backrest now, nice and gently."


def test_optimize_backend_failure_returns_tentative_verbatim():
    out = optimize_response(TENTATIVE, REQUEST, EqualizerWeights.uniform(), FailingBackend())
    assert out == TENTATIVE


def test_optimize_never_returns_empty():
    backend = ScriptedBackend()
    weights = EqualizerWeights.uniform()
    backend.pin(optimization_prompt(TENTATIVE, REQUEST, weights), render_sections({"response": ""}))
    assert optimize_response(TENTATIVE, REQUEST, weights, backend) == TENTATIVE


def test_optimize_oracle_conciseness_shortens():
    long_tentative = "Of course. I'm raising your backrest now. It will take a moment to finish."
    oracle = OracleBackend(OracleConfig())
    short = optimize_response(long_tentative, REQUEST, equalizer_presets()["conciseness"], oracle)
    default = optimize_response(long_tentative, REQUEST, EqualizerWeights.uniform(), oracle)
    assert len(short) < len(long_tentative)
    assert len(default) > len(long_tentative)


# --- score_response ---------------------------------------------------------------

def test_single_expert_constant_ballot():
    result = score_response(TENTATIVE, REQUEST, [constant_judge(3)])
    assert result.overall == pytest.approx(3.0)
    assert result.mean.scores == MetricVector.constant(3.0).scores


def test_two_experts_average():
    result = score_response(TENTATIVE, REQUEST, [constant_judge(2), constant_judge(4)])
    assert result.mean.scores == tuple([3.0] * 8)
    assert result.overall == pytest.approx(3.0)


def test_three_expert_panel_matches_hand_computation():
    ballots = [
        {name: 2 for name in METRIC_NAMES},
        {name: 3 for name in METRIC_NAMES},
        {name: 5 for name in METRIC_NAMES},
    ]
    ballots[0]["empathy"] = 4
    ballots[1]["empathy"] = 4
    ballots[2]["empathy"] = 4
    panel = []
    for ballot in ballots:
        backend = ScriptedBackend()
        backend.pin(scoring_prompt(TENTATIVE, REQUEST), render_sections({"scores": json.dumps(ballot)}))
        panel.append(backend)
    result = score_response(TENTATIVE, REQUEST, panel)
    # hand computed: all metrics (2+3+5)/3 = 10/3 except empathy = 4
    expected_by_metric = {name: 10.0 / 3.0 for name in METRIC_NAMES}
    expected_by_metric["empathy"] = 4.0
    assert result.mean.as_dict() == pytest.approx(expected_by_metric)
    assert result.overall == pytest.approx(sum(expected_by_metric.values()) / 8.0)


def test_invalid_ballots_dropped_whole():
    bad = ScriptedBackend()
    ballot = {name: 3 for name in METRIC_NAMES}
    ballot["safety"] = 9  # out of range invalidates the whole ballot
    bad.pin(scoring_prompt(TENTATIVE, REQUEST), render_sections({"scores": json.dumps(ballot)}))
    result = score_response(TENTATIVE, REQUEST, [bad, constant_judge(4)])
    assert result.invalid_count == 1
    assert result.overall == pytest.approx(4.0)


def test_all_ballots_invalid_raises():
    with pytest.raises(AllBallotsInvalid):
        score_response(TENTATIVE, REQUEST, [FailingBackend(), FailingBackend()])


def test_missing_metric_invalidates_ballot():
    bad = ScriptedBackend()
    ballot = {name: 3 for name in METRIC_NAMES if name != "clarity"}
    bad.pin(scoring_prompt(TENTATIVE, REQUEST), render_sections({"scores": json.dumps(ballot)}))
    with pytest.raises(AllBallotsInvalid):
        score_response(TENTATIVE, REQUEST, [bad])


def test_empty_panel_rejected():
    with pytest.raises(ValueError):
        score_response(TENTATIVE, REQUEST, [])
