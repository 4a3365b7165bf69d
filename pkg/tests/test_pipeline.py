"""Agent chain: classification, generation, self-check, revision, degree scaling."""

from __future__ import annotations

import pytest

from aoecr.bed import NursingBed
from aoecr.commands import (
    BedCapabilities,
    parse_plan,
    plan_from_label,
    serialize_plan,
)
from aoecr.gateway import (
    OracleBackend,
    OracleConfig,
    ScriptedBackend,
    format_context_tag,
    render_prompt,
    render_sections,
)
from aoecr.gateway.prompts import (
    CLARIFY_INSTRUCTION,
    CLASSIFY_INSTRUCTION,
    GENERATE_INSTRUCTION,
    default_prompt_bundle,
)
from aoecr.pipeline import (
    AgentPipeline,
    Clarify,
    Execute,
    PipelineConfig,
    Refuse,
    RequestClass,
    SessionContext,
    apply_request_degree,
    matches_stop_word,
)

BUNDLE = default_prompt_bundle()


def ctx(session: str = "s1") -> SessionContext:
    return SessionContext(session_id=session)


def tagged(request: str, request_id: str, label: str, clarity: str = "high") -> str:
    return f"{request} {format_context_tag(request_id, label=label, clarity=clarity)}"


def oracle_pipeline(config: PipelineConfig | None = None, **oracle_kwargs) -> AgentPipeline:
    return AgentPipeline(OracleBackend(OracleConfig(**oracle_kwargs)), config)


# --- classification ---------------------------------------------------------------

def test_classify_single_action_via_oracle():
    pipe = oracle_pipeline()
    klass = pipe.classify_request(ctx(), tagged("raise the backrest", "c1", "backrest_extend"))
    assert klass is RequestClass.SINGLE_ACTION


def test_classify_sequence_via_scripted_transcript():
    backend = ScriptedBackend()
    request = "raise my legs then lift the bed"
    prompt = f"{CLASSIFY_INSTRUCTION}\nPatient request:\n{request}"
    backend.pin(render_prompt(BUNDLE, [], prompt), render_sections({"classification": "action_sequence"}))
    pipe = AgentPipeline(backend)
    assert pipe.classify_request(ctx(), request) is RequestClass.ACTION_SEQUENCE


def test_classify_unparseable_defaults_to_unclear():
    backend = ScriptedBackend()
    request = "wibble wobble zzz"
    prompt = f"{CLASSIFY_INSTRUCTION}\nPatient request:\n{request}"
    backend.pin(render_prompt(BUNDLE, [], prompt), "no sections at all, just prose")
    pipe = AgentPipeline(backend)
    assert pipe.classify_request(ctx(), request) is RequestClass.UNCLEAR


def test_classify_rejects_empty_request():
    with pytest.raises(ValueError):
        oracle_pipeline().classify_request(ctx(), "")


# --- generation --------------------------------------------------------------------

def test_generate_tentative_oracle_passthrough():
    pipe = oracle_pipeline(corruption=0.0)
    plan, response = pipe.generate_tentative(ctx(), tagged("help me sit up", "g1", "backrest_extend"))
    assert serialize_plan(plan) == serialize_plan(plan_from_label("backrest_extend"))
    assert response


def test_generate_tentative_forced_corruption_yields_wrong_plan():
    pipe = oracle_pipeline(corruption=1.0)
    plan, _ = pipe.generate_tentative(ctx(), tagged("help me sit up", "g2", "backrest_extend"))
    assert serialize_plan(plan) != serialize_plan(plan_from_label("backrest_extend"))


def test_generate_reprompts_once_on_malformed_emission():
    backend = ScriptedBackend()
    request = "raise the backrest"
    first_prompt = f"{GENERATE_INSTRUCTION}\nPatient request:\n{request}"
    backend.pin(render_prompt(BUNDLE, [], first_prompt), "totally malformed")
    good = render_sections(
        {"command": serialize_plan(plan_from_label("backrest_extend")), "response": "On it."}
    )
    # the retry prompt embeds the extraction error text
    retry_prompt = (
        f"{GENERATE_INSTRUCTION}\nPatient request:\n{request}\n"
        "Your previous answer was rejected: missing section: command. "
        "Emit exactly one [[command]] section with schema-valid JSON and one [[response]] section."
    )
    backend.pin(render_prompt(BUNDLE, [], retry_prompt), good)
    pipe = AgentPipeline(backend)
    plan, response = pipe.generate_tentative(ctx(), request)
    assert plan == plan_from_label("backrest_extend")
    assert response == "On it."


# --- self-check and revision ------------------------------------------------------------

def test_self_check_consistent_for_truth():
    pipe = oracle_pipeline(detection=1.0)
    request = tagged("sit me up", "sc1", "backrest_extend")
    verdict = pipe.self_check(ctx(), request, plan_from_label("backrest_extend"))
    assert verdict.consistent


def test_self_check_flags_corrupted_plan_with_reason():
    pipe = oracle_pipeline(detection=1.0)
    request = tagged("sit me up", "sc2", "backrest_extend")
    verdict = pipe.self_check(ctx(), request, plan_from_label("lift_retract"))
    assert not verdict.consistent
    assert "lift_retract" in verdict.reason


def test_revision_is_truth_restoring_when_uncorrupted():
    pipe = oracle_pipeline(corruption=1.0, revision_corruption=0.0, detection=1.0)
    request = tagged("sit me up", "rv1", "backrest_extend")
    decision = pipe.handle_request(ctx(), request)
    assert isinstance(decision, Execute)
    assert decision.plan == plan_from_label("backrest_extend")


def test_revision_exhaustion_falls_back_to_clarify():
    pipe = oracle_pipeline(corruption=1.0, revision_corruption=1.0, detection=1.0)
    request = tagged("sit me up", "rv2", "backrest_extend")
    session = ctx()
    decision = pipe.handle_request(session, request)
    assert isinstance(decision, Clarify)
    assert decision.question
    assert session.pending_clarification  # the answer will be merged next turn


def test_revision_accuracy_matches_closed_form():
    # corruption 0.5 every round, perfect detection, R=2:
    # P(correct execution) = 1 - 0.5^(R+1) = 0.875, exhaustion counts as failure
    config = PipelineConfig(classify_enabled=False, revision_rounds=2)
    pipe = oracle_pipeline(config, corruption=0.5, detection=1.0, seed=77)
    truth = serialize_plan(plan_from_label("backrest_extend"))
    n = 10_000
    correct = 0
    for i in range(n):
        decision = pipe.handle_request(ctx(), tagged("sit me up", f"cf-{i}", "backrest_extend"))
        if isinstance(decision, Execute) and serialize_plan(decision.plan) == truth:
            correct += 1
    assert abs(correct / n - 0.875) <= 0.02


# --- degree scaling --------------------------------------------------------------------

def test_degree_scaling_slightly():
    plan = apply_request_degree("raise the backrest slightly", plan_from_label("backrest_extend"))
    assert plan.steps[0].extent == 0.25


def test_degree_scaling_identity_without_degree():
    plan = plan_from_label("backrest_extend")
    assert apply_request_degree("raise the backrest", plan) is plan


def test_degree_scaling_never_amplifies():
    base = plan_from_label("sit_up")
    for phrase in ("slightly", "a bit", "halfway", "mostly", "fully"):
        scaled = apply_request_degree(f"sit me up {phrase}", base)
        for s_base, s_scaled in zip(base.steps, scaled.steps):
            assert s_scaled.extent <= s_base.extent + 1e-12


def test_degree_scaling_duration_ratio_a_bit():
    bed = NursingBed()
    base = plan_from_label("lift_extend")
    scaled = apply_request_degree("lift the bed a bit", base)
    t_base = bed.estimate_duration(base)
    t_scaled = bed.estimate_duration(scaled)
    assert t_scaled == pytest.approx(0.40 * t_base, abs=0.1)


# --- handle_request end to end ---------------------------------------------------------------

def test_happy_path_executes_canonical_plan():
    pipe = oracle_pipeline(corruption=0.0)
    decision = pipe.handle_request(ctx(), tagged("help me sit up please", "h1", "backrest_extend"))
    assert isinstance(decision, Execute)
    assert decision.plan == plan_from_label("backrest_extend")
    assert decision.response


def test_unclear_request_gets_clarifying_question():
    backend = ScriptedBackend()
    request = "mumble fizz"
    classify_prompt = f"{CLASSIFY_INSTRUCTION}\nPatient request:\n{request}"
    backend.pin(render_prompt(BUNDLE, [], classify_prompt), render_sections({"classification": "unclear"}))
    clarify_prompt = f"{CLARIFY_INSTRUCTION}\nPatient request:\n{request}"
    backend.pin(
        render_prompt(BUNDLE, [], clarify_prompt),
        render_sections({"question": "Which part of the bed should I adjust?"}),
    )
    pipe = AgentPipeline(backend)
    session = ctx()
    decision = pipe.handle_request(session, request)
    assert decision == Clarify("Which part of the bed should I adjust?")
    assert session.pending_clarification == request


def test_clarification_answer_is_merged_with_original():
    pipe = oracle_pipeline(corruption=0.0)
    session = ctx()
    session.pending_clarification = "could you move it"
    answer = tagged("the backrest, up please", "m1", "backrest_extend")
    decision = pipe.handle_request(session, answer)
    assert isinstance(decision, Execute)
    assert session.pending_clarification is None


def test_stop_word_bypasses_backend_entirely():
    class ExplodingBackend:
        def complete(self, messages):
            raise AssertionError("the stop path must not call any backend")

    pipe = AgentPipeline(ExplodingBackend())
    decision = pipe.handle_request(ctx(), "stop!")
    assert isinstance(decision, Execute)
    assert decision.plan.is_stop
    assert pipe.last_call_count == 0


def test_stop_word_needs_word_boundary():
    assert matches_stop_word("please stop now", ("stop",))
    assert not matches_stop_word("nonstop chatter", ("stop",))


def test_backend_failure_becomes_refuse():
    class DownBackend:
        def complete(self, messages):
            from aoecr.gateway.backends import BackendTransport

            raise BackendTransport("socket closed")

    pipe = AgentPipeline(DownBackend())
    decision = pipe.handle_request(ctx(), "raise the backrest")
    assert isinstance(decision, Refuse)


def test_capability_violation_becomes_refuse():
    config = PipelineConfig(
        classify_enabled=False,
        self_check_enabled=False,
        caps=BedCapabilities(allowed_actions=frozenset({"lift_extend"})),
    )
    pipe = oracle_pipeline(config, corruption=0.0)
    decision = pipe.handle_request(ctx(), tagged("sit me up", "cap1", "backrest_extend"))
    assert isinstance(decision, Refuse)
    assert "backrest_extend" in decision.reason


# --- chain invariants -------------------------------------------------------------------------

def test_gate_invariant_under_fault_injection():
    pipe = oracle_pipeline(corruption=0.7, detection=0.8, seed=13)
    for i in range(2000):
        decision = pipe.handle_request(ctx(), tagged("sit me up", f"gate-{i}", "backrest_extend"))
        if isinstance(decision, Execute):
            from aoecr.commands import validate_plan

            assert validate_plan(decision.plan) == []
        assert pipe.last_call_count <= pipe.config.max_backend_calls


def test_perfect_detection_never_executes_wrong_plan():
    pipe = oracle_pipeline(corruption=0.6, detection=1.0, seed=29)
    truth = serialize_plan(plan_from_label("backrest_extend"))
    for i in range(2000):
        decision = pipe.handle_request(ctx(), tagged("sit me up", f"pd-{i}", "backrest_extend"))
        if isinstance(decision, Execute):
            assert serialize_plan(decision.plan) == truth


def test_backend_call_ceiling():
    # worst case chain: classify + generate + (R+1) checks + R revisions
    config = PipelineConfig(revision_rounds=2)
    pipe = oracle_pipeline(config, corruption=1.0, revision_corruption=1.0, detection=1.0)
    decision = pipe.handle_request(ctx(), tagged("sit me up", "b1", "backrest_extend"))
    assert isinstance(decision, Clarify)
    assert pipe.last_call_count == 1 + 1 + 3 + 2  # 7 = ceiling minus the reprompt slot
    assert pipe.last_call_count <= config.max_backend_calls


def test_self_check_never_decreases_accuracy():
    # seeded sweep: same corruption draws with and without the check stage
    truth = serialize_plan(plan_from_label("backrest_extend"))
    n = 600
    for idx, eps in enumerate(e / 10 for e in range(1, 10)):
        results = {}
        for with_cos in (False, True):
            config = PipelineConfig(classify_enabled=False, self_check_enabled=with_cos)
            pipe = oracle_pipeline(config, corruption=eps, detection=0.9, seed=1000 + idx)
            correct = 0
            for i in range(n):
                decision = pipe.handle_request(
                    ctx(), tagged("sit me up", f"m{idx}-{i}", "backrest_extend")
                )
                if isinstance(decision, Execute) and serialize_plan(decision.plan) == truth:
                    correct += 1
            results[with_cos] = correct / n
        assert results[True] >= results[False], f"eps={eps}: {results}"


def test_identical_runs_are_deterministic():
    def run() -> list:
        pipe = oracle_pipeline(corruption=0.4, detection=0.9, seed=5)
        out = []
        for i in range(200):
            decision = pipe.handle_request(ctx(), tagged("sit me up", f"det-{i}", "backrest_extend"))
            out.append(serialize_plan(decision.plan) if isinstance(decision, Execute) else str(decision))
        return out

    assert run() == run()
