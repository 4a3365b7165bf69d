"""Acceptance suite: one test per release criterion, one PASS line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines. Headline accuracy figures published for the original fine-tuned
deployment are shape references only and are never asserted here; every
assertion below is against this stack's own contracts.
"""

from __future__ import annotations

import asyncio
import random
import time

import pytest

from aoecr.bed import DEFAULT_TICK, NursingBed
from aoecr.commands import plan_from_label, serialize_plan
from aoecr.equalizer import METRICS, EqualizerWeights, Metric, MetricVector, update_equalizer
from aoecr.evalharness import AblationStage, FaultProfile, evaluate_commands, run_ablation
from aoecr.forge import (
    ClarityLevel,
    default_seeds,
    expand_dataset,
    export_finetune,
    load_dataset,
    simulate_pair,
    token_retention,
)
from aoecr.gateway import OracleBackend, OracleConfig, extract_sections, format_context_tag
from aoecr.pipeline import AgentPipeline, Execute, PipelineConfig, SessionContext
from aoecr.platform.broker import InProcessBroker
from aoecr.platform.sessions import SessionStore
from aoecr.platform.stack import LocalStack, StackConfig
from aoecr.platform.wire import EnvelopeFactory, TopicKind, topic_name

ORACLE = OracleBackend(OracleConfig())


def report(criterion: int, text: str) -> None:
    print(f"PASS criterion {criterion}: {text}")


@pytest.fixture(scope="module")
def dataset_1600():
    pairs = [simulate_pair(seed, ORACLE, ORACLE) for seed in default_seeds(400)]
    return expand_dataset(pairs)


# --- criterion 1: calibration --------------------------------------------------------

def test_criterion_1_calibration(dataset_1600):
    zero = FaultProfile(
        prompt_only=dict.fromkeys(("high", "medium", "low", "unclear"), 0.0),
        finetuned=dict.fromkeys(("high", "medium", "low", "unclear"), 0.0),
    )
    started = time.monotonic()
    for stage in AblationStage:
        result = evaluate_commands(dataset_1600, stage, zero, seed=0)
        assert result.total.total == 1600
        assert result.total.accuracy == 1.0, f"{stage}: {result.to_dict()}"
        for clarity, cell in result.per_clarity.items():
            assert cell.accuracy == 1.0, f"{stage}/{clarity}"
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"calibration run took {elapsed:.1f}s"
    report(1, f"zero-fault oracle scores 100.00% at every stage and clarity in {elapsed:.1f}s")


# --- criterion 2: verification-chain efficacy ------------------------------------------

RATES = {"high": 0.05, "medium": 0.30, "low": 0.50, "unclear": 0.70}
DETECTION = 0.9
ROUNDS = 2


def expected_full_accuracy(eps: float, p: float, rounds: int, unclear: bool) -> float:
    """Closed form of the fault model.

    Per attempt the command is wrong with probability eps; a wrong command
    is caught with probability p (a correct one is never flagged) and each
    catch spends one of `rounds` revisions, which re-emit at the same eps.
    Executing therefore happens on the first attempt that is either correct
    or undetected-wrong; exhausting all rounds asks for clarification, which
    is the right call for a genuinely unclear request and a miss otherwise.

        P(correct) = (1-eps) * sum_{i=0..R} (eps*p)^i
        P(exhaust) = (eps*p)^(R+1)
    """
    geometric = (1.0 - (eps * p) ** (rounds + 1)) / (1.0 - eps * p)
    correct = (1.0 - eps) * geometric
    if unclear:
        correct += (eps * p) ** (rounds + 1)
    return correct


def test_criterion_2_chain_efficacy(dataset_1600):
    profile = FaultProfile(prompt_only=RATES, finetuned=RATES, detection=DETECTION, revision_rounds=ROUNDS)
    full = evaluate_commands(dataset_1600, AblationStage.FULL_WITH_COS, profile, seed=0)
    prompt_only = evaluate_commands(dataset_1600, AblationStage.PROMPT_ONLY, profile, seed=0)
    for clarity, eps in RATES.items():
        expected = expected_full_accuracy(eps, DETECTION, ROUNDS, unclear=(clarity == "unclear"))
        measured = full.per_clarity[clarity].accuracy
        assert abs(measured - expected) <= 0.03, (
            f"{clarity}: measured {measured:.4f}, closed form {expected:.4f}"
        )
        assert measured > prompt_only.per_clarity[clarity].accuracy, clarity
    report(
        2,
        "full-chain accuracy within ±3 points of the fault-model closed form "
        "and above raw generation in every clarity band",
    )


# --- criterion 3: stage monotonicity ------------------------------------------------------

def test_criterion_3_stage_monotonicity(dataset_1600):
    for seed in range(10):
        result = run_ablation(dataset_1600, FaultProfile(), seed=seed)
        totals = [r.total.accuracy for r in result.reports]
        assert totals[0] <= totals[1] <= totals[2], f"seed {seed}: {totals}"
    report(3, "ablation totals nondecreasing across the three stages for 10 seeds")


# --- criterion 4: bed safety ------------------------------------------------------------------

def _random_plan(rng: random.Random):
    from aoecr.commands import ALL_ACTIONS, CommandPlan, CommandStep, PlanKind

    kind = rng.choice([PlanKind.SINGLE, PlanKind.SEQUENCE, PlanKind.LOOP])
    def step():
        return CommandStep(rng.choice(ALL_ACTIONS), rng.uniform(0.05, 1.0), rng.uniform(0.2, 1.0))
    if kind is PlanKind.SINGLE:
        return CommandPlan(kind, (step(),))
    if kind is PlanKind.SEQUENCE:
        return CommandPlan(kind, tuple(step() for _ in range(rng.randint(2, 6))))
    return CommandPlan(kind, tuple(step() for _ in range(rng.randint(1, 3))), rng.randint(1, 8))


def test_criterion_4_bed_safety():
    rng = random.Random(20_24)
    bed = NursingBed()
    frozen = None
    for _ in range(10_000):
        roll = rng.random()
        if roll < 0.06:
            bed.start_plan(_random_plan(rng))
            frozen = None
        elif roll < 0.10:
            bed.interrupt()
            frozen = bed.positions()
        else:
            bed.tick(rng.uniform(0.01, 0.5))
            if frozen is not None:
                assert bed.positions() == frozen, "motion after interrupt"
        for pos in bed.positions().values():
            assert 0.0 <= pos <= 1.0, "stroke limit violated"

    for i in range(1_000):
        plan_rng = random.Random(5_000 + i)
        bed = NursingBed()
        warm = _random_plan(plan_rng)
        bed.start_plan(warm)
        for _ in range(plan_rng.randint(0, 30)):
            if bed.idle:
                break
            bed.tick(DEFAULT_TICK)
        bed.interrupt()
        plan = _random_plan(plan_rng)
        estimate = bed.estimate_duration(plan)
        sim = NursingBed()
        for mech, pos in bed.positions().items():
            sim._actuators[mech].position = pos
        sim.start_plan(plan)
        elapsed = 0.0
        while not sim.idle and elapsed < 5_000.0:
            sim.tick(DEFAULT_TICK)
            elapsed += DEFAULT_TICK
        assert abs(estimate - elapsed) <= DEFAULT_TICK + 1e-9, f"plan {i}"
    report(4, "10,000-step fuzz kept [0,1] and froze on interrupt; 1,000 duration estimates within one tick")


# --- criterion 5: degree scaling ------------------------------------------------------------------

def _simulated_duration(request: str, request_id: str) -> float:
    pipe = AgentPipeline(ORACLE, PipelineConfig())
    tagged = f"{request} {format_context_tag(request_id, label='lift_extend')}"
    decision = pipe.handle_request(SessionContext(session_id="deg"), tagged)
    assert isinstance(decision, Execute)
    bed = NursingBed()
    bed.start_plan(decision.plan)
    elapsed = 0.0
    while not bed.idle and elapsed < 100.0:
        bed.tick(DEFAULT_TICK)
        elapsed += DEFAULT_TICK
    return elapsed


def test_criterion_5_degree_scaling():
    base = _simulated_duration("raise the bed for me", "deg-base")
    a_bit = _simulated_duration("raise the bed for me a bit", "deg-bit")
    slightly = _simulated_duration("raise the bed for me slightly", "deg-sli")
    assert abs(a_bit - 0.40 * base) <= DEFAULT_TICK + 1e-9, (base, a_bit)
    assert abs(slightly - 0.25 * base) <= DEFAULT_TICK + 1e-9, (base, slightly)
    report(5, f"'a bit' ran {a_bit:.1f}s and 'slightly' {slightly:.1f}s of a {base:.1f}s full stroke")


# --- criterion 6: equalizer --------------------------------------------------------------------------

def test_criterion_6_equalizer():
    rng = random.Random(99)
    weights = EqualizerWeights.uniform()
    for _ in range(10_000):
        ballot = MetricVector(tuple(rng.uniform(1.0, 5.0) for _ in METRICS))
        weights = update_equalizer(weights, ballot, rate=rng.uniform(0.01, 1.0))
        assert abs(sum(weights.values) - 1.0) < 1e-9
        assert all(v >= 0.0 for v in weights.values)

    neutral = update_equalizer(EqualizerWeights.uniform(), MetricVector.constant(3.0))
    assert all(abs(v - 0.125) <= 1e-12 for v in neutral.values)

    w = EqualizerWeights.uniform()
    scores = dict.fromkeys((m.value for m in METRICS), 5.0)
    scores["safety"] = 1.0
    for _ in range(50):
        w = update_equalizer(w, MetricVector.from_dict(scores))
    assert w[Metric.SAFETY] > 0.9
    report(6, "simplex closed under 10,000 fuzzed updates; all-3 identity; low metric dominates in 50 rounds")


# --- criterion 7: dataset invariants ---------------------------------------------------------------------

def test_criterion_7_dataset_invariants(dataset_1600, tmp_path):
    assert len(dataset_1600) == 1600

    by_id = {p.id: p for p in dataset_1600}
    highs = [p for p in dataset_1600 if p.clarity is ClarityLevel.HIGH]
    assert len(highs) == 400
    for pair in dataset_1600:
        assert pair.canonical_command == serialize_plan(plan_from_label(pair.action_label))
        if pair.clarity is ClarityLevel.HIGH:
            assert pair.parent_id is None
        else:
            parent = by_id[pair.parent_id]
            assert parent.clarity is ClarityLevel.HIGH
            assert (parent.action_label, parent.canonical_command, parent.nurse_response) == (
                pair.action_label,
                pair.canonical_command,
                pair.nurse_response,
            )

    retention = {level: [] for level in ClarityLevel}
    for pair in dataset_1600:
        if pair.clarity is ClarityLevel.HIGH:
            continue
        parent = by_id[pair.parent_id]
        retention[pair.clarity].append(token_retention(parent.patient_request, pair.patient_request))
    means = {level: sum(v) / len(v) for level, v in retention.items() if v}
    assert 1.0 > means[ClarityLevel.MEDIUM] > means[ClarityLevel.LOW] > means[ClarityLevel.UNCLEAR]

    from aoecr.commands import parse_plan, validate_plan

    path = export_finetune(dataset_1600, tmp_path / "tune.jsonl")
    import json as _json

    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1600
    for line in lines:
        record = _json.loads(line)
        sections = extract_sections(record["output"], required=("command", "response"))
        assert validate_plan(parse_plan(sections["command"])) == []
    report(
        7,
        "400 seeds gave 1600 pairs with sound provenance, retention "
        f"{means[ClarityLevel.MEDIUM]:.2f} > {means[ClarityLevel.LOW]:.2f} > "
        f"{means[ClarityLevel.UNCLEAR]:.2f}, and a fully re-parseable export",
    )


# --- criterion 8: wire and runtime -----------------------------------------------------------------------

class CountingOracle:
    def __init__(self):
        self.inner = OracleBackend(OracleConfig())
        self.calls = 0

    def complete(self, messages):
        self.calls += 1
        return self.inner.complete(messages)


def test_criterion_8_end_to_end(tmp_path):
    tick = 0.05

    async def scenario() -> tuple[float, float]:
        backend = CountingOracle()
        stack = LocalStack(
            StackConfig(data_dir=str(tmp_path / "data"), tick_interval=tick, telemetry_interval=tick),
            backend=backend,
            expert_backend=backend.inner,
        )
        await stack.start()
        sid = stack.create_session()
        stream = stack.broker.subscribe(
            topic_name(sid, TopicKind.TELEMETRY), topic_name(sid, TopicKind.DECISION)
        )

        # request -> first moving telemetry frame
        started = time.monotonic()
        await stack.publish(sid, TopicKind.REQUEST, {"text": "please raise the backrest"})
        while True:
            envelope = await asyncio.wait_for(stream.get(), timeout=10.0)
            if (
                envelope.kind == TopicKind.TELEMETRY.value
                and envelope.payload["mechanisms"]["backrest"]["moving"]
            ):
                break
        motion_latency = time.monotonic() - started
        assert motion_latency < 1.0, f"bed started moving after {motion_latency:.2f}s"

        # interrupt -> motionless within 2 ticks of bed time, zero model calls
        calls_before = backend.calls
        clock_at_interrupt = stack.beds[sid].bed.clock
        await stack.publish(sid, TopicKind.INTERRUPT, {})
        while True:
            envelope = await asyncio.wait_for(stream.get(), timeout=10.0)
            if envelope.kind != TopicKind.TELEMETRY.value:
                continue
            if not envelope.payload["mechanisms"]["backrest"]["moving"]:
                frozen_clock = envelope.payload["ts"]
                break
        tick_delay = (frozen_clock - clock_at_interrupt) / tick
        assert tick_delay <= 2.0 + 1e-6, f"interrupt took {tick_delay:.1f} ticks"
        assert backend.calls == calls_before, "interrupt path touched the model backend"

        # feedback x3, crash, replay reconstructs weights exactly
        scores = dict.fromkeys((m.value for m in METRICS), 4.0)
        scores["conciseness"] = 1.0
        for _ in range(3):
            await stack.publish(sid, TopicKind.FEEDBACK, {"scores": scores})
        deadline = time.monotonic() + 5.0
        while time.monotonic() < deadline:
            _, count = stack.store.load_equalizer(sid)
            if count == 3:
                break
            await asyncio.sleep(0.01)
        persisted, count = stack.store.load_equalizer(sid)
        assert count == 3
        await stack.stop()  # crash

        fresh_store = SessionStore(tmp_path / "data")
        replayed, replay_count = fresh_store.replay_equalizer(sid)
        assert replay_count == 3
        assert replayed.values == persisted.values  # bit-exact reconstruction

        expected = EqualizerWeights.uniform()
        for _ in range(3):
            expected = update_equalizer(expected, MetricVector.from_dict(scores))
        assert replayed.values == expected.values
        return motion_latency, tick_delay

    motion_latency, tick_delay = asyncio.run(scenario())
    report(
        8,
        f"request->motion {motion_latency * 1000:.0f} ms; interrupt->still {tick_delay:.1f} ticks "
        "with zero model calls; crash replay reconstructed the equalizer bit-exactly",
    )
