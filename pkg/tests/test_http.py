"""HTTP/WS bridge and end-to-end integration on the in-process stack."""

from __future__ import annotations

import time

import pytest
from fastapi.testclient import TestClient

from aoecr.gateway import OracleBackend, OracleConfig
from aoecr.platform.http import create_app
from aoecr.platform.stack import LocalStack, StackConfig


class CountingOracle:
    def __init__(self):
        self.inner = OracleBackend(OracleConfig())
        self.calls = 0

    def complete(self, messages):
        self.calls += 1
        return self.inner.complete(messages)


@pytest.fixture()
def stack_client(tmp_path):
    backend = CountingOracle()
    stack = LocalStack(
        StackConfig(data_dir=str(tmp_path), tick_interval=0.02, telemetry_interval=0.04),
        backend=backend,
        expert_backend=backend.inner,
    )
    app = create_app(stack)
    with TestClient(app) as client:
        yield client, stack, backend


def create_session(client) -> str:
    response = client.post("/api/session")
    assert response.status_code == 200
    return response.json()["session_id"]


def read_until(ws, kind: str, limit: int = 400) -> dict:
    for _ in range(limit):
        frame = ws.receive_json()
        if frame["kind"] == kind:
            return frame
    raise AssertionError(f"no {kind} frame within {limit} frames")


def test_unknown_session_is_404(stack_client):
    client, _, _ = stack_client
    assert client.post("/api/session/nope/request", json={"text": "hi"}).status_code == 404
    assert client.get("/api/session/nope/log").status_code == 404


def test_malformed_body_is_422(stack_client):
    client, _, _ = stack_client
    sid = create_session(client)
    assert client.post(f"/api/session/{sid}/request", json={}).status_code == 422
    assert client.post(f"/api/session/{sid}/request", json={"text": ""}).status_code == 422
    assert client.post(f"/api/session/{sid}/feedback", json={"wrong": 1}).status_code == 422


def test_request_round_trip_delivers_decision_on_ws(stack_client):
    client, _, _ = stack_client
    sid = create_session(client)
    with client.websocket_connect(f"/api/session/{sid}/stream") as ws:
        response = client.post(f"/api/session/{sid}/request", json={"text": "please raise the backrest"})
        assert response.status_code == 200
        frame = read_until(ws, "decision")
        assert frame["payload"]["kind"] == "execute"
        assert frame["payload"]["plan"]["steps"][0]["action"] == "backrest_extend"
        assert frame["payload"]["response"]


def test_request_to_bed_motion_under_one_second(stack_client):
    client, stack, _ = stack_client
    sid = create_session(client)
    with client.websocket_connect(f"/api/session/{sid}/stream") as ws:
        started = time.monotonic()
        client.post(f"/api/session/{sid}/request", json={"text": "sit me up please"})
        while True:
            frame = ws.receive_json()
            if frame["kind"] == "telemetry" and frame["payload"]["mechanisms"]["backrest"]["pos"] > 0:
                break
            assert time.monotonic() - started < 5.0
        elapsed = time.monotonic() - started
        assert elapsed < 1.0, f"bed took {elapsed:.2f}s to start moving"


def test_interrupt_freezes_pose_with_zero_backend_calls(stack_client):
    client, stack, backend = stack_client
    sid = create_session(client)
    with client.websocket_connect(f"/api/session/{sid}/stream") as ws:
        client.post(f"/api/session/{sid}/request", json={"text": "raise the bed higher"})
        while True:
            frame = ws.receive_json()
            if frame["kind"] == "telemetry" and frame["payload"]["mechanisms"]["lift"]["moving"]:
                break
        calls_before = backend.calls
        client.post(f"/api/session/{sid}/interrupt")
        # within two ticks the bed must be frozen; wait for a quiet frame
        deadline = time.monotonic() + 3.0
        frozen_pos = None
        while time.monotonic() < deadline:
            frame = ws.receive_json()
            if frame["kind"] != "telemetry":
                continue
            mech = frame["payload"]["mechanisms"]["lift"]
            if not mech["moving"]:
                frozen_pos = mech["pos"]
                break
        assert frozen_pos is not None, "bed never reported motionless"
        assert backend.calls == calls_before  # the hot path never touches the model
        # pose stays frozen on subsequent frames
        for _ in range(3):
            frame = read_until(ws, "telemetry")
            assert frame["payload"]["mechanisms"]["lift"]["pos"] == frozen_pos


def test_feedback_updates_equalizer_endpoint(stack_client):
    client, _, _ = stack_client
    sid = create_session(client)
    scores = {
        "conciseness": 3, "appropriateness": 3, "clarity": 3, "empathy": 1,
        "encouragement": 3, "explanation": 3, "safety": 3, "understanding": 3,
    }
    client.post(f"/api/session/{sid}/feedback", json={"scores": scores})
    deadline = time.monotonic() + 3.0
    while time.monotonic() < deadline:
        doc = client.get(f"/api/session/{sid}/equalizer").json()
        if doc["update_count"] == 1:
            break
        time.sleep(0.02)
    assert doc["update_count"] == 1
    assert doc["weights"]["empathy"] > 0.125


def test_neutral_feedback_leaves_weights_unchanged(stack_client):
    client, _, _ = stack_client
    sid = create_session(client)
    scores = dict.fromkeys(
        ("conciseness", "appropriateness", "clarity", "empathy",
         "encouragement", "explanation", "safety", "understanding"), 3,
    )
    client.post(f"/api/session/{sid}/feedback", json={"scores": scores})
    deadline = time.monotonic() + 3.0
    while time.monotonic() < deadline:
        doc = client.get(f"/api/session/{sid}/equalizer").json()
        if doc["update_count"] == 1:
            break
        time.sleep(0.02)
    assert all(abs(w - 0.125) < 1e-12 for w in doc["weights"].values())


def test_log_endpoint_keeps_request_order(stack_client):
    client, _, _ = stack_client
    sid = create_session(client)
    for text in ("sit me up", "lower the bed", "raise my left leg"):
        client.post(f"/api/session/{sid}/request", json={"text": text})
    deadline = time.monotonic() + 5.0
    while time.monotonic() < deadline:
        events = client.get(f"/api/session/{sid}/log").json()["events"]
        requests = [e for e in events if e["type"] == "request"]
        if len(requests) == 3:
            break
        time.sleep(0.02)
    assert [e["payload"]["text"] for e in requests] == [
        "sit me up",
        "lower the bed",
        "raise my left leg",
    ]


def test_clarify_flow_over_http(stack_client):
    client, _, _ = stack_client
    sid = create_session(client)
    with client.websocket_connect(f"/api/session/{sid}/stream") as ws:
        client.post(f"/api/session/{sid}/request", json={"text": "mumble fizz unintelligible"})
        frame = read_until(ws, "decision")
        assert frame["payload"]["kind"] == "clarify"
        assert frame["payload"]["question"]
        # the answer is merged with the original and executed
        client.post(f"/api/session/{sid}/request", json={"text": "I meant raise the backrest"})
        frame = read_until(ws, "decision")
        assert frame["payload"]["kind"] == "execute"
        assert frame["payload"]["plan"]["steps"][0]["action"] == "backrest_extend"


def test_broker_down_gives_503(stack_client):
    client, stack, _ = stack_client
    sid = create_session(client)
    stack.broker.close()
    response = client.post(f"/api/session/{sid}/request", json={"text": "hello"})
    assert response.status_code == 503


def test_console_static_mount(tmp_path):
    import pathlib

    from aoecr.platform.http import create_app as make_app
    from aoecr.platform.stack import LocalStack as Stack, StackConfig as Cfg

    frontend = pathlib.Path(__file__).parent.parent / "frontend"
    if not (frontend / "index.html").exists():
        pytest.skip("frontend not present")
    stack = Stack(Cfg(data_dir=str(tmp_path)))
    app = make_app(stack, console_dir=frontend)
    with TestClient(app) as client:
        page = client.get("/")
        assert page.status_code == 200
        assert "Nursing bed console" in page.text


def test_console_mount_rejects_bad_dir(tmp_path):
    from aoecr.platform.http import create_app as make_app
    from aoecr.platform.stack import LocalStack as Stack, StackConfig as Cfg

    stack = Stack(Cfg(data_dir=str(tmp_path)))
    with pytest.raises(ValueError):
        make_app(stack, console_dir=tmp_path / "nope")
