"""Command line entry point.

Subcommands cover the whole stack: serving the platform (full local stack
with HTTP/WS console API), running the agent or a simulated bed as separate
processes against the platform's broker port, forging the dialogue dataset,
running the evaluation harness, and a terminal REPL against a fully local
stack with the deterministic oracle backend.
"""

from __future__ import annotations

import asyncio
import json
import sys

import click

from .config import AoecrConfig, ConfigError, load_config
from .evalharness import AblationStage, FaultProfile, emit_report, evaluate_commands, run_ablation
from .forge import dataset_stats, export_finetune, forge_dataset, load_dataset, save_dataset
from .gateway.backends import make_backend
from .platform.agent import AgentRuntimeConfig, AgentService
from .platform.bedservice import BedService
from .platform.broker import BrokerServer, RemoteBroker
from .platform.sessions import SessionStore
from .platform.stack import LocalStack, StackConfig
from .platform.wire import TopicKind, topic_name
from .pipeline import PipelineConfig


def _load(config_path: str | None) -> AoecrConfig:
    try:
        return load_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(f"config error: {exc}") from exc


def _stack_config(cfg: AoecrConfig) -> StackConfig:
    return StackConfig(
        data_dir=cfg.platform.data_dir,
        tick_interval=cfg.platform.tick_interval,
        telemetry_interval=cfg.platform.telemetry_interval,
        backend=cfg.backend,
        expert_backend=cfg.expert_backend,
        decision_deadline=cfg.platform.decision_deadline,
        optimize_enabled=cfg.platform.optimize_enabled,
    )


def _pipeline_config(cfg: AoecrConfig) -> PipelineConfig:
    return PipelineConfig(
        revision_rounds=cfg.pipeline.revision_rounds,
        stop_words=tuple(cfg.pipeline.stop_words),
    )


@click.group()
def main() -> None:
    """Nursing-bed care agent stack."""


@main.command("serve-platform")
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
@click.option("--host", default=None, help="HTTP bind host (overrides config).")
@click.option("--port", type=int, default=None, help="HTTP bind port (overrides config).")
@click.option("--broker-listen/--no-broker-listen", default=True, help="Expose the broker over TCP for split deployments.")
@click.option("--agent/--no-agent", "with_agent", default=True, help="Run the agent in this process.")
@click.option("--beds/--no-beds", "with_beds", default=True, help="Simulate a bed per session in this process.")
@click.option("--console", "console_dir", type=click.Path(), default=None,
              help="Serve the built browser console from this directory (e.g. frontend/).")
def serve_platform(config_path, host, port, broker_listen, with_agent, with_beds, console_dir) -> None:
    """Serve the HTTP/WS console API over a local stack."""
    import uvicorn

    from .platform.http import create_app

    cfg = _load(config_path)
    host = host or cfg.platform.host
    port = port if port is not None else cfg.platform.port

    broker_server = BrokerServer(cfg.platform.broker_host, cfg.platform.broker_port) if broker_listen else None
    stack = LocalStack(
        _stack_config(cfg),
        pipeline_config=_pipeline_config(cfg),
        broker=broker_server.broker if broker_server else None,
        spawn_agent=with_agent,
        spawn_beds=with_beds,
    )
    try:
        app = create_app(stack, broker_server=broker_server, console_dir=console_dir)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc

    if broker_server is not None:
        click.echo(f"broker will listen on {broker_server.host}:{broker_server.port}")
    click.echo(f"platform listening on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("serve-agent")
@click.option("--config", "config_path", type=click.Path(), default=None)
def serve_agent(config_path) -> None:
    """Run the care agent against the platform's broker port."""
    cfg = _load(config_path)

    async def run() -> None:
        broker = RemoteBroker(cfg.platform.broker_host, cfg.platform.broker_port)
        await broker.connect()
        store = SessionStore(cfg.platform.data_dir)
        backend = make_backend(cfg.backend)
        expert = make_backend(cfg.expert_backend or cfg.backend)
        service = AgentService(
            broker,
            store,
            backend,
            expert_backend=expert if cfg.platform.optimize_enabled else None,
            pipeline_config=_pipeline_config(cfg),
            runtime=AgentRuntimeConfig(decision_deadline=cfg.platform.decision_deadline),
        )
        click.echo(f"agent connected to broker {cfg.platform.broker_host}:{cfg.platform.broker_port}")
        await service.run()

    _run_until_interrupt(run())


@main.command("simulate-bed")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--session", "session_id", required=True, help="Session id to serve.")
def simulate_bed(config_path, session_id) -> None:
    """Run a bed twin for one session against the platform's broker port."""
    cfg = _load(config_path)

    async def run() -> None:
        broker = RemoteBroker(cfg.platform.broker_host, cfg.platform.broker_port)
        await broker.connect()
        service = BedService(
            broker,
            session_id,
            tick_interval=cfg.platform.tick_interval,
            telemetry_interval=cfg.platform.telemetry_interval,
        )
        click.echo(f"bed for session {session_id} connected")
        await service.run()

    _run_until_interrupt(run())


@main.command("forge-dataset")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seeds", type=int, default=None, help="High-clarity pair count (output is 4x).")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--stats-dir", type=click.Path(), default=None, help="Also write stats JSON + markdown here.")
@click.option("--finetune-out", type=click.Path(), default=None, help="Also export instruction-tuning JSONL here.")
def forge_dataset_cmd(config_path, seeds, out_path, stats_dir, finetune_out) -> None:
    """Generate the patient-nurse dialogue dataset."""
    cfg = _load(config_path)
    seeds = seeds if seeds is not None else cfg.forge.seeds
    backend = make_backend(cfg.backend)
    dataset = forge_dataset(seeds, backend, backend, master_seed=cfg.forge.master_seed)
    save_dataset(dataset, out_path)
    click.echo(f"wrote {len(dataset)} pairs to {out_path}")
    if stats_dir:
        stats = dataset_stats(dataset)
        emit_report(stats, stats_dir, "dataset_stats")
        click.echo(f"wrote stats to {stats_dir}")
    if finetune_out:
        export_finetune(dataset, finetune_out)
        click.echo(f"wrote fine-tune export to {finetune_out}")


@main.command("evaluate")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
@click.option("--stage", type=click.Choice([s.value for s in AblationStage] + ["all"]), default="all")
@click.option("--profile", "profile_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def evaluate(config_path, dataset_path, stage, profile_path, seed, out_dir) -> None:
    """Score command accuracy on a dataset; emits JSON + markdown reports."""
    cfg = _load(config_path)
    seed = seed if seed is not None else cfg.eval.seed
    profile_path = profile_path or (cfg.eval.profile_path or None)
    profile = FaultProfile.from_file(profile_path) if profile_path else FaultProfile()
    dataset = load_dataset(dataset_path)
    if stage == "all":
        result = run_ablation(dataset, profile, seed)
        paths = emit_report(result, out_dir, "ablation")
        for report in result.reports:
            click.echo(f"{report.stage.value}: total {report.total.accuracy:.2%}")
    else:
        from .evalharness.ablation import AblationResult

        report = evaluate_commands(dataset, AblationStage(stage), profile, seed)
        paths = emit_report(AblationResult(reports=[report], seed=seed), out_dir, f"accuracy_{stage}")
        click.echo(f"{stage}: total {report.total.accuracy:.2%}")
    for path in paths:
        click.echo(f"wrote {path}")


@main.command("repl")
@click.option("--config", "config_path", type=click.Path(), default=None)
def repl(config_path) -> None:
    """Terminal request/response loop against a fully local stack."""
    cfg = _load(config_path)

    async def run() -> None:
        stack = LocalStack(_stack_config(cfg), pipeline_config=_pipeline_config(cfg))
        await stack.start()
        session_id = stack.create_session()
        sub = stack.broker.subscribe(
            topic_name(session_id, TopicKind.DECISION),
            topic_name(session_id, TopicKind.TELEMETRY),
        )
        click.echo(f"session {session_id}. Type a request; /interrupt, /pose, /quit.")
        last_pose: dict | None = None
        try:
            while True:
                line = (await asyncio.to_thread(input, "you> ")).strip()
                if not line:
                    continue
                if line in ("/quit", "/exit"):
                    break
                if line == "/interrupt":
                    await stack.publish(session_id, TopicKind.INTERRUPT, {})
                    click.echo("interrupt sent")
                    continue
                if line == "/pose":
                    for envelope in sub.drain():
                        if envelope.kind == TopicKind.TELEMETRY.value:
                            last_pose = envelope.payload
                    click.echo(json.dumps(last_pose or {}, indent=2))
                    continue
                await stack.publish(session_id, TopicKind.REQUEST, {"text": line})
                # wait for the decision, showing telemetry as it streams
                while True:
                    envelope = await asyncio.wait_for(sub.get(), timeout=45.0)
                    if envelope.kind == TopicKind.TELEMETRY.value:
                        last_pose = envelope.payload
                        continue
                    payload = envelope.payload
                    if payload["kind"] == "execute":
                        click.echo(f"agent> {payload['response']}")
                        click.echo(f"  command: {json.dumps(payload['plan'])}")
                    elif payload["kind"] == "clarify":
                        click.echo(f"agent> {payload['question']}")
                    else:
                        click.echo(f"agent> (refused) {payload['reason']}")
                    break
        except (EOFError, KeyboardInterrupt):
            pass
        finally:
            await stack.stop()

    asyncio.run(run())


def _run_until_interrupt(coro) -> None:
    try:
        asyncio.run(coro)
    except KeyboardInterrupt:
        click.echo("stopped")


if __name__ == "__main__":
    sys.exit(main())
