"""Config loading, env overrides, and the CLI surface."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from aoecr.cli import main
from aoecr.config import ConfigError, load_config
from aoecr.forge import load_dataset


# --- config -------------------------------------------------------------------

def test_defaults_without_file():
    cfg = load_config(None, environ={})
    assert cfg.backend.kind == "oracle"
    assert cfg.platform.port == 8700
    assert cfg.pipeline.revision_rounds == 2


def test_config_file_sections(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "backend": {"kind": "scripted", "transcript_path": "t.jsonl"},
                "platform": {"port": 9100, "data_dir": str(tmp_path / "data")},
                "pipeline": {"revision_rounds": 3, "stop_words": ["stop", "enough"]},
            }
        )
    )
    cfg = load_config(path, environ={})
    assert cfg.backend.kind == "scripted"
    assert cfg.platform.port == 9100
    assert cfg.pipeline.revision_rounds == 3
    assert cfg.pipeline.stop_words == ("stop", "enough")


def test_env_overrides(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"platform": {"port": 9100}}))
    cfg = load_config(
        path,
        environ={
            "AOECR_PLATFORM_PORT": "9200",
            "AOECR_BACKEND_KIND": "scripted",
            "AOECR_PLATFORM_OPTIMIZE_ENABLED": "false",
        },
    )
    assert cfg.platform.port == 9200
    assert cfg.backend.kind == "scripted"
    assert cfg.platform.optimize_enabled is False


def test_config_errors_name_path_and_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "platform": {\n')
    with pytest.raises(ConfigError) as err:
        load_config(path, environ={})
    assert str(path) in str(err.value)
    assert ":3" in str(err.value)  # line number of the failure


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"platform": {"prot": 1}}))
    with pytest.raises(ConfigError) as err:
        load_config(path, environ={})
    assert "platform.prot" in str(err.value)


# --- CLI ---------------------------------------------------------------------------

def test_cli_help_documents_every_subcommand():
    result = CliRunner().invoke(main, ["--help"])
    assert result.exit_code == 0
    for sub in ("serve-agent", "serve-platform", "simulate-bed", "forge-dataset", "evaluate", "repl"):
        assert sub in result.output


def test_cli_unknown_subcommand_nonzero_with_usage():
    result = CliRunner().invoke(main, ["frobnicate"])
    assert result.exit_code != 0
    assert "Usage" in result.output or "No such command" in result.output


def test_cli_forge_dataset_writes_four_x(tmp_path):
    out = tmp_path / "pn-i.jsonl"
    result = CliRunner().invoke(
        main,
        ["forge-dataset", "--seeds", "25", "--out", str(out), "--stats-dir", str(tmp_path / "stats")],
    )
    assert result.exit_code == 0, result.output
    dataset = load_dataset(out)
    assert len(dataset) == 100
    assert (tmp_path / "stats" / "dataset_stats.json").exists()
    assert (tmp_path / "stats" / "dataset_stats.md").exists()


def test_cli_evaluate_single_stage(tmp_path):
    out = tmp_path / "pn-i.jsonl"
    CliRunner().invoke(main, ["forge-dataset", "--seeds", "10", "--out", str(out)])
    result = CliRunner().invoke(
        main,
        [
            "evaluate",
            "--dataset", str(out),
            "--stage", "full_with_cos",
            "--out", str(tmp_path / "reports"),
            "--seed", "3",
        ],
    )
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "reports" / "accuracy_full_with_cos.json").read_text())
    assert report["stages"][0]["stage"] == "full_with_cos"


def test_cli_evaluate_all_stages_with_profile(tmp_path):
    out = tmp_path / "pn-i.jsonl"
    CliRunner().invoke(main, ["forge-dataset", "--seeds", "10", "--out", str(out)])
    profile = tmp_path / "profile.json"
    profile.write_text(
        json.dumps(
            {
                "prompt_only": {"high": 0.2, "medium": 0.4, "low": 0.6, "unclear": 0.8},
                "finetuned": {"high": 0.1, "medium": 0.2, "low": 0.3, "unclear": 0.4},
                "detection": 0.9,
                "revision_rounds": 2,
            }
        )
    )
    result = CliRunner().invoke(
        main,
        [
            "evaluate",
            "--dataset", str(out),
            "--profile", str(profile),
            "--out", str(tmp_path / "reports"),
        ],
    )
    assert result.exit_code == 0, result.output
    md = (tmp_path / "reports" / "ablation.md").read_text()
    assert "full_with_cos" in md and "prompt_only" in md


def test_cli_config_error_reported(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    result = CliRunner().invoke(main, ["repl", "--config", str(bad)])
    assert result.exit_code != 0
    assert "config error" in result.output
