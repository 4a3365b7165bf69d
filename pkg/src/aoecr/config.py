"""Configuration file loading.

One JSON file configures the whole stack; any scalar leaf can be overridden
with an AOECR_<SECTION>_<KEY> environment variable (e.g.
AOECR_BACKEND_KIND=scripted, AOECR_PLATFORM_PORT=9000). Parse failures
report the file path and line.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .gateway.backends import BackendConfig

ENV_PREFIX = "AOECR"


class ConfigError(ValueError):
    pass


@dataclass
class PlatformSettings:
    host: str = "127.0.0.1"
    port: int = 8700
    data_dir: str = "./aoecr-data"
    tick_interval: float = 0.1
    telemetry_interval: float = 0.5
    decision_deadline: float = 30.0
    optimize_enabled: bool = True
    broker_host: str = "127.0.0.1"
    broker_port: int = 8750


@dataclass
class PipelineSettings:
    revision_rounds: int = 2
    stop_words: tuple[str, ...] = ("stop", "halt")


@dataclass
class ForgeSettings:
    seeds: int = 400
    master_seed: int = 0


@dataclass
class EvalSettings:
    profile_path: str = ""
    seed: int = 0
    panel_size: int = 3


@dataclass
class AoecrConfig:
    backend: BackendConfig = field(default_factory=BackendConfig)
    expert_backend: BackendConfig | None = None
    platform: PlatformSettings = field(default_factory=PlatformSettings)
    pipeline: PipelineSettings = field(default_factory=PipelineSettings)
    forge: ForgeSettings = field(default_factory=ForgeSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)


_SECTIONS = {
    "backend": BackendConfig,
    "expert_backend": BackendConfig,
    "platform": PlatformSettings,
    "pipeline": PipelineSettings,
    "forge": ForgeSettings,
    "eval": EvalSettings,
}


def _coerce(current: object, raw: str) -> object:
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, tuple):
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    return raw


def _apply_env_overrides(config: AoecrConfig, environ: dict[str, str]) -> None:
    for section_name in _SECTIONS:
        section = getattr(config, section_name)
        if section is None:
            continue
        for key, value in vars(section).items():
            env_key = f"{ENV_PREFIX}_{section_name}_{key}".upper()
            if env_key in environ:
                try:
                    setattr(section, key, _coerce(value, environ[env_key]))
                except ValueError as exc:
                    raise ConfigError(f"bad value for {env_key}: {exc}") from exc


def load_config(path: str | Path | None = None, environ: dict[str, str] | None = None) -> AoecrConfig:
    environ = os.environ if environ is None else environ
    config = AoecrConfig()
    if path is not None:
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"{path}: config file not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be an object")
        for section_name, raw in doc.items():
            if section_name not in _SECTIONS:
                raise ConfigError(f"{path}: unknown section {section_name!r}")
            if not isinstance(raw, dict):
                raise ConfigError(f"{path}: section {section_name!r} must be an object")
            section_cls = _SECTIONS[section_name]
            section = getattr(config, section_name) or section_cls()
            valid = set(vars(section_cls()).keys())
            for key, value in raw.items():
                if key not in valid:
                    raise ConfigError(f"{path}: unknown key {section_name}.{key}")
                if isinstance(getattr(section, key, None), tuple) and isinstance(value, list):
                    value = tuple(value)
                setattr(section, key, value)
            setattr(config, section_name, section)
    _apply_env_overrides(config, dict(environ))
    try:
        config.backend.__post_init__()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config
