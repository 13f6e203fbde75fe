"""Layered run configuration: defaults < config file < env vars < flags.

One flat JSON file configures every command. Any field can be overridden
per run by an environment variable named ``FACETPATH_<FIELD>`` (upper
snake case) or by the matching CLI flag; flags win over env vars, env
vars over the file. List-valued fields parse from comma-separated
strings so the same syntax works in all three layers.

Every command writes a ``manifest.json`` beside its outputs recording
the resolved config, the seed, the git revision, and wall-clock timings,
so any artifact can be traced back to the exact run that produced it.
"""

from __future__ import annotations

import json
import os
import subprocess
import time
from dataclasses import asdict, dataclass, field, fields

__all__ = ["AppConfig", "ConfigError", "ENV_PREFIX", "resolve_config", "write_manifest"]

ENV_PREFIX = "FACETPATH_"


class ConfigError(ValueError):
    """Raised for unknown keys or values that fail to parse."""


@dataclass
class AppConfig:
    # data generation
    n_products: int = 1000
    n_sessions: int = 2000
    branching: tuple[int, ...] = (6, 4, 3)
    session_coherence_rate: float = 0.8
    query_noise_rate: float = 0.1
    leaf_query_rate: float = 0.5
    product_depth_weights: tuple[float, ...] = ()
    seed: int = 0
    # embeddings
    embedding_dim: int = 50
    embedding_window: int = 3
    embedding_negatives: int = 5
    embedding_epochs: int = 5
    embedding_seed: int = 1
    encoder: str = "s2pv"  # s2pv | w2v | external
    # training
    learning_rate: float = 0.001
    time_decay: float = 0.00001
    batch_size: int = 128
    max_epochs: int = 300
    patience: int = 20
    validation_fraction: float = 0.1
    mlp_hidden: int = 256
    # evaluation
    train_fraction: float = 0.8
    fractions: tuple[float, ...] = (0.1, 0.25, 1.0)
    eval_seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    variants: tuple[str, ...] = ("cm", "mlp+s2pv", "sessionpath+s2pv", "sessionpath+s2pv-nosession")
    ct_values: tuple[float, ...] = (0.8, 0.9, 0.95, 0.98, 0.99, 0.993, 0.996)
    # decision rule
    ct: float = 0.993
    safety_check: bool = False
    # service
    host: str = "127.0.0.1"
    port: int = 8321
    cache_capacity: int = 10_000
    default_model: str = "sessionpath"
    max_candidates: int = 10


_FIELD_TYPES = {f.name: f for f in fields(AppConfig)}


def _parse_value(name: str, raw, target_default):
    """Coerce a file/env/flag value to the field's type."""
    if isinstance(target_default, bool):
        if isinstance(raw, bool):
            return raw
        if isinstance(raw, str) and raw.lower() in ("1", "true", "yes", "on"):
            return True
        if isinstance(raw, str) and raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    try:
        if isinstance(target_default, int):
            return int(raw)
        if isinstance(target_default, float):
            return float(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc
    if isinstance(target_default, tuple):
        if isinstance(raw, (list, tuple)):
            items = list(raw)
        elif isinstance(raw, str):
            items = [s for s in raw.split(",") if s.strip()]
        else:
            raise ConfigError(f"{name}: expected a list or comma-separated string, got {raw!r}")
        elem = str
        if name in ("branching",):
            elem = int
        elif name in ("eval_seeds",):
            elem = int
        elif name in ("fractions", "product_depth_weights", "ct_values"):
            elem = float
        try:
            return tuple(elem(s.strip() if isinstance(s, str) else s) for s in items)
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    return str(raw)


def resolve_config(
    config_file: str | None = None,
    flag_overrides: dict | None = None,
    env: dict | None = None,
) -> AppConfig:
    """Merge the three override layers onto the defaults."""
    merged = asdict(AppConfig())
    defaults = AppConfig()

    if config_file:
        with open(config_file, encoding="utf-8") as fh:
            try:
                file_vals = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{config_file}: not valid JSON ({exc})") from exc
        if not isinstance(file_vals, dict):
            raise ConfigError(f"{config_file}: top level must be an object")
        for key, raw in file_vals.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{config_file}: unknown config key {key!r}")
            merged[key] = _parse_value(key, raw, getattr(defaults, key))

    env = os.environ if env is None else env
    for name in _FIELD_TYPES:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            merged[name] = _parse_value(name, env[env_key], getattr(defaults, name))

    for key, raw in (flag_overrides or {}).items():
        if raw is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config field {key!r}")
        merged[key] = _parse_value(key, raw, getattr(defaults, key))

    return AppConfig(**merged)


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def write_manifest(out_dir: str, command: str, config: AppConfig, timings: dict[str, float]) -> str:
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "command": command,
        "config": asdict(config),
        "seed": config.seed,
        "git_revision": _git_describe(),
        "timings_seconds": {k: round(v, 3) for k, v in timings.items()},
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
