"""JSON run configuration: model + loss + training budget + seed.

A run config is a JSON object with up to four entries::

    {"seed": 0,
     "model": {...ModelConfig fields...},
     "loss": {...LossConfig fields...},
     "train": {...TrainConfig fields...}}

Every section is optional and unknown keys are rejected anywhere (typos in
experiment configs should fail loudly, not silently fall back to defaults).
The effective config — all defaults made explicit — is echoed into run
artifacts so results stay self-describing.
"""

import dataclasses
import json
from dataclasses import dataclass, fields

from .errors import ConfigError
from .model import ModelConfig
from .training import LossConfig, TrainConfig

_SECTIONS = {"model": ModelConfig, "loss": LossConfig, "train": TrainConfig}


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig
    loss: LossConfig
    train: TrainConfig
    seed: int = 0


def _build_section(name: str, cls, payload) -> object:
    if not isinstance(payload, dict):
        raise ConfigError(f"section {name!r} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(unknown)}")
    try:
        return cls(**payload)
    except (TypeError, ValueError, ConfigError) as exc:
        raise ConfigError(f"bad {name!r} section: {exc}") from exc


def run_config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = sorted(set(doc) - set(_SECTIONS) - {"seed"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    sections = {name: doc.get(name, {}) for name in _SECTIONS}
    if isinstance(sections["train"], dict):
        # the top-level seed covers the whole run unless train pins its own
        sections["train"] = {"seed": seed, **sections["train"]}
    parts = {name: _build_section(name, cls, sections[name])
             for name, cls in _SECTIONS.items()}
    return RunConfig(seed=seed, **parts)


def parse_run_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return run_config_from_dict(doc)


def effective_config(config: RunConfig) -> dict:
    """Plain dict with every field explicit (the self-describing echo)."""
    return {
        "seed": config.seed,
        "model": dataclasses.asdict(config.model),
        "loss": dataclasses.asdict(config.loss),
        "train": dataclasses.asdict(config.train),
    }


def effective_config_json(config: RunConfig) -> str:
    return json.dumps(effective_config(config), indent=2, sort_keys=True)
