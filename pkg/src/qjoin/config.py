"""Engine configuration: one JSON document covering every stage.

Parsing is strict: an unknown key anywhere fails loudly with the
offending key named, so a typo in a config file cannot silently fall
back to a default.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .agent import AgentConfig
from .joiner import JoinerConfig
from .pipeline import PipelineConfig
from .reuse import ReuseConfig
from .reward import RewardConfig
from .similarity import AlcsConfig

__all__ = ["EngineConfig", "load_config", "save_config"]

_SECTIONS = {
    "alcs": AlcsConfig,
    "reward": RewardConfig,
    "agent": AgentConfig,
    "pipeline": PipelineConfig,
    "joiner": JoinerConfig,
    "reuse": ReuseConfig,
}


@dataclass(frozen=True)
class EngineConfig:
    alcs: AlcsConfig = field(default_factory=AlcsConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    joiner: JoinerConfig = field(default_factory=JoinerConfig)
    reuse: ReuseConfig = field(default_factory=ReuseConfig)
    seed: int = 0

    def to_dict(self) -> dict:
        out: dict = {"seed": self.seed}
        for name in _SECTIONS:
            section = dataclasses.asdict(getattr(self, name))
            out[name] = {
                k: list(v) if isinstance(v, tuple) else v for k, v in section.items()
            }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        known = set(_SECTIONS) | {"seed"}
        for key in data:
            if key not in known:
                raise ValueError(f"unknown config key: {key!r}")
        kwargs: dict = {"seed": data.get("seed", 0)}
        for name, section_cls in _SECTIONS.items():
            section = data.get(name, {})
            fields = {f.name: f for f in dataclasses.fields(section_cls)}
            for key in section:
                if key not in fields:
                    raise ValueError(f"unknown config key: {name}.{key}")
            coerced = {}
            for key, value in section.items():
                if isinstance(value, list):
                    value = tuple(value)
                coerced[key] = value
            kwargs[name] = section_cls(**coerced)
        return cls(**kwargs)


def load_config(path) -> EngineConfig:
    with Path(path).open(encoding="utf-8") as fh:
        return EngineConfig.from_dict(json.load(fh))


def save_config(cfg: EngineConfig, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
