"""Run configuration: flat key=value files overridden by command-line flags."""

from __future__ import annotations

import dataclasses
import pathlib
from dataclasses import dataclass, field

from .model import ModelConfig
from .oracles import Variant
from .optim import TrainerConfig
from .transitions import System


class ConfigError(ValueError):
    pass


def read_key_values(path: str | pathlib.Path) -> dict[str, str]:
    """Parse `key = value` lines; blank lines and lines starting with # are ignored."""
    out = {}
    for lineno, raw in enumerate(pathlib.Path(path).read_text(encoding="utf-8").split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _convert(value, kind: type, key: str):
    if not isinstance(value, str) or kind is str:
        return value
    try:
        if kind is bool:
            low = value.lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(value)
            return low in ("1", "true", "yes")
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {value!r} as {kind.__name__}") from None


@dataclass
class RunConfig:
    system: str = "asw"
    oracle: str = "static-s"
    train: str | None = None
    dev: str | None = None
    test: str | None = None
    model: str | None = None
    report_dir: str | None = None
    beam: int = 1
    beam_norm: str = "length"
    seed: int = 0
    jobs: int = 1
    punct: str = "label"
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    model_config: ModelConfig = field(default_factory=ModelConfig)

    def __post_init__(self):
        try:
            System.parse(self.system)
        except (KeyError, ValueError):
            raise ConfigError(f"unknown system {self.system!r}") from None
        if self.oracle not in ("static-s", "static-r"):
            raise ConfigError(f"unknown oracle {self.oracle!r}")
        if self.beam < 1:
            raise ConfigError("beam must be >= 1")
        if self.beam_norm not in ("none", "length"):
            raise ConfigError(f"unknown beam normalisation {self.beam_norm!r}")
        if self.punct not in ("label", "xpos"):
            raise ConfigError(f"unknown punctuation policy {self.punct!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    @property
    def system_id(self) -> System:
        return System.parse(self.system)

    @property
    def variant(self) -> Variant:
        return Variant.for_system(self.system_id, self.oracle)

    @classmethod
    def scalar_fields(cls) -> dict[str, type]:
        hints = {"system": str, "oracle": str, "train": str, "dev": str, "test": str, "model": str,
                 "report_dir": str, "beam": int, "beam_norm": str, "seed": int, "jobs": int, "punct": str}
        return hints

    @classmethod
    def build(cls, file_values: dict[str, str] | None = None, overrides: dict | None = None) -> "RunConfig":
        """Merge config-file values with flag overrides (None means "not given")."""
        merged: dict = dict(file_values or {})
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        run_kw, trainer_kw, model_kw = {}, {}, {}
        trainer_types = TrainerConfig.field_types()
        model_types = {f.name: type(f.default) for f in dataclasses.fields(ModelConfig)}
        for key, value in merged.items():
            key = key.replace("-", "_")
            if key in cls.scalar_fields():
                run_kw[key] = _convert(value, cls.scalar_fields()[key], key)
            elif key in trainer_types:
                trainer_kw[key] = _convert(value, trainer_types[key], key)
            elif key in model_types:
                model_kw[key] = _convert(value, model_types[key], key)
            else:
                raise ConfigError(f"unknown configuration key {key!r}")
        # one seed drives everything unless the trainer seed is given explicitly
        trainer_kw.setdefault("seed", run_kw.get("seed", 0))
        try:
            trainer = TrainerConfig(**trainer_kw)
        except ValueError as err:
            raise ConfigError(str(err)) from None
        return cls(**run_kw, trainer=trainer, model_config=ModelConfig(**model_kw))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
