"""Run configuration: file paths, engine caps, weights, training knobs.

Precedence is built-in defaults < config file < command-line flags. The
config file is flat ``key = value`` text; lists use commas.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .search import ENGINE_QLM, ENGINE_VSM, ENGINE_WEBMOCK, EngineConfig


@dataclass
class RunConfig:
    index_dir: str | None = None
    webmock_path: str | None = None
    model_path: str | None = None

    engines: tuple[str, ...] = (ENGINE_VSM, ENGINE_QLM)
    cap_vsm: int = 20
    cap_qlm: int = 20
    cap_webmock: int = 50
    total_cap: int = 90
    mu: float = 2000.0
    title_weight: float = 0.3
    content_weight: float = 1.0
    passage_depth: int = 5
    passage_engines: tuple[str, ...] = (ENGINE_VSM, ENGINE_QLM)
    phrase_cap: int = 12
    include_synonyms: bool = True
    window: int = 50
    stride: int = 25

    learner: str = "logistic"
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-4
    seed: int = 0

    workers: int = 1

    def validate(self) -> None:
        for name in ("cap_vsm", "cap_qlm", "cap_webmock", "total_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.title_weight < 0 or self.content_weight < 0:
            raise ValueError("field weights must be >= 0")
        if ENGINE_WEBMOCK in self.engines and not self.webmock_path:
            raise ValueError("webmock engine enabled but no webmock fixture path given")

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            per_engine_cap={
                ENGINE_VSM: self.cap_vsm,
                ENGINE_QLM: self.cap_qlm,
                ENGINE_WEBMOCK: self.cap_webmock,
            },
            total_cap=self.total_cap,
            mu=self.mu,
            title_weight=self.title_weight,
            content_weight=self.content_weight,
        )

    def resolved(self) -> dict[str, object]:
        """Every field as a plain value, for the run's config echo."""
        out: dict[str, object] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            out[f.name] = value
        return out


_TUPLE_KEYS = {"engines", "passage_engines"}
_BOOL_KEYS = {"include_synonyms"}


def _coerce(key: str, raw: str, target_type: type) -> object:
    raw = raw.strip()
    if key in _TUPLE_KEYS:
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    if key in _BOOL_KEYS:
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"config key {key}: expected a boolean, got {raw!r}")
    if target_type is int:
        return int(raw)
    if target_type is float:
        return float(raw)
    return raw


def load_config_file(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Overlay ``key = value`` lines from a file onto a base config."""
    cfg = base or RunConfig()
    known = {f.name: f.type for f in fields(RunConfig)}
    updates: dict[str, object] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in known:
            raise ValueError(f"{path}:{line_no}: unknown config key {key!r}")
        current = getattr(cfg, key)
        target = type(current) if current is not None else str
        updates[key] = _coerce(key, raw, target)
    return replace(cfg, **updates)
