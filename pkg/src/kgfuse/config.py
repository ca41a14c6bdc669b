"""Central configuration: a flat ``key = value`` text file with # comments.

Environment variables KGFUSE_DATA_DIR, KGFUSE_HOST, and KGFUSE_PORT override
the file. Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .bayes import DEFAULT_STATE_SPACE_CAP, POSTERIOR_TOLERANCE, ROW_SUM_TOLERANCE
from .errors import ConfigError
from .merging import AlignmentConfig
from .recommend import DEFAULT_EDGE_WEIGHT

ENV_DATA_DIR = "KGFUSE_DATA_DIR"
ENV_HOST = "KGFUSE_HOST"
ENV_PORT = "KGFUSE_PORT"


@dataclass
class Config:
    data_dir: Path = Path("data")
    host: str = "127.0.0.1"
    port: int = 8080
    posterior_tolerance: float = POSTERIOR_TOLERANCE
    row_sum_tolerance: float = ROW_SUM_TOLERANCE
    default_edge_weight: float = DEFAULT_EDGE_WEIGHT
    label_similarity_threshold: float = 0.85
    require_same_node_type: bool = True
    require_context_overlap: bool = True
    state_space_cap: int = DEFAULT_STATE_SPACE_CAP
    domain_aliases: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.posterior_tolerance <= 0 or self.row_sum_tolerance <= 0:
            raise ConfigError("tolerances must be positive")
        if not 1 <= self.port <= 65535:
            raise ConfigError(f"port {self.port} outside 1..65535")
        if not 0.0 <= self.label_similarity_threshold <= 1.0:
            raise ConfigError("label_similarity_threshold must lie in [0, 1]")
        if not 0.0 <= self.default_edge_weight <= 1.0:
            raise ConfigError("default_edge_weight must lie in [0, 1]")
        if self.state_space_cap < 1:
            raise ConfigError("state_space_cap must be positive")
        self.data_dir = Path(self.data_dir)

    def alignment_config(self) -> AlignmentConfig:
        return AlignmentConfig(
            label_similarity_threshold=self.label_similarity_threshold,
            require_same_node_type=self.require_same_node_type,
            require_context_overlap=self.require_context_overlap,
        )


_BOOL_KEYS = {"require_same_node_type", "require_context_overlap"}
_INT_KEYS = {"port", "state_space_cap"}
_FLOAT_KEYS = {"posterior_tolerance", "row_sum_tolerance", "default_edge_weight", "label_similarity_threshold"}
_TEXT_KEYS = {"data_dir", "host"}


def _parse_bool(value: str, key: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _parse_aliases(value: str) -> dict[str, str]:
    aliases: dict[str, str] = {}
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigError(f"domain_aliases entry {item!r} must look like alias:canonical")
        alias, _, canonical = item.partition(":")
        aliases[alias.strip()] = canonical.strip()
    return aliases


def parse_config(text: str) -> Config:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _BOOL_KEYS:
            values[key] = _parse_bool(value, key)
        elif key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(f"{key}: expected an integer, got {value!r}") from None
        elif key in _FLOAT_KEYS:
            try:
                values[key] = float(value)
            except ValueError:
                raise ConfigError(f"{key}: expected a number, got {value!r}") from None
        elif key in _TEXT_KEYS:
            values[key] = value
        elif key == "domain_aliases":
            values[key] = _parse_aliases(value)
        else:
            raise ConfigError(f"line {lineno}: unknown configuration key {key!r}")
    return Config(**values)


def load_config(path: str | Path | None = None, *, env: dict[str, str] | None = None) -> Config:
    """Load configuration from ``path`` (defaults when absent), then apply
    environment overrides."""
    env = os.environ if env is None else env
    if path is not None:
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigError(f"configuration file not found: {config_path}")
        config = parse_config(config_path.read_text(encoding="utf-8"))
    else:
        config = Config()
    if env.get(ENV_DATA_DIR):
        config.data_dir = Path(env[ENV_DATA_DIR])
    if env.get(ENV_HOST):
        config.host = env[ENV_HOST]
    if env.get(ENV_PORT):
        try:
            config.port = int(env[ENV_PORT])
        except ValueError:
            raise ConfigError(f"{ENV_PORT}: expected an integer, got {env[ENV_PORT]!r}") from None
        if not 1 <= config.port <= 65535:
            raise ConfigError(f"port {config.port} outside 1..65535")
    return config
