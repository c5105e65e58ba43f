"""Workbench configuration: defaults, scenario-loop.toml, CLI flags, env.

Precedence, lowest to highest: built-in defaults, the config file, CLI
flags, then SCENLOOP_* environment variables.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CONFIG_FILENAME = "scenario-loop.toml"
ENV_PREFIX = "SCENLOOP_"


@dataclass(frozen=True)
class WorkbenchConfig:
    backend: str = "http"          # http | script:<path> | scriptdir:<dir> | replay:<dir>[:record]
    map: str = "town_cross4"       # bundled map name or a path to a .map file
    corpus: str = ""               # corpus directory; empty = bundled corpus
    budget: int = 6500             # prompt token budget
    context_window: int = 8000     # model context ceiling (documentation only)
    max_turns: int = 5
    max_queries: int = 5
    seeds: int = 3                 # scenes sampled per executable turn
    base_seed: int = 0
    shuffle_seed: int = 0          # example-selection shuffle
    temperature: float = 0.1
    max_response_tokens: int = 1400
    model: str = "gpt-4-0314"
    counter: str = "heuristic4"
    example_encoding: str = "name-attr"  # or "plain"
    sessions_root: str = "sessions"
    price_per_1k: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def data_path(*parts: str) -> Path:
    """Path to a bundled data file (maps, corpus, templates)."""
    return Path(str(resources.files("scenloop.data").joinpath("/".join(parts))))


def default_corpus_dir() -> Path:
    return data_path("corpus")


def system_template() -> str:
    return data_path("templates", "system.txt").read_text("utf-8").rstrip("\n")


def resolve_map_path(name_or_path: str) -> Path:
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = data_path("maps", f"{name_or_path}.map")
    if bundled.exists():
        return bundled
    raise FileNotFoundError(
        f"no map named {name_or_path!r}: not a file, and not a bundled map")


_INT_FIELDS = {"budget", "context_window", "max_turns", "max_queries", "seeds",
               "base_seed", "shuffle_seed", "max_response_tokens"}
_FLOAT_FIELDS = {"temperature"}


def _coerce(name: str, value):
    if value is None:
        return None
    if name in _INT_FIELDS:
        return int(value)
    if name in _FLOAT_FIELDS:
        return float(value)
    return value


def load_config(flags: dict | None = None, config_file: str | Path | None = None,
                env: dict | None = None) -> WorkbenchConfig:
    """Merge defaults <- scenario-loop.toml <- flags <- environment."""
    env = os.environ if env is None else env
    config = WorkbenchConfig()
    path = Path(config_file) if config_file else Path(CONFIG_FILENAME)
    if path.exists():
        doc = tomllib.loads(path.read_text("utf-8"))
        updates = {k.replace("-", "_"): v for k, v in doc.items()}
        known = {f.name for f in fields(WorkbenchConfig)}
        config = replace(config, **{k: _coerce(k, v) for k, v in updates.items()
                                    if k in known})
    if flags:
        config = replace(config, **{k: _coerce(k, v) for k, v in flags.items()
                                    if v is not None})
    overrides = {}
    for f in fields(WorkbenchConfig):
        key = ENV_PREFIX + f.name.upper()
        if key in env:
            overrides[f.name] = _coerce(f.name, env[key])
    if overrides:
        config = replace(config, **overrides)
    return config
