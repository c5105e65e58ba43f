"""Scenario corpus: 32 scenarios split 16 train / 16 test, plus a manifest
describing per-scenario maps, trace checkers and scripted judge comments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .dsl import extract_description, preprocess_training
from .prompting import TrainingExample


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    split: str  # train | test
    path: Path
    description: str
    code: str  # raw file contents, docstring included
    map: str = "town_cross4"
    checker: dict | None = None
    comments: tuple[str, ...] = ()

    def training_example(self) -> TrainingExample:
        return TrainingExample(self.id, self.description, preprocess_training(self.code))


@dataclass(frozen=True)
class Corpus:
    root: Path
    entries: tuple[CorpusEntry, ...]
    stats: dict = field(default_factory=dict)

    def split(self, name: str) -> list[CorpusEntry]:
        return [e for e in self.entries if e.split == name]

    def training_examples(self) -> list[TrainingExample]:
        return [e.training_example() for e in self.split("train")]

    def entry(self, scenario_id: str) -> CorpusEntry:
        for e in self.entries:
            if e.id == scenario_id:
                return e
        raise KeyError(scenario_id)


def load_corpus(root: str | Path) -> Corpus:
    root = Path(root)
    manifest_path = root / "manifest.yaml"
    if not manifest_path.exists():
        raise FileNotFoundError(f"corpus manifest not found: {manifest_path}")
    manifest = yaml.safe_load(manifest_path.read_text("utf-8"))
    entries: list[CorpusEntry] = []
    for raw in manifest.get("scenarios", []):
        path = root / raw["file"]
        code = path.read_text("utf-8")
        description = raw.get("description") or extract_description(code) or ""
        entries.append(CorpusEntry(
            id=raw["id"],
            split=raw["split"],
            path=path,
            description=description.strip(),
            code=code,
            map=raw.get("map", "town_cross4"),
            checker=raw.get("checker"),
            comments=tuple(raw.get("comments", [])),
        ))
    return Corpus(root, tuple(entries), manifest.get("stats", {}))
