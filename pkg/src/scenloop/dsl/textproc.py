"""Text pipeline between the corpus, the LLM and the compiler.

Training code is compacted before it goes into prompts (comments, blank
lines and the reconstructible map line are token waste); generated code gets
the description back as a docstring and the map line re-derived from the
map name.
"""

from __future__ import annotations

import json
import re
from importlib import resources

from ..diagnostics import SourceError, Span
from .parser import split_docstring

MAP_PATH_TEMPLATE = "Scenic/tests/formats/opendrive/maps/CARLA/{}.xodr"

_MAP_LINE_RE = re.compile(r"^\s*param\s+map\s*=\s*localPath\(.*$")
_CARLA_MAP_RE = re.compile(r"""^\s*param\s+carla_map\s*=\s*['"]([^'"]+)['"]""")


def _load_alias_table() -> dict[str, str]:
    data = resources.files("scenloop.data").joinpath("aliases.json").read_text("utf-8")
    return json.loads(data)


_ALIASES: dict[str, str] | None = None


def alias_table() -> dict[str, str]:
    global _ALIASES
    if _ALIASES is None:
        _ALIASES = _load_alias_table()
    return _ALIASES


def strip_comments(text: str) -> str:
    """Remove ``#`` comments outside string literals; keeps line structure.

    Lines are newline-delimited only: exotic separators (form feeds, U+2028)
    that ``str.splitlines`` would split on stay inside their line.
    """
    out: list[str] = []
    for line in text.split("\n"):
        quote: str | None = None
        cut = len(line)
        i = 0
        while i < len(line):
            c = line[i]
            if quote is not None:
                if c == "\\":
                    i += 2
                    continue
                if line.startswith(quote, i):
                    i += len(quote)
                    quote = None
                    continue
            elif c in "'\"":
                quote = line[i:i + 3] if line.startswith(c * 3, i) else c
                i += len(quote)
                continue
            elif c == "#":
                cut = i
                break
            i += 1
        out.append(line[:cut])
    return "\n".join(out)


def preprocess_training(code: str) -> str:
    """Compact a corpus scenario for prompting.

    Drops the docstring, comments, blank lines and the ``param map`` line,
    normalizes known-wrong asset names, and strips trailing whitespace.
    Idempotent, and never produces more lines than it was given.
    """
    _, body = split_docstring(code)
    body = strip_comments(body)
    for wrong, right in alias_table().items():
        body = body.replace(wrong, right)
    lines = []
    for line in body.split("\n"):
        line = line.rstrip()
        if not line.strip():
            continue
        if _MAP_LINE_RE.match(line):
            continue
        lines.append(line)
    return "\n".join(lines) + "\n" if lines else ""


def postprocess_generated(code: str, description: str) -> str:
    """Prepare generated code for compilation.

    Prefixes the English description as a docstring and reinserts the
    ``param map``  line derived from the ``carla_map`` value. Raises
    :class:`SourceError` with a MissingMapName diagnostic when no
    ``param carla_map`` line exists.
    """
    _, body = split_docstring(code)
    lines = body.split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    carla_idx: int | None = None
    map_name: str | None = None
    has_map_line = False
    for i, line in enumerate(lines):
        if _MAP_LINE_RE.match(line):
            has_map_line = True
        m = _CARLA_MAP_RE.match(line)
        if m and carla_idx is None:
            carla_idx, map_name = i, m.group(1)
    if carla_idx is None or map_name is None:
        raise SourceError.single(
            "MissingMapName",
            "generated code has no \"param carla_map = '<Name>'\" line, so the map "
            "filename cannot be reconstructed",
            Span(1, 1, 1))
    if not has_map_line:
        map_line = f"param map = localPath('{MAP_PATH_TEMPLATE.format(map_name)}')"
        lines.insert(carla_idx, map_line)
    header = f'"""\n{description}\n"""'
    return "\n".join([header, *lines]) + "\n"


def extract_description(code: str) -> str | None:
    """The English description stored as the scenario's docstring."""
    doc, _ = split_docstring(code)
    return doc
