"""Run configuration: bank declarations plus default parameters.

Line-oriented key=value format.  Keys before any section header set
search parameter and worker defaults; each `[bank <name>]` section
declares one bank.  '#' starts a comment, blank lines are ignored.

    max_entry_distance = 64
    query_splits = 2
    align_workers = 2

    [bank refseq]
    fasta = data/refseq.fa
    path = banks
    mask = 111010010100110111
    fragments = 2

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .encoding import SpacedSeedMask
from .errors import ParameterError
from .model import EngineConfig, SearchParams

_PARAM_TYPES = {f.name: f.type for f in fields(SearchParams)}
_INT_PARAMS = {name for name, t in _PARAM_TYPES.items() if t in ("int", int)}
_ENGINE_KEYS = {"query_splits", "align_workers"}


@dataclass
class BankConfig:
    name: str
    fasta: Path
    path: Path
    mask: str
    fragments: int = 1

    @property
    def manifest_path(self) -> Path:
        return self.path / f"{self.name}.manifest"


@dataclass
class RunConfig:
    banks: dict[str, BankConfig] = field(default_factory=dict)
    params: SearchParams = field(default_factory=SearchParams)
    engine: EngineConfig = field(default_factory=EngineConfig)


def _coerce_param(key: str, value: str):
    try:
        if key in _INT_PARAMS or key in _ENGINE_KEYS:
            return int(value)
        return float(value)
    except ValueError as exc:
        raise ParameterError(f"bad value for {key}: {value!r}") from exc


def coerce_param(key: str, value: str):
    """Parse a parameter value by its field type; raises for unknown keys."""
    if key not in _PARAM_TYPES and key not in _ENGINE_KEYS:
        raise ParameterError(f"unknown parameter {key!r}")
    return _coerce_param(key, value)


def load_config(path) -> RunConfig:
    path = Path(path)
    base = path.parent
    banks: dict[str, BankConfig] = {}
    param_values: dict = {}
    engine_values: dict = {}
    section: dict | None = None
    section_name = ""

    def finish_section():
        if section is None:
            return
        missing = {"fasta", "path", "mask"} - set(section)
        if missing:
            raise ParameterError(
                f"bank {section_name!r} is missing keys: {sorted(missing)}"
            )
        SpacedSeedMask(section["mask"])
        fragments = int(section.get("fragments", "1"))
        if fragments < 1:
            raise ParameterError(f"bank {section_name!r}: fragments must be >= 1")
        if section_name in banks:
            raise ParameterError(f"duplicate bank {section_name!r}")
        banks[section_name] = BankConfig(
            name=section_name,
            fasta=(base / section["fasta"]).resolve(),
            path=(base / section["path"]).resolve(),
            mask=section["mask"],
            fragments=fragments,
        )

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                finish_section()
                header = line[1:-1].split()
                if len(header) != 2 or header[0] != "bank":
                    raise ParameterError(f"line {lineno}: bad section {line!r}")
                section = {}
                section_name = header[1]
                continue
            if "=" not in line:
                raise ParameterError(f"line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if section is not None:
                section[key] = value
            elif key in _ENGINE_KEYS:
                engine_values[key] = _coerce_param(key, value)
            elif key in _PARAM_TYPES:
                param_values[key] = _coerce_param(key, value)
            else:
                raise ParameterError(f"line {lineno}: unknown key {key!r}")
    finish_section()
    return RunConfig(
        banks=banks,
        params=SearchParams(**param_values),
        engine=EngineConfig(**engine_values),
    )
