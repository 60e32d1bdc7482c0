"""Run configuration: defaults, key/value config files, flag overrides.

A config is a flat set of dotted keys grouped into sections.  Files use
a TOML-like surface — ``[section]`` headers with ``key = value`` lines,
or fully dotted ``section.key = value`` lines; ``#`` starts a full-line
comment.  Command-line flags reuse the dotted names and take precedence
over the file.  The effective configuration is echoed verbatim into
every output directory so a run can be reproduced from its artifacts.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    """Malformed config file or an unknown/uncoercible key."""


@dataclass
class PathsConfig:
    corpus: str = ""
    codebook: str = ""
    kb: str = ""
    dataset: str = ""
    index: str = ""
    output_dir: str = "runs"


@dataclass
class RetrievalConfig:
    radius: int = 2
    nbits: int = 2048
    k: int = 5


@dataclass
class FilterConfig:
    budget: int = 20


@dataclass
class LlmConfig:
    endpoint: str = ""
    model: str = ""
    temperature: float = 0.0
    max_tokens: int = 2000
    credential_env: str = "ATOMPRIOR_API_KEY"
    concurrency: int = 4


@dataclass
class SplitConfig:
    kind: str = "random"
    ratio: float = 0.9
    seed: int = 42


@dataclass
class TaskConfig:
    instruction: str = ""
    kind: str = "classification"


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    llm: LlmConfig = field(default_factory=LlmConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    task: TaskConfig = field(default_factory=TaskConfig)


_HELP = {
    "paths.corpus": "SMILES corpus file, one molecule per line",
    "paths.codebook": "codebook JSON (created if absent by build-kb)",
    "paths.kb": "aggregated token knowledge base JSON",
    "paths.dataset": "labelled dataset CSV",
    "paths.index": "analogue index JSONL",
    "paths.output_dir": "directory for run artifacts",
    "retrieval.radius": "circular fingerprint radius",
    "retrieval.nbits": "fingerprint length in bits",
    "retrieval.k": "analogues retrieved per query",
    "filter.budget": "max atom cards per molecule",
    "llm.endpoint": "chat-completions API endpoint URL",
    "llm.model": "provider model name",
    "llm.temperature": "decoding temperature",
    "llm.max_tokens": "decoding token cap",
    "llm.credential_env": "env var holding the API key",
    "llm.concurrency": "parallel requests during eval",
    "split.kind": "random or scaffold",
    "split.ratio": "train:test ratio",
    "split.seed": "shuffle seed",
    "task.instruction": "task question posed to the model",
    "task.kind": "classification or regression",
}


def format_ratio(value: float) -> str:
    """Render 0.9 as the conventional 90:10 form when clean."""
    train = value * 100
    if abs(train - round(train)) < 1e-9:
        return f"{round(train)}:{100 - round(train)}"
    return repr(value)


def parse_ratio(raw: str) -> float:
    """Accept either a float in (0,1) or a TRAIN:TEST percentage pair."""
    text = raw.strip()
    if ":" in text:
        left, _, right = text.partition(":")
        train, test = float(left), float(right)
        if train <= 0 or test <= 0:
            raise ConfigError(f"invalid split ratio: {raw!r}")
        value = train / (train + test)
    else:
        value = float(text)
    if not 0.0 < value < 1.0:
        raise ConfigError(f"split ratio must fall in (0, 1): {raw!r}")
    return value


def iter_keys():
    """Yield (dotted_key, default_value, display_default, help) rows."""
    base = PipelineConfig()
    for section_field in fields(base):
        section = getattr(base, section_field.name)
        for leaf in fields(section):
            key = f"{section_field.name}.{leaf.name}"
            default = getattr(section, leaf.name)
            display = format_ratio(default) if key == "split.ratio" else default
            yield key, default, display, _HELP[key]


def _coerce(key: str, raw: str, current) -> object:
    text = raw.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        text = text[1:-1]
    if key == "split.ratio":
        return parse_ratio(text)
    try:
        if isinstance(current, bool):
            raise ConfigError(f"unexpected boolean key: {key}")
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float):
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return text


def set_key(config: PipelineConfig, key: str, raw: str) -> None:
    """Assign one dotted key from its textual form, with type coercion."""
    section_name, _, leaf = key.partition(".")
    section = getattr(config, section_name, None)
    if section is None or not leaf or not hasattr(section, leaf):
        raise ConfigError(f"unknown config key: {key}")
    setattr(section, leaf, _coerce(key, raw, getattr(section, leaf)))


def parse_config_text(text: str) -> dict:
    """Flatten file content to {dotted_key: raw_value}."""
    values: dict = {}
    section = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if "." not in key:
            if not section:
                raise ConfigError(
                    f"line {lineno}: key {key!r} outside any [section]"
                )
            key = f"{section}.{key}"
        values[key] = value.strip()
    return values


def load_config(path=None, overrides=None) -> PipelineConfig:
    """Defaults, then the config file, then flag overrides (flags win)."""
    config = PipelineConfig()
    if path is not None:
        for key, raw in parse_config_text(Path(path).read_text()).items():
            set_key(config, key, raw)
    for key, raw in (overrides or {}).items():
        set_key(config, key, raw)
    return config


def render_config(config: PipelineConfig) -> str:
    """Canonical echo of the effective configuration."""
    lines = []
    base = PipelineConfig()
    for section_field in fields(base):
        lines.append(f"[{section_field.name}]")
        section = getattr(config, section_field.name)
        for leaf in fields(section):
            value = getattr(section, leaf.name)
            if f"{section_field.name}.{leaf.name}" == "split.ratio":
                value = format_ratio(value)
            lines.append(f"{leaf.name} = {value}")
        lines.append("")
    return "\n".join(lines)
