"""Extraction settings shared by the classifiers and the call-graph extractor.

A config file is a YAML mapping whose keys are the field names of
:class:`ExtractionConfig`; anything not given keeps its default::

    entity_package_pattern: '/(?i)(entity|entitys|pojo|model|domain|bean)/'
    entity_annotations: [Entity, Table]
    include_inherited_entity_fields: true
    nano_thresholds: {entityNum: 1, controllerNum: 1, APINum: 2}
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import yaml

DEFAULT_REST_CALL_METHODS = frozenset({
    "getForObject", "getForEntity", "postForObject", "postForEntity",
    "exchange", "execute", "put", "delete", "patchForObject",
    "headForHeaders", "optionsForAllow",
})

_INLINE_FLAGS = re.compile(r"\(\?([aiLmsux]+)\)")


class ConfigError(ValueError):
    pass


@lru_cache(maxsize=256)
def compile_pattern(pattern: str) -> re.Pattern[str]:
    """Compile a Java-style regex.

    Java accepts inline flags such as ``(?i)`` anywhere in a pattern; Python
    only at the start, so they are hoisted.
    """
    flags = "".join(m.group(1) for m in _INLINE_FLAGS.finditer(pattern))
    body = _INLINE_FLAGS.sub("", pattern)
    if flags:
        body = "(?" + "".join(sorted(set(flags))) + ")" + body
    try:
        return re.compile(body)
    except re.error as exc:
        raise ConfigError(f"invalid pattern {pattern!r}: {exc}") from exc


@dataclass(frozen=True)
class ExtractionConfig:
    entity_package_pattern: str = r"/(?i)(entity|pojo|model|domain|bean)/"
    dto_package_pattern: str = r"/(?i)dto/"
    dto_name_pattern: str = r"(?i)(^dto.*|.*dto$)"
    entity_annotations: frozenset[str] = frozenset({"Entity", "Table", "TableName", "Document"})
    version_pattern: str = r"(?i)v\d+(\.\d+)?"
    service_name_pattern: str = r"\S*(service|Service|SERVICE)"
    include_inherited_entity_fields: bool = False
    rest_client_types: frozenset[str] = frozenset({"RestTemplate"})
    rest_call_methods: frozenset[str] = DEFAULT_REST_CALL_METHODS
    nano_thresholds: dict[str, int] = field(
        default_factory=lambda: {"entityNum": 1, "controllerNum": 1, "APINum": 2}
    )

    def __post_init__(self):
        for name in ("entity_package_pattern", "dto_package_pattern", "dto_name_pattern",
                     "version_pattern", "service_name_pattern"):
            compile_pattern(getattr(self, name))

    def regex(self, name: str) -> re.Pattern[str]:
        return compile_pattern(getattr(self, name))


_SET_FIELDS = {"entity_annotations", "rest_client_types", "rest_call_methods"}


def load_config(path: str | Path | None) -> ExtractionConfig:
    if path is None:
        return ExtractionConfig()
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    known = {f.name for f in dataclasses.fields(ExtractionConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _SET_FIELDS:
            if not isinstance(value, (list, tuple, set)):
                raise ConfigError(f"{key} must be a list")
            value = frozenset(str(v) for v in value)
        elif key == "nano_thresholds":
            merged = ExtractionConfig().nano_thresholds
            merged.update({str(k): int(v) for k, v in dict(value).items()})
            value = merged
        elif key == "include_inherited_entity_fields":
            value = bool(value)
        else:
            value = str(value)
        kwargs[key] = value
    return ExtractionConfig(**kwargs)
