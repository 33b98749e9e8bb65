"""Maven module tree discovery and microservice identification."""

from __future__ import annotations

import enum
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Optional, Sequence

import yaml

from .javasrc import SourceUnit

log = logging.getLogger(__name__)

POM = "pom.xml"


class DiscoveryError(Exception):
    pass


class InfraRole(str, enum.Enum):
    BUSINESS = "business"
    REGISTRY = "registry"
    GATEWAY = "gateway"
    CONFIG_SERVER = "config_server"
    OTHER_INFRA = "other_infra"


@dataclass(eq=False)
class ModuleNode:
    path: Path
    artifact_id: str
    group_id: str = ""
    parent: Optional["ModuleNode"] = field(default=None, repr=False)
    children: list["ModuleNode"] = field(default_factory=list)
    declared_dependencies: list[tuple[str, str]] = field(default_factory=list)
    missing_descriptor: bool = False

    def walk(self) -> Iterator["ModuleNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(eq=False)
class MicroserviceModule:
    module: ModuleNode
    service_name: str = ""
    infra_role: InfraRole = InfraRole.BUSINESS
    units: list[SourceUnit] = field(default_factory=list, repr=False)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child(elem: ET.Element, name: str) -> Optional[ET.Element]:
    return next((c for c in elem if _local(c.tag) == name), None)


def _children(elem: Optional[ET.Element], name: str) -> list[ET.Element]:
    if elem is None:
        return []
    return [c for c in elem if _local(c.tag) == name]


def _text(elem: Optional[ET.Element]) -> str:
    return (elem.text or "").strip() if elem is not None else ""


@dataclass
class PomInfo:
    artifact_id: str
    group_id: str
    modules: list[str]
    dependencies: list[tuple[str, str]]


def read_pom(pom_path: Path) -> PomInfo:
    try:
        root = ET.parse(pom_path).getroot()
    except ET.ParseError as exc:
        raise DiscoveryError(f"malformed {pom_path}: {exc}") from exc
    parent = _child(root, "parent")
    group = _text(_child(root, "groupId")) or _text(_child(parent, "groupId") if parent is not None else None)
    deps = [(_text(_child(d, "groupId")), _text(_child(d, "artifactId")))
            for d in _children(_child(root, "dependencies"), "dependency")]
    return PomInfo(
        artifact_id=_text(_child(root, "artifactId")) or pom_path.parent.name,
        group_id=group,
        modules=[_text(m) for m in _children(_child(root, "modules"), "module") if _text(m)],
        dependencies=deps,
    )


def discover_module_tree(root) -> ModuleNode:
    root = Path(root).resolve()
    if not (root / POM).is_file():
        raise DiscoveryError(f"no {POM} in {root}")
    return _expand(root, None, {root})


def _expand(path: Path, parent: Optional[ModuleNode], seen: set[Path]) -> ModuleNode:
    info = read_pom(path / POM)
    node = ModuleNode(path=path, artifact_id=info.artifact_id, group_id=info.group_id,
                      parent=parent, declared_dependencies=info.dependencies)
    for entry in info.modules:
        target = (path / entry).resolve()
        if target.name == POM or target.suffix == ".xml":
            target = target.parent
        if target in seen or path not in target.parents:
            log.warning("module %r of %s skipped: outside parent or repeated", entry, path)
            continue
        seen.add(target)
        if not (target / POM).is_file():
            log.warning("module %r of %s has no %s", entry, path, POM)
            node.children.append(ModuleNode(path=target, artifact_id=target.name,
                                            parent=node, missing_descriptor=True))
            continue
        node.children.append(_expand(target, node, seen))
    return node


def find_module_roots(repo_root, max_depth: int = 3) -> list[Path]:
    """Shallowest directories holding a ``pom.xml`` (for repos without a root POM)."""
    repo_root = Path(repo_root)
    if (repo_root / POM).is_file():
        return [repo_root]
    found: list[Path] = []
    frontier = [repo_root]
    for _ in range(max_depth):
        nxt = []
        for d in frontier:
            for child in sorted(p for p in d.iterdir() if p.is_dir() and not p.name.startswith(".")):
                if (child / POM).is_file():
                    found.append(child)
                elif child.name not in ("target", "node_modules"):
                    nxt.append(child)
        frontier = nxt
    return found


# -- microservices -----------------------------------------------------------------

def identify_microservices(tree: ModuleNode, sources: Mapping[Path, Sequence[SourceUnit]]) -> list[MicroserviceModule]:
    result = []
    for node in tree.walk():
        units = list(sources.get(node.path, ()))
        if any(t.has_annotation("SpringBootApplication") for u in units for t in u.types):
            result.append(MicroserviceModule(module=node, units=units))
    return result


_REGISTRY_ANNOTATIONS = {"EnableEurekaServer"}
_GATEWAY_ANNOTATIONS = {"EnableZuulProxy", "EnableZuulServer"}
_CONFIG_ANNOTATIONS = {"EnableConfigServer"}
_OTHER_INFRA_ANNOTATIONS = {"EnableAdminServer", "EnableHystrixDashboard", "EnableTurbine",
                            "EnableTurbineStream", "EnableZipkinServer"}

_REGISTRY_ARTIFACTS = re.compile(r"eureka-server|nacos-server")
_GATEWAY_ARTIFACTS = re.compile(r"gateway|zuul")
_CONFIG_ARTIFACTS = re.compile(r"config-server")
_OTHER_INFRA_ARTIFACTS = re.compile(r"admin-starter-server|admin-server|zipkin-server|hystrix-dashboard|turbine")


def classify_infrastructure_role(ms: MicroserviceModule) -> InfraRole:
    annotations = {a.name for u in ms.units for t in u.types for a in t.annotations}
    artifacts = [a for _, a in ms.module.declared_dependencies]

    def depends(pattern):
        return any(pattern.search(a) for a in artifacts)

    if annotations & _REGISTRY_ANNOTATIONS or depends(_REGISTRY_ARTIFACTS):
        return InfraRole.REGISTRY
    if annotations & _GATEWAY_ANNOTATIONS or depends(_GATEWAY_ARTIFACTS):
        return InfraRole.GATEWAY
    if annotations & _CONFIG_ANNOTATIONS or depends(_CONFIG_ARTIFACTS):
        return InfraRole.CONFIG_SERVER
    if annotations & _OTHER_INFRA_ANNOTATIONS or depends(_OTHER_INFRA_ARTIFACTS):
        return InfraRole.OTHER_INFRA
    return InfraRole.BUSINESS


# -- service names -------------------------------------------------------------------

_CONFIG_BASENAMES = ("application", "bootstrap")
_PLACEHOLDER = re.compile(r"^\$\{[^:}]+:([^}]*)\}$")


def read_properties(path: Path) -> dict[str, str]:
    """Minimal java.util.Properties reader (comments, ``=``/``:`` separators, continuations)."""
    props: dict[str, str] = {}
    pending = ""
    for raw in path.read_text(encoding="utf-8", errors="replace").splitlines():
        line = pending + raw.lstrip() if pending else raw.strip()
        if line.endswith("\\") and not line.endswith("\\\\"):
            pending = line[:-1]
            continue
        pending = ""
        if not line or line[0] in "#!":
            continue
        m = re.match(r"((?:\\.|[^=:\s\\])+)\s*[=:\s]\s*(.*)$", line)
        if m:
            props[m.group(1).replace("\\", "")] = m.group(2).strip()
        else:
            props[line] = ""
    return props


def _yaml_lookup(doc, dotted: str) -> Optional[str]:
    if not isinstance(doc, dict):
        return None
    if dotted in doc and not isinstance(doc[dotted], (dict, list)):
        return str(doc[dotted])
    head, _, rest = dotted.partition(".")
    while rest:
        if head in doc:
            return _yaml_lookup(doc[head], rest)
        nxt, _, rest = rest.partition(".")
        head = f"{head}.{nxt}"
    value = doc.get(head)
    return None if value is None or isinstance(value, (dict, list)) else str(value)


def _clean(value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    value = value.strip()
    m = _PLACEHOLDER.match(value)
    if m:
        value = m.group(1).strip()
    elif value.startswith("${"):
        return None  # unresolvable without the environment
    return value or None


def configured_service_name(module_path: Path) -> Optional[str]:
    resources = Path(module_path) / "src" / "main" / "resources"
    for base in _CONFIG_BASENAMES:
        path = resources / f"{base}.properties"
        if path.is_file():
            name = _clean(read_properties(path).get("spring.application.name"))
            if name:
                return name
    for base in _CONFIG_BASENAMES:
        for ext in ("yml", "yaml"):
            path = resources / f"{base}.{ext}"
            if not path.is_file():
                continue
            try:
                docs = yaml.safe_load_all(path.read_text(encoding="utf-8", errors="replace"))
                first = next(iter(docs), None)
            except yaml.YAMLError as exc:
                log.warning("unreadable %s: %s", path, exc)
                continue
            name = _clean(_yaml_lookup(first, "spring.application.name"))
            if name:
                return name
    return None


def resolve_service_name(ms: MicroserviceModule) -> str:
    return configured_service_name(ms.module.path) or ms.module.artifact_id.strip()
