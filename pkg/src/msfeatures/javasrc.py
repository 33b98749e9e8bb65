"""Neutral syntactic facts for Java sources, built on tree-sitter.

Only what the metric extractors need is kept: type declarations with their
annotations, fields and methods, method-call sites, and a small expression
grammar (literal, name, call, concat, opaque) for URL reconstruction.
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Optional, Union

import tree_sitter_java
from tree_sitter import Language, Node, Parser

log = logging.getLogger(__name__)

SOURCE_SUFFIX = ".java"
EXCLUDED_DIRS = frozenset({
    "target", "build", "generated-sources", "generated-test-sources", "generated",
    ".git", ".idea", "node_modules",
})

# Beyond this many nodes an inlined local binding collapses to Opaque.
_MAX_INLINE_NODES = 2000


class SourceParseError(Exception):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


# -- expression grammar -------------------------------------------------------

@dataclass(frozen=True)
class StringLiteral:
    value: str


@dataclass(frozen=True)
class NameRef:
    identifier: str


@dataclass(frozen=True)
class Call:
    """A method call site; ``receiver_name`` is None for unqualified/``this`` calls."""

    receiver_name: Optional[str]
    method_name: str
    arguments: tuple = ()
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Concat:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Opaque:
    text: str = field(default="", compare=False)


Expr = Union[StringLiteral, NameRef, Call, Concat, Opaque]
CallExpr = Call


def expr_size(expr: Expr) -> int:
    if isinstance(expr, Concat):
        return 1 + expr_size(expr.left) + expr_size(expr.right)
    if isinstance(expr, Call):
        return 1 + sum(expr_size(a) for a in expr.arguments)
    return 1


# -- declarations -------------------------------------------------------------

@dataclass
class Annotation:
    name: str
    members: dict[str, str] = field(default_factory=dict)
    # source text of every member, literal or not
    raw: dict[str, str] = field(default_factory=dict, compare=False)


@dataclass
class FieldDecl:
    name: str
    declared_type_name: str
    is_static: bool = False
    initializer: Optional[Expr] = None


@dataclass
class MethodDecl:
    name: str
    visibility: str = "package"
    parameters: list[tuple[str, str]] = field(default_factory=list)
    annotations: list[Annotation] = field(default_factory=list)
    body_calls: list[Call] = field(default_factory=list)
    return_expr: Optional[Expr] = None
    # (offset, name, expr) in document order; earlier locals already inlined
    local_bindings: list[tuple[int, str, Expr]] = field(default_factory=list, compare=False)
    declared_in: Optional["TypeDecl"] = field(default=None, repr=False, compare=False)

    def bindings_at(self, offset: int) -> dict[str, Expr]:
        """Local name bindings visible just before ``offset``."""
        env: dict[str, Expr] = {name: Opaque(name) for name, _ in self.parameters}
        for pos, name, expr in self.local_bindings:
            if pos >= offset:
                break
            env[name] = expr
        return env


@dataclass
class TypeDecl:
    simple_name: str
    kind: str  # class | interface | enum | record | annotation_decl
    is_abstract: bool = False
    annotations: list[Annotation] = field(default_factory=list)
    super_type_names: list[str] = field(default_factory=list)
    fields: list[FieldDecl] = field(default_factory=list)
    methods: list[MethodDecl] = field(default_factory=list)

    def annotation(self, name: str) -> Optional[Annotation]:
        return next((a for a in self.annotations if a.name == name), None)

    def has_annotation(self, *names: str) -> bool:
        return any(a.name in names for a in self.annotations)

    def field_named(self, name: str) -> Optional[FieldDecl]:
        return next((f for f in self.fields if f.name == name), None)

    def find_method(self, name: str, argc: int) -> Optional[MethodDecl]:
        candidates = [m for m in self.methods if m.name == name]
        exact = [m for m in candidates if len(m.parameters) == argc]
        if exact:
            return exact[0]
        return None


@dataclass
class SourceUnit:
    file_path: str
    package_path: str = "/"
    types: list[TypeDecl] = field(default_factory=list)
    import_names: list[str] = field(default_factory=list)


# -- file enumeration ---------------------------------------------------------

def enumerate_source_files(module_path, exclude_dirs=(), include_tests=False) -> list[Path]:
    """All ``.java`` files under a module, sorted.

    Build output, generated sources and ``exclude_dirs`` (typically nested
    module directories) are skipped; so is ``src/test`` unless ``include_tests``.
    """
    root = Path(module_path)
    if not root.is_dir():
        raise NotADirectoryError(str(root))
    excluded = {Path(p).resolve() for p in exclude_dirs}
    found = []

    def onerror(exc):
        raise exc

    for dirpath, dirnames, filenames in os.walk(root, onerror=onerror):
        here = Path(dirpath)
        keep = []
        for d in dirnames:
            child = here / d
            if d in EXCLUDED_DIRS or child.resolve() in excluded:
                continue
            if not include_tests and d == "test" and here.name == "src":
                continue
            keep.append(d)
        dirnames[:] = keep
        found.extend(here / f for f in filenames if f.endswith(SOURCE_SUFFIX))
    return sorted(found, key=lambda p: p.as_posix())


# -- parsing ------------------------------------------------------------------

@lru_cache(maxsize=1)
def _language() -> Language:
    return Language(tree_sitter_java.language())


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", "s": " ",
            '"': '"', "'": "'", "\\": "\\"}
_ESCAPE_RE = re.compile(r"\\(u+[0-9a-fA-F]{4}|[0-7]{1,3}|.)", re.S)


def _decode_escape(seq: str) -> str:
    def sub(m):
        body = m.group(1)
        if body[0] == "u":
            return chr(int(body.lstrip("u"), 16))
        if body[0] in "01234567":
            return chr(int(body, 8))
        return _ESCAPES.get(body, body)
    return _ESCAPE_RE.sub(sub, seq)


def _text(node: Node) -> str:
    return node.text.decode("utf-8", errors="replace")


def _string_value(node: Node) -> str:
    parts = []
    for child in node.children:
        if child.type in ("string_fragment", "multiline_string_fragment"):
            parts.append(_text(child))
        elif child.type == "escape_sequence":
            parts.append(_decode_escape(_text(child)))
    return "".join(parts)


def simple_type_name(text: str) -> str:
    """``java.util.List<Foo>[]`` -> ``List``."""
    text = re.sub(r"@\w+(\([^)]*\))?\s*", "", text)
    text = text.split("<", 1)[0].replace("[]", "").replace("...", "").strip()
    return text.rsplit(".", 1)[-1].strip()


def _last_identifier(node: Node) -> str:
    return _text(node).rsplit(".", 1)[-1].strip()


class _UnitBuilder:
    def __init__(self, path: str):
        self.path = path

    # expressions

    def expr(self, node: Optional[Node]) -> Expr:
        if node is None:
            return Opaque()
        t = node.type
        if t == "string_literal":
            return StringLiteral(_string_value(node))
        if t == "identifier":
            return NameRef(_text(node))
        if t == "field_access":
            obj = node.child_by_field_name("object")
            if obj is not None and obj.type == "this":
                return NameRef(_text(node.child_by_field_name("field")))
            return Opaque(_text(node))
        if t == "parenthesized_expression":
            inner = [c for c in node.named_children if c.type != "comment"]
            return self.expr(inner[0]) if len(inner) == 1 else Opaque(_text(node))
        if t == "binary_expression":
            op = node.child_by_field_name("operator")
            if op is not None and _text(op) == "+":
                return Concat(self.expr(node.child_by_field_name("left")),
                              self.expr(node.child_by_field_name("right")))
            return Opaque(_text(node))
        if t == "method_invocation":
            return self.call(node)
        return Opaque(_text(node))

    def call(self, node: Node) -> Call:
        obj = node.child_by_field_name("object")
        receiver = None
        if obj is not None:
            if obj.type == "identifier":
                receiver = _text(obj)
            elif obj.type == "this":
                receiver = None
            elif obj.type == "field_access" and obj.child_by_field_name("object").type == "this":
                receiver = _text(obj.child_by_field_name("field"))
            else:
                receiver = _text(obj)
        args_node = node.child_by_field_name("arguments")
        args = ()
        if args_node is not None:
            args = tuple(self.expr(a) for a in args_node.named_children if a.type != "comment")
        return Call(receiver, _text(node.child_by_field_name("name")), args, node.start_byte)

    # annotations and modifiers

    def annotation(self, node: Node) -> Annotation:
        ann = Annotation(_last_identifier(node.child_by_field_name("name")))
        args = node.child_by_field_name("arguments")
        if args is None:
            return ann
        for child in args.named_children:
            if child.type == "comment":
                continue
            if child.type == "element_value_pair":
                key = _text(child.child_by_field_name("key"))
                value = child.child_by_field_name("value")
            else:
                key, value = "value", child
            if value is None:
                continue
            ann.raw[key] = _text(value)
            literal = self.literal(value)
            if literal is not None:
                ann.members[key] = literal
        return ann

    def literal(self, node: Node) -> Optional[str]:
        if node.type == "element_value_array_initializer":
            elems = [c for c in node.named_children if c.type != "comment"]
            return self.literal(elems[0]) if elems else None
        folded = self.expr(node)
        return _fold_literal(folded)

    def modifiers(self, decl: Node) -> tuple[set[str], list[Annotation]]:
        keywords: set[str] = set()
        annotations: list[Annotation] = []
        for child in decl.children:
            if child.type != "modifiers":
                continue
            for m in child.children:
                if m.type in ("annotation", "marker_annotation"):
                    annotations.append(self.annotation(m))
                else:
                    keywords.add(m.type)
        return keywords, annotations

    # declarations

    def type_decl(self, node: Node, out: list[TypeDecl]):
        kind = {
            "class_declaration": "class",
            "interface_declaration": "interface",
            "enum_declaration": "enum",
            "record_declaration": "record",
            "annotation_type_declaration": "annotation_decl",
        }[node.type]
        keywords, annotations = self.modifiers(node)
        decl = TypeDecl(
            simple_name=_text(node.child_by_field_name("name")),
            kind=kind,
            is_abstract=kind == "class" and "abstract" in keywords,
            annotations=annotations,
        )
        for child in node.children:
            if child.type == "superclass":
                decl.super_type_names += [simple_type_name(_text(c)) for c in child.named_children]
            elif child.type in ("super_interfaces", "extends_interfaces"):
                for tl in child.named_children:
                    decl.super_type_names += [simple_type_name(_text(c)) for c in tl.named_children]
        out.append(decl)

        if kind == "record":
            params = node.child_by_field_name("parameters")
            for p in params.named_children if params is not None else ():
                if p.type == "formal_parameter":
                    decl.fields.append(FieldDecl(_text(p.child_by_field_name("name")),
                                                 simple_type_name(_text(p.child_by_field_name("type")))))

        body = node.child_by_field_name("body")
        if body is None:
            return
        members = list(body.named_children)
        for child in body.named_children:
            if child.type == "enum_body_declarations":
                members.extend(child.named_children)
        member_of_interface = kind in ("interface", "annotation_decl")
        for member in members:
            if member.type == "field_declaration" or member.type == "constant_declaration":
                self.field_decl(member, decl, member_of_interface)
            elif member.type == "method_declaration":
                self.method_decl(member, decl, member_of_interface)
            elif member.type in ("class_declaration", "interface_declaration", "enum_declaration",
                                 "record_declaration", "annotation_type_declaration"):
                self.type_decl(member, out)

    def field_decl(self, node: Node, decl: TypeDecl, in_interface: bool):
        keywords, _ = self.modifiers(node)
        type_name = simple_type_name(_text(node.child_by_field_name("type")))
        for child in node.children:
            if child.type != "variable_declarator":
                continue
            name = _text(child.child_by_field_name("name"))
            value = child.child_by_field_name("value")
            decl.fields.append(FieldDecl(
                name=name,
                declared_type_name=type_name,
                is_static=in_interface or "static" in keywords,
                initializer=self.expr(value) if value is not None else None,
            ))

    def method_decl(self, node: Node, decl: TypeDecl, in_interface: bool):
        keywords, annotations = self.modifiers(node)
        if "public" in keywords or (in_interface and "private" not in keywords):
            visibility = "public"
        elif "protected" in keywords:
            visibility = "protected"
        elif "private" in keywords:
            visibility = "private"
        else:
            visibility = "package"
        params = []
        params_node = node.child_by_field_name("parameters")
        for p in params_node.named_children if params_node is not None else ():
            if p.type == "formal_parameter":
                params.append((_text(p.child_by_field_name("name")),
                               simple_type_name(_text(p.child_by_field_name("type")))))
            elif p.type == "spread_parameter":
                type_node = next((c for c in p.named_children
                                  if c.type not in ("modifiers", "variable_declarator")), None)
                declarator = next((c for c in p.named_children if c.type == "variable_declarator"), None)
                if declarator is not None:
                    params.append((_text(declarator.child_by_field_name("name")),
                                   simple_type_name(_text(type_node)) if type_node else ""))
        method = MethodDecl(
            name=_text(node.child_by_field_name("name")),
            visibility=visibility,
            parameters=params,
            annotations=annotations,
            declared_in=decl,
        )
        body = node.child_by_field_name("body")
        if body is not None:
            self.method_body(body, method)
        decl.methods.append(method)

    def method_body(self, body: Node, method: MethodDecl):
        env: dict[str, Expr] = {}
        for n in _preorder(body):
            t = n.type
            if t == "method_invocation":
                method.body_calls.append(self.call(n))
            elif t == "variable_declarator" and n.parent is not None \
                    and n.parent.type == "local_variable_declaration":
                value = n.child_by_field_name("value")
                if value is not None:
                    name = _text(n.child_by_field_name("name"))
                    expr = _inline(self.expr(value), env)
                    env[name] = expr
                    method.local_bindings.append((n.end_byte, name, expr))
            elif t == "assignment_expression":
                left = n.child_by_field_name("left")
                op = n.child_by_field_name("operator")
                if left is None or op is None or left.type != "identifier":
                    continue
                name = _text(left)
                right = _inline(self.expr(n.child_by_field_name("right")), env)
                if _text(op) == "=":
                    expr = right
                elif _text(op) == "+=":
                    expr = Concat(env.get(name, NameRef(name)), right)
                else:
                    expr = Opaque(_text(n))
                env[name] = expr
                method.local_bindings.append((n.end_byte, name, expr))
        statements = [c for c in body.named_children if c.type != "comment"]
        if len(statements) == 1 and statements[0].type == "return_statement":
            values = [c for c in statements[0].named_children if c.type != "comment"]
            if values:
                method.return_expr = self.expr(values[0])


def _preorder(node: Node) -> Iterator[Node]:
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def _inline(expr: Expr, env: dict[str, Expr]) -> Expr:
    """Substitute earlier local bindings into ``expr``."""
    if not env:
        return expr

    def walk(e):
        if isinstance(e, NameRef) and e.identifier in env:
            return env[e.identifier]
        if isinstance(e, Concat):
            return Concat(walk(e.left), walk(e.right))
        if isinstance(e, Call):
            return Call(e.receiver_name, e.method_name, tuple(walk(a) for a in e.arguments), e.offset)
        return e

    result = walk(expr)
    if expr_size(result) > _MAX_INLINE_NODES:
        return Opaque()
    return result


def _fold_literal(expr: Expr) -> Optional[str]:
    if isinstance(expr, StringLiteral):
        return expr.value
    if isinstance(expr, Concat):
        left, right = _fold_literal(expr.left), _fold_literal(expr.right)
        if left is not None and right is not None:
            return left + right
    return None


def parse_source(text: str, path: str = "<memory>") -> SourceUnit:
    """Parse Java source text; raises :class:`SourceParseError` on syntax errors."""
    parser = Parser(_language())
    tree = parser.parse(text.encode("utf-8"))
    root = tree.root_node
    if root.has_error:
        line = _first_error_line(root)
        raise SourceParseError(path, f"syntax error near line {line}")
    builder = _UnitBuilder(path)
    unit = SourceUnit(file_path=path)
    for child in root.named_children:
        if child.type == "package_declaration":
            name = next((c for c in child.named_children
                         if c.type in ("scoped_identifier", "identifier")), None)
            if name is not None:
                unit.package_path = "/" + _text(name).replace(".", "/").replace(" ", "") + "/"
        elif child.type == "import_declaration":
            parts = [_text(c) for c in child.named_children if c.type in ("scoped_identifier", "identifier")]
            if parts:
                suffix = ".*" if any(c.type == "asterisk" for c in child.children) else ""
                unit.import_names.append(parts[0] + suffix)
        elif child.type in ("class_declaration", "interface_declaration", "enum_declaration",
                            "record_declaration", "annotation_type_declaration"):
            builder.type_decl(child, unit.types)
    return unit


def _first_error_line(root: Node) -> int:
    for n in _preorder(root):
        if n.type == "ERROR" or n.is_missing:
            return n.start_point[0] + 1
    return root.start_point[0] + 1


def parse_source_unit(file_path) -> SourceUnit:
    try:
        data = Path(file_path).read_bytes()
    except OSError as exc:
        raise SourceParseError(file_path, f"cannot read: {exc}") from exc
    return parse_source(data.decode("utf-8", errors="replace"), str(file_path))
