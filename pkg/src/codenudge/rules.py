"""The five code-quality checks and the violation type they produce.

Every checker is a pure function from a :class:`SyntaxModel` to a list of
:class:`Violation`.  Checks are syntactic: nothing is type-resolved, so
``x.size() == 0`` is reported whatever ``x`` is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Optional

from .java import nodes as n
from .java.parser import parse_source

RULES: dict[str, str] = {
    "S109": "Magic numbers should not be used",
    "S1155": "Collection.isEmpty() should be used to test for emptiness",
    "S1213": "The members of an interface or class declaration should appear in a pre-defined order",
    "S1481": "Unused local variables should be removed",
    "S2119": '"Random" objects should be reused',
}
ALL_RULES = frozenset(RULES)
JAVA_SUFFIX = ".java"

ALLOWED_MAGIC_NUMBERS = frozenset({-1.0, 0.0, 1.0})

MEMBER_RANK = {
    n.STATIC_FIELD: 0,
    n.STATIC_INITIALIZER: 1,
    n.INSTANCE_FIELD: 2,
    n.INSTANCE_INITIALIZER: 3,
    n.CONSTRUCTOR: 4,
    n.METHOD: 5,
}
_RANK_NAMES = {
    0: "static field",
    1: "static initializer",
    2: "instance field",
    3: "instance initializer",
    4: "constructor",
    5: "method",
}

# (operator, literal value) pairs that test emptiness, size call on the left.
_EMPTINESS_SIZE_FIRST = {("==", 0), ("!=", 0), (">", 0), (">=", 1), ("<", 1), ("<=", 0)}
_EMPTINESS_LITERAL_FIRST = {("==", 0), ("!=", 0), ("<", 0), ("<=", 1), (">", 1), (">=", 0)}


class UnknownRule(ValueError):
    pass


def parse_rule_id(text: str) -> str:
    rule = text.strip().upper()
    if rule not in RULES:
        raise UnknownRule(f"unknown rule {text!r}; valid rules: {', '.join(sorted(RULES))}")
    return rule


@dataclass(frozen=True, order=True)
class Violation:
    file: str
    line: int
    rule: str
    line_text: str = field(default="", compare=False)
    message: str = field(default="", compare=False)

    @property
    def sort_key(self) -> tuple[str, int, str]:
        return (self.file, self.line, self.rule)


class _Emitter:
    def __init__(self, model: n.SyntaxModel, rule: str):
        self.model = model
        self.rule = rule
        self.found: list[Violation] = []

    def __call__(self, line: int, message: str) -> None:
        if self.model.in_error_span(line):
            return
        self.found.append(Violation(self.model.file_path, line, self.rule, self.model.line_text(line), message))


def _walk_code(root: n.Node) -> Iterator[n.Node]:
    """Pre-order walk that does not enter nested type bodies."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(child for child in reversed(list(node.children())) if not isinstance(child, n.TypeDecl))


def numeric_value(text: str) -> Optional[float]:
    """Value of a Java numeric literal, or None when it cannot be read."""
    t = text.replace("_", "")
    lower = t.lower()
    try:
        if lower.startswith("0x"):
            body = lower[2:]
            if "p" in body:
                return float.fromhex("0x" + body.rstrip("fd"))
            return float(int(body.rstrip("l"), 16))
        if lower.startswith("0b"):
            return float(int(lower[2:].rstrip("l"), 2))
        if lower[-1:] in ("f", "d") or "." in lower or "e" in lower:
            return float(lower.rstrip("fd"))
        body = lower.rstrip("l")
        if len(body) > 1 and body.startswith("0"):
            return float(int(body, 8))
        return float(int(body))
    except ValueError:
        return None


# -- S109 --------------------------------------------------------------------


def check_s109_magic_numbers(model: n.SyntaxModel) -> list[Violation]:
    emit = _Emitter(model, "S109")
    exempt: set[int] = set()
    for decl in model.all_type_decls():
        for member in decl.members:
            if member.is_final and member.initializer is not None:
                exempt.update(id(x) for x in _walk_code(member.initializer))
        for const in decl.enum_constants:
            for arg in const.args:
                exempt.update(id(x) for x in _walk_code(arg))
    for decl in model.type_decls:
        for node in decl.walk():
            if isinstance(node, n.LocalVarDecl) and node.is_final and node.initializer is not None:
                exempt.update(id(x) for x in _walk_code(node.initializer))
    for decl in model.type_decls:
        for node in decl.walk():
            if not isinstance(node, n.NumberLit) or id(node) in exempt:
                continue
            if numeric_value(node.text) in ALLOWED_MAGIC_NUMBERS:
                continue
            emit(node.line, f"Assign the number {node.text} to a well-named constant, and use the constant instead.")
    return emit.found


# -- S1481 -------------------------------------------------------------------


@dataclass
class _Symbol:
    name: str
    decl: Optional[n.LocalVarDecl]
    used: bool = False


class _LocalUsage:
    """Resolve simple-name reads to the innermost visible declaration."""

    def __init__(self) -> None:
        self.scopes: list[dict[str, _Symbol]] = []
        self.locals: list[_Symbol] = []

    def declare(self, name: str, decl: Optional[n.LocalVarDecl] = None) -> None:
        sym = _Symbol(name, decl)
        self.scopes[-1][name] = sym
        if decl is not None:
            self.locals.append(sym)

    def use(self, name: str) -> None:
        for scope in reversed(self.scopes):
            sym = scope.get(name)
            if sym is not None:
                sym.used = True
                return

    def scoped(self, visit: Callable[[], None], names: Iterable[str] = ()) -> None:
        self.scopes.append({})
        for name in names:
            self.declare(name)
        try:
            visit()
        finally:
            self.scopes.pop()

    def visit_all(self, nodes: Iterable[Optional[n.Node]]) -> None:
        for node in nodes:
            if node is not None:
                self.visit(node)

    def visit_type(self, decl: n.TypeDecl) -> None:
        field_names = [m.name for m in decl.members if m.kind in (n.STATIC_FIELD, n.INSTANCE_FIELD)]
        field_names += [c.name for c in decl.enum_constants]

        def body() -> None:
            for const in decl.enum_constants:
                self.visit_all(const.args)
                if const.body is not None:
                    self.visit_type(const.body)
            for member in decl.members:
                if member.nested is not None:
                    self.visit_type(member.nested)
                elif member.initializer is not None:
                    self.visit(member.initializer)
                elif member.body is not None:
                    self.scoped(lambda m=member: self.visit(m.body), [p.name for p in member.params])

        self.scoped(body, field_names)

    def visit(self, node: n.Node) -> None:
        if isinstance(node, n.Name):
            self.use(node.name)
        elif isinstance(node, n.TypeDecl):
            self.visit_type(node)
        elif isinstance(node, n.Block):
            self.scoped(lambda: self.visit_all(node.stmts))
        elif isinstance(node, n.LocalVarDecl):
            if node.initializer is not None:
                self.visit(node.initializer)
            self.declare(node.name, node)
        elif isinstance(node, n.Loop):
            self.scoped(lambda: self._visit_loop(node))
        elif isinstance(node, n.Try):
            self._visit_try(node)
        elif isinstance(node, (n.Switch, n.SwitchExpr)):
            self.visit(node.selector)
            self.scoped(lambda: self.visit_all(node.cases))
        elif isinstance(node, n.Lambda):
            self.scoped(lambda: self.visit(node.body), node.params)
        elif isinstance(node, n.InstanceOf):
            self.visit(node.expr)
            if node.binding:
                self.declare(node.binding)
        else:
            self.visit_all(node.children())

    def _visit_loop(self, loop: n.Loop) -> None:
        if loop.kind == "foreach":
            self.visit_all([loop.condition])
            for var in loop.init:
                if isinstance(var, n.LocalVarDecl):
                    self.declare(var.name)
            self.visit_all([loop.body])
            return
        self.visit_all(loop.init)
        self.visit_all([loop.condition, *loop.update, loop.body])

    def _visit_try(self, node: n.Try) -> None:
        def guarded() -> None:
            for res in node.resources:
                if isinstance(res, n.LocalVarDecl):
                    self.visit_all([res.initializer])
                    self.declare(res.name)
                else:
                    self.visit(res)
            self.visit(node.body)

        self.scoped(guarded)
        for clause in node.catches:
            self.scoped(lambda c=clause: self.visit(c.body), [clause.name])
        self.visit_all([node.final])


def check_s1481_unused_locals(model: n.SyntaxModel) -> list[Violation]:
    emit = _Emitter(model, "S1481")
    usage = _LocalUsage()
    for decl in model.type_decls:
        usage.visit_type(decl)
    for sym in usage.locals:
        if not sym.used:
            assert sym.decl is not None
            emit(sym.decl.name_line or sym.decl.line, f'Remove this unused "{sym.name}" local variable.')
    return emit.found


# -- S1155 -------------------------------------------------------------------


def _is_size_call(expr: n.Expr) -> bool:
    return isinstance(expr, n.MethodCall) and expr.name == "size" and not expr.args and expr.receiver is not None


def _int_literal(expr: n.Expr) -> Optional[float]:
    return numeric_value(expr.text) if isinstance(expr, n.NumberLit) else None


def is_emptiness_test(expr: n.Node) -> bool:
    if not isinstance(expr, n.BinaryOp):
        return False
    if _is_size_call(expr.lhs):
        value = _int_literal(expr.rhs)
        return value is not None and (expr.op, value) in _EMPTINESS_SIZE_FIRST
    if _is_size_call(expr.rhs):
        value = _int_literal(expr.lhs)
        return value is not None and (expr.op, value) in _EMPTINESS_LITERAL_FIRST
    return False


def check_s1155_is_empty(model: n.SyntaxModel) -> list[Violation]:
    emit = _Emitter(model, "S1155")
    for decl in model.type_decls:
        for node in decl.walk():
            if is_emptiness_test(node):
                emit(node.line, "Use isEmpty() to check whether the collection is empty or not.")
    return emit.found


# -- S1213 -------------------------------------------------------------------


def check_s1213_member_order(model: n.SyntaxModel) -> list[Violation]:
    emit = _Emitter(model, "S1213")
    for decl in model.all_type_decls():
        highest = -1
        for member in decl.members:
            rank = MEMBER_RANK.get(member.kind)
            if rank is None:
                continue
            if rank < highest:
                emit(
                    member.line,
                    f"Move this {_RANK_NAMES[rank]} to comply with Java Code Conventions "
                    f"(it should come before any {_RANK_NAMES[highest]}).",
                )
            else:
                highest = rank
    return emit.found


# -- S2119 -------------------------------------------------------------------


def _is_random(class_name: str) -> bool:
    return class_name == "Random" or class_name.endswith(".Random")


def check_s2119_random_reuse(model: n.SyntaxModel) -> list[Violation]:
    emit = _Emitter(model, "S2119")
    for decl in model.all_type_decls():
        for member in decl.members:
            if member.kind not in (n.CONSTRUCTOR, n.METHOD) or member.body is None:
                continue
            for node in _walk_code(member.body):
                if isinstance(node, n.ObjectCreation) and _is_random(node.class_name):
                    emit(node.line, 'Save and re-use this "Random".')
    return emit.found


CHECKERS: dict[str, Callable[[n.SyntaxModel], list[Violation]]] = {
    "S109": check_s109_magic_numbers,
    "S1155": check_s1155_is_empty,
    "S1213": check_s1213_member_order,
    "S1481": check_s1481_unused_locals,
    "S2119": check_s2119_random_reuse,
}


def check_all(model: n.SyntaxModel, enabled: Optional[Iterable[str]] = None) -> list[Violation]:
    rules = ALL_RULES if enabled is None else frozenset(enabled)
    unknown = rules - ALL_RULES
    if unknown:
        raise UnknownRule(f"unknown rules: {', '.join(sorted(unknown))}")
    found: list[Violation] = []
    for rule in sorted(rules):
        found.extend(CHECKERS[rule](model))
    found.sort(key=lambda v: v.sort_key)
    return found


def is_java_path(path: str) -> bool:
    return path.endswith(JAVA_SUFFIX)


def check_source(source: str, path: str, enabled: Optional[Iterable[str]] = None) -> list[Violation]:
    return check_all(parse_source(source, path), enabled)


def check_tree(files: Mapping[str, str], enabled: Optional[Iterable[str]] = None) -> list[Violation]:
    """Check every Java file of a snapshot; other paths are ignored."""
    found: list[Violation] = []
    for path in sorted(files):
        if is_java_path(path):
            found.extend(check_source(files[path], path, enabled))
    found.sort(key=lambda v: v.sort_key)
    return found
