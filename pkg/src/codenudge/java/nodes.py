"""Syntax tree for the Java subset understood by the rule checkers.

Parentheses are not represented: ``(a + b)`` parses to the inner expression.
Constructs no rule looks at (annotations, type arguments) are not represented
either; types survive only as their source text.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Union


@dataclass
class Node:
    line: int

    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, list):
                for item in value:
                    if isinstance(item, Node):
                        yield item

    def walk(self) -> Iterator["Node"]:
        """Pre-order traversal, ``self`` included."""
        stack: list[Node] = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(list(node.children())))


# -- expressions -------------------------------------------------------------


@dataclass
class Expr(Node):
    pass


@dataclass
class NumberLit(Expr):
    text: str


@dataclass
class Literal(Expr):
    """String, char, boolean and null literals."""

    text: str


@dataclass
class Name(Expr):
    """A read of a simple name."""

    name: str


@dataclass
class This(Expr):
    keyword: str = "this"


@dataclass
class FieldAccess(Expr):
    target: Expr
    name: str


@dataclass
class ArrayAccess(Expr):
    array: Expr
    index: Expr


@dataclass
class MethodCall(Expr):
    receiver: Optional[Expr]
    receiver_text: str
    name: str
    args: list[Expr] = field(default_factory=list)


@dataclass
class ObjectCreation(Expr):
    class_name: str
    args: list[Expr] = field(default_factory=list)
    body: Optional["TypeDecl"] = None
    outer: Optional[Expr] = None


@dataclass
class ArrayCreation(Expr):
    type_text: str
    dims: list[Expr] = field(default_factory=list)
    init: Optional["ArrayInit"] = None


@dataclass
class ArrayInit(Expr):
    elements: list[Expr] = field(default_factory=list)


@dataclass
class BinaryOp(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass
class UnaryOp(Expr):
    op: str
    operand: Expr
    postfix: bool = False


@dataclass
class VarWrite(Expr):
    """The simple-name target of a plain ``=``: a write, never a read."""

    name: str


@dataclass
class Assignment(Expr):
    """``target op value``.  Compound operators read their target, so only a
    plain ``=`` to a simple name produces a :class:`VarWrite`."""

    op: str
    target: Expr
    value: Expr

    @property
    def target_name(self) -> Optional[str]:
        return self.target.name if isinstance(self.target, (Name, VarWrite)) else None


@dataclass
class Conditional(Expr):
    condition: Expr
    if_true: Expr
    if_false: Expr


@dataclass
class Cast(Expr):
    type_text: str
    expr: Expr


@dataclass
class InstanceOf(Expr):
    expr: Expr
    type_text: str
    binding: Optional[str] = None


@dataclass
class Lambda(Expr):
    params: list[str]
    body: Union[Expr, "Block"]


@dataclass
class MethodRef(Expr):
    target: Optional[Expr]
    target_text: str
    name: str


@dataclass
class ClassLit(Expr):
    type_text: str


@dataclass
class SwitchExpr(Expr):
    selector: Expr
    cases: list["SwitchCase"] = field(default_factory=list)


# -- statements --------------------------------------------------------------


@dataclass
class Stmt(Node):
    pass


@dataclass
class Block(Stmt):
    stmts: list[Stmt] = field(default_factory=list)


@dataclass
class LocalVarDecl(Stmt):
    name: str
    type_text: str
    is_final: bool = False
    initializer: Optional[Expr] = None
    name_line: int = 0


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class If(Stmt):
    condition: Expr
    then: Stmt
    orelse: Optional[Stmt] = None


@dataclass
class Loop(Stmt):
    """for, enhanced for, while and do-while.

    ``init`` holds for-header declarations or expression statements; an
    enhanced for stores its variable as a single ``LocalVarDecl`` in ``init``
    and the iterable in ``condition``.
    """

    kind: str
    init: list[Stmt] = field(default_factory=list)
    condition: Optional[Expr] = None
    update: list[Expr] = field(default_factory=list)
    body: Optional[Stmt] = None


@dataclass
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass
class SwitchCase(Node):
    labels: list[Expr] = field(default_factory=list)
    body: list[Stmt] = field(default_factory=list)
    arrow: bool = False


@dataclass
class Switch(Stmt):
    selector: Expr
    cases: list[SwitchCase] = field(default_factory=list)


@dataclass
class CatchClause(Node):
    name: str
    types: str
    body: Block


@dataclass
class Try(Stmt):
    resources: list[Node] = field(default_factory=list)
    body: Block = None  # type: ignore[assignment]
    catches: list[CatchClause] = field(default_factory=list)
    final: Optional[Block] = None


@dataclass
class Jump(Stmt):
    """break, continue, throw, yield and assert."""

    keyword: str
    value: Optional[Expr] = None
    extra: Optional[Expr] = None


@dataclass
class Labeled(Stmt):
    label: str
    body: Stmt


@dataclass
class Synchronized(Stmt):
    lock: Expr
    body: Block


@dataclass
class LocalClass(Stmt):
    decl: "TypeDecl"


@dataclass
class Empty(Stmt):
    pass


# -- declarations ------------------------------------------------------------

STATIC_FIELD = "static-field"
INSTANCE_FIELD = "instance-field"
STATIC_INITIALIZER = "static-initializer"
INSTANCE_INITIALIZER = "instance-initializer"
CONSTRUCTOR = "constructor"
METHOD = "method"
NESTED_TYPE = "nested-type"


@dataclass
class Param(Node):
    name: str
    type_text: str
    is_final: bool = False


@dataclass
class Member(Node):
    """One member of a type body.

    ``line`` is the line of the first modifier or type token; leading
    annotations are not counted.
    """

    kind: str
    name: str = ""
    is_final: bool = False
    is_static: bool = False
    initializer: Optional[Expr] = None
    params: list[Param] = field(default_factory=list)
    body: Optional[Block] = None
    nested: Optional["TypeDecl"] = None


@dataclass
class EnumConstant(Node):
    name: str
    args: list[Expr] = field(default_factory=list)
    body: Optional["TypeDecl"] = None


@dataclass
class TypeDecl(Node):
    name: str
    kind: str
    members: list[Member] = field(default_factory=list)
    enum_constants: list[EnumConstant] = field(default_factory=list)


@dataclass(frozen=True)
class ParseError:
    """A skipped region: ``line`` is where parsing failed, the span is what was dropped."""

    line: int
    message: str
    start_line: int = 0
    end_line: int = 0

    def covers(self, line: int) -> bool:
        lo = min(self.start_line or self.line, self.line)
        hi = max(self.end_line, self.line)
        return lo <= line <= hi


@dataclass
class SyntaxModel:
    file_path: str
    type_decls: list[TypeDecl] = field(default_factory=list)
    parse_errors: list[ParseError] = field(default_factory=list)
    lines: list[str] = field(default_factory=list, repr=False)

    def line_text(self, line: int) -> str:
        if 1 <= line <= len(self.lines):
            return self.lines[line - 1].strip()
        return ""

    def in_error_span(self, line: int) -> bool:
        return any(err.covers(line) for err in self.parse_errors)

    def all_type_decls(self) -> Iterator[TypeDecl]:
        """Every type declaration, nested, local and anonymous ones included."""
        for decl in self.type_decls:
            for node in decl.walk():
                if isinstance(node, TypeDecl):
                    yield node
