"""Best-effort recursive descent parser for a pragmatic subset of Java.

The parser builds just enough structure for the rule checkers: type
declarations with their members in source order, statements, and expressions
with identifier reads kept apart from assignment targets.  Generics and
annotations are skipped by bracket balancing.

Errors never escape :func:`parse`.  A construct that fails to parse is
recorded in ``SyntaxModel.parse_errors`` and skipped up to the next ``;`` or
the ``}`` that balances it, so one broken statement does not hide the rest of
the file.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Iterator, Optional

from . import nodes as n
from .lexer import (
    CHAR,
    COMMENT,
    IDENTIFIER,
    KEYWORD,
    NUMBER,
    OPERATOR,
    PRIMITIVES,
    STRING,
    Token,
    split_lines,
    tokenize,
)

MAX_DEPTH = 100

MODIFIERS = frozenset(
    """public protected private static final abstract native synchronized
    transient volatile strictfp default""".split()
)

BINARY_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "<": 7,
    ">": 7,
    "<=": 7,
    ">=": 7,
    "instanceof": 7,
    "<<": 8,
    ">>": 8,
    ">>>": 8,
    "+": 9,
    "-": 9,
    "*": 10,
    "/": 10,
    "%": 10,
}

ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>= >>>=".split())
PREFIX_OPS = frozenset("+ - ++ -- ! ~".split())
DECL_FOLLOWERS = frozenset("= ; , [".split())
_EOF = "eof"


class ParseFailure(Exception):
    def __init__(self, message: str, token: Token, index: int):
        super().__init__(message)
        self.message = message
        self.token = token
        self.index = index


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = [t for t in tokens if t.kind != COMMENT]
        last = self.toks[-1] if self.toks else None
        eof_line = last.line if last else 1
        eof_offset = last.offset + len(last.text) if last else 0
        self.toks.append(Token(_EOF, "", eof_line, 1, eof_offset))
        self.pos = 0
        self.depth = 0
        self.errors: list[n.ParseError] = []
        self.paren_match = self._match_parens()

    def _match_parens(self) -> dict[int, int]:
        match: dict[int, int] = {}
        stack: list[int] = []
        for i, tok in enumerate(self.toks):
            if tok.is_("("):
                stack.append(i)
            elif tok.is_(")") and stack:
                match[stack.pop()] = i
        return match

    # -- token helpers -------------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        i = min(self.pos + k, len(self.toks) - 1)
        return self.toks[i]

    def at(self, text: str, k: int = 0) -> bool:
        return self.peek(k).is_(text)

    def at_eof(self) -> bool:
        return self.peek().kind == _EOF

    def at_ident(self, k: int = 0) -> bool:
        return self.peek(k).kind == IDENTIFIER

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind != _EOF:
            self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected '{text}'")
        return self.advance()

    def expect_ident(self) -> Token:
        if not self.at_ident():
            self.fail("expected an identifier")
        return self.advance()

    def fail(self, message: str) -> None:
        tok = self.peek()
        found = tok.text if tok.kind != _EOF else "end of file"
        raise ParseFailure(f"{message}, found '{found}'", tok, min(self.pos, len(self.toks) - 1))

    def text_from(self, start: int) -> str:
        return "".join(t.text for t in self.toks[start:self.pos])

    @contextmanager
    def nested(self) -> Iterator[None]:
        self.depth += 1
        try:
            if self.depth > MAX_DEPTH:
                self.fail("nesting too deep")
            yield
        finally:
            self.depth -= 1

    # -- error recovery ------------------------------------------------------

    def recover(self, start: int, err: ParseFailure) -> None:
        """Skip past the construct that began at token ``start``."""
        err_index = max(err.index, start)
        braces = 0
        for tok in self.toks[start:err_index]:
            if tok.is_("{"):
                braces += 1
            elif tok.is_("}"):
                braces = max(0, braces - 1)
        self.pos = err_index
        while not self.at_eof():
            tok = self.peek()
            if tok.is_("{"):
                braces += 1
            elif tok.is_("}"):
                if braces == 0:
                    break
                braces -= 1
                if braces == 0:
                    self.advance()
                    break
            elif tok.is_(";") and braces == 0:
                self.advance()
                break
            self.advance()
        if self.pos == start and not self.at_eof():
            self.advance()
        last = self.toks[max(start, self.pos - 1)]
        self.errors.append(
            n.ParseError(
                line=err.token.line,
                message=err.message,
                start_line=self.toks[start].line,
                end_line=max(last.line, err.token.line),
            )
        )

    def record_eof(self, what: str) -> None:
        tok = self.peek()
        self.errors.append(n.ParseError(tok.line, f"unexpected end of file in {what}", tok.line, tok.line))

    # -- skipping ------------------------------------------------------------

    def skip_annotation(self) -> None:
        self.expect("@")
        self.expect_ident()
        while self.at(".") and self.at_ident(1):
            self.pos += 2
        if self.at("("):
            self.skip_parens()

    def skip_parens(self) -> None:
        close = self.paren_match.get(self.pos)
        if close is None:
            self.fail("unbalanced '('")
        self.pos = close + 1

    def skip_generics(self) -> None:
        """Skip a ``<...>`` type-argument list, splitting ``>>`` and ``>>>``."""
        self.expect("<")
        depth = 1
        while depth > 0:
            tok = self.peek()
            text = tok.text
            if tok.kind == _EOF:
                self.fail("unterminated type arguments")
            if text == "<":
                depth += 1
            elif text in (">", ">>", ">>>") and tok.kind == OPERATOR:
                depth -= len(text)
                if depth < 0:
                    self.fail("unbalanced '>'")
            elif text == "@":
                self.skip_annotation()
                continue
            elif not (
                tok.kind == IDENTIFIER
                or text in PRIMITIVES
                or text in ("?", "extends", "super", ",", ".", "&", "[", "]")
            ):
                self.fail("unexpected token in type arguments")
            self.advance()

    def parse_modifiers(self) -> tuple[set[str], int]:
        mods: set[str] = set()
        first_line = 0
        while True:
            tok = self.peek()
            if tok.is_("@") and not self.at("interface", 1):
                self.skip_annotation()
                continue
            if tok.kind == KEYWORD and tok.text in MODIFIERS:
                # `default:` / `default ->` belong to switch, not to modifiers
                if tok.text == "default" and (self.at(":", 1) or self.at("->", 1)):
                    break
                mods.add(tok.text)
            elif tok.kind == IDENTIFIER and tok.text == "sealed" and self.peek(1).kind in (KEYWORD, IDENTIFIER):
                mods.add("sealed")
            elif tok.kind == IDENTIFIER and tok.text == "non" and self.at("-", 1) and self.peek(2).text == "sealed":
                first_line = first_line or tok.line
                self.pos += 3
                mods.add("non-sealed")
                continue
            else:
                break
            first_line = first_line or tok.line
            self.advance()
        return mods, first_line or self.peek().line

    # -- types ---------------------------------------------------------------

    def parse_type(self) -> str:
        start = self.pos
        while self.at("@"):
            self.skip_annotation()
        tok = self.peek()
        if tok.kind == KEYWORD and (tok.text in PRIMITIVES or tok.text == "void"):
            self.advance()
        elif tok.kind == IDENTIFIER:
            self.advance()
            if self.at("<"):
                self.skip_generics()
            while self.at(".") and (self.at_ident(1) or self.at("@", 1)):
                self.advance()
                while self.at("@"):
                    self.skip_annotation()
                self.expect_ident()
                if self.at("<"):
                    self.skip_generics()
        else:
            self.fail("expected a type")
        while self.at("[") and self.at("]", 1):
            self.pos += 2
        return self.text_from(start)

    def try_type(self) -> Optional[str]:
        saved = self.pos
        try:
            return self.parse_type()
        except ParseFailure:
            self.pos = saved
            return None

    def is_type_decl_start(self) -> bool:
        if self.at("class") or self.at("interface") or self.at("enum"):
            return True
        if self.at("@") and self.at("interface", 1):
            return True
        tok = self.peek()
        return (
            tok.kind == IDENTIFIER
            and tok.text == "record"
            and self.at_ident(1)
            and (self.at("(", 2) or self.at("<", 2))
        )

    # -- declarations --------------------------------------------------------

    def parse_compilation_unit(self) -> list[n.TypeDecl]:
        decls: list[n.TypeDecl] = []
        while not self.at_eof():
            start = self.pos
            try:
                if self.at("package") or self.at("import"):
                    while not self.at(";"):
                        if self.at_eof() or self.at("{") or self.at("}"):
                            self.fail("expected ';'")
                        self.advance()
                    self.advance()
                    continue
                if self.accept(";"):
                    continue
                mods, line = self.parse_modifiers()
                if not self.is_type_decl_start():
                    self.fail("expected a class, interface or enum declaration")
                decls.append(self.parse_type_decl(mods, line))
            except ParseFailure as err:
                self.recover(start, err)
        return decls

    def parse_type_decl(self, mods: set[str], line: int) -> n.TypeDecl:
        tok = self.advance()
        if tok.text == "@":
            self.advance()
            kind = "interface"
        elif tok.text == "record":
            kind = "class"
        else:
            kind = tok.text
        name = self.expect_ident().text
        decl = n.TypeDecl(line=line, name=name, kind=kind)
        is_record = tok.text == "record"
        while not self.at("{"):
            if self.at("("):
                self.skip_parens()
            elif self.at("<"):
                self.skip_generics()
            elif self.at_eof() or self.at(";") or self.at("}") or self.at("="):
                self.fail("expected '{'")
            else:
                self.advance()
        self.parse_class_body(decl, is_record=is_record)
        return decl

    def parse_class_body(self, decl: n.TypeDecl, is_record: bool = False) -> None:
        with self.nested():
            self.expect("{")
            if decl.kind == "enum":
                self.parse_enum_constants(decl)
            while not self.at("}"):
                if self.at_eof():
                    self.record_eof(f"body of {decl.name}")
                    return
                start = self.pos
                try:
                    self.parse_member(decl, is_record)
                except ParseFailure as err:
                    self.recover(start, err)
            self.advance()

    def parse_enum_constants(self, decl: n.TypeDecl) -> None:
        while True:
            if self.accept(";") or self.at("}") or self.at_eof():
                return
            while self.at("@"):
                self.skip_annotation()
            tok = self.expect_ident()
            const = n.EnumConstant(line=tok.line, name=tok.text)
            if self.at("("):
                const.args = self.parse_args()
            if self.at("{"):
                const.body = n.TypeDecl(line=tok.line, name=tok.text, kind="class")
                self.parse_class_body(const.body)
            decl.enum_constants.append(const)
            if self.accept(","):
                continue
            if self.accept(";") or self.at("}"):
                return
            self.fail("expected ',' or ';' after enum constant")

    def parse_member(self, decl: n.TypeDecl, is_record: bool) -> None:
        if self.accept(";"):
            return
        if self.at("{"):
            line = self.peek().line
            decl.members.append(n.Member(line=line, kind=n.INSTANCE_INITIALIZER, body=self.parse_block()))
            return
        if self.at("static") and self.at("{", 1):
            line = self.advance().line
            decl.members.append(
                n.Member(line=line, kind=n.STATIC_INITIALIZER, is_static=True, body=self.parse_block())
            )
            return

        mods, line = self.parse_modifiers()
        is_static = "static" in mods
        is_final = "final" in mods
        if self.is_type_decl_start():
            nested = self.parse_type_decl(mods, line)
            decl.members.append(
                n.Member(line=line, kind=n.NESTED_TYPE, name=nested.name, is_static=is_static, nested=nested)
            )
            return
        if self.at("<"):
            self.skip_generics()

        if self.at_ident() and (self.at("(", 1) or (is_record and self.at("{", 1))):
            name = self.advance().text
            params = self.parse_params() if self.at("(") else []
            self.skip_throws()
            body = self.parse_block()
            decl.members.append(n.Member(line=line, kind=n.CONSTRUCTOR, name=name, params=params, body=body))
            return

        self.parse_type()
        name = self.expect_ident().text
        if self.at("("):
            params = self.parse_params()
            while self.at("[") and self.at("]", 1):
                self.pos += 2
            self.skip_throws()
            body = None
            if self.at("{"):
                body = self.parse_block()
            else:
                if self.accept("default"):
                    self.parse_element_value()
                self.expect(";")
            decl.members.append(
                n.Member(line=line, kind=n.METHOD, name=name, is_static=is_static, is_final=is_final, params=params, body=body)
            )
            return

        if decl.kind == "interface":
            is_static = is_final = True
        kind = n.STATIC_FIELD if is_static else n.INSTANCE_FIELD
        while True:
            while self.at("[") and self.at("]", 1):
                self.pos += 2
            init = self.parse_var_init() if self.accept("=") else None
            decl.members.append(
                n.Member(line=line, kind=kind, name=name, is_static=is_static, is_final=is_final, initializer=init)
            )
            if self.accept(","):
                name = self.expect_ident().text
                continue
            self.expect(";")
            return

    def parse_element_value(self) -> None:
        """Skip an annotation element default, e.g. ``default {1, 2}``."""
        braces = 0
        while braces or not self.at(";"):
            if self.at_eof() or (self.at("}") and braces == 0):
                self.fail("expected ';'")
            if self.at("{"):
                braces += 1
            elif self.at("}"):
                braces -= 1
            self.advance()

    def skip_throws(self) -> None:
        if self.accept("throws"):
            self.parse_type()
            while self.accept(","):
                self.parse_type()

    def parse_params(self) -> list[n.Param]:
        self.expect("(")
        params: list[n.Param] = []
        while not self.at(")"):
            mods, _ = self.parse_modifiers()
            self.parse_type()
            self.accept("...")
            tok = self.peek()
            if tok.is_("this"):
                self.advance()
            else:
                tok = self.expect_ident()
                params.append(n.Param(line=tok.line, name=tok.text, type_text="", is_final="final" in mods))
            while self.at("[") and self.at("]", 1):
                self.pos += 2
            if not self.accept(","):
                break
        self.expect(")")
        return params

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> n.Block:
        open_tok = self.expect("{")
        block = n.Block(line=open_tok.line)
        with self.nested():
            while not self.at("}"):
                if self.at_eof():
                    self.record_eof("block")
                    return block
                block.stmts.extend(self.parse_block_statement_safe())
            self.advance()
        return block

    def parse_block_statement_safe(self) -> list[n.Stmt]:
        start = self.pos
        try:
            return self.parse_block_statement()
        except ParseFailure as err:
            self.recover(start, err)
            return []

    def parse_block_statement(self) -> list[n.Stmt]:
        """A statement as it may appear directly in a block."""
        start = self.pos
        tok = self.peek()
        if tok.kind == IDENTIFIER and self.at(":", 1):
            self.pos += 2
            return [n.Labeled(line=tok.line, label=tok.text, body=self.parse_statement())]
        if self.starts_local_decl_or_class():
            mods, line = self.parse_modifiers()
            if self.is_type_decl_start():
                return [n.LocalClass(line=line, decl=self.parse_type_decl(mods, line))]
            decls = self.parse_local_declarators(mods, line)
            self.expect(";")
            return decls
        self.pos = start
        return [self.parse_statement()]

    def starts_local_decl_or_class(self) -> bool:
        """Decide, without consuming, whether a declaration starts here."""
        saved = self.pos
        try:
            mods, _ = self.parse_modifiers()
            if self.is_type_decl_start():
                return True
            ty = self.try_type()
            if ty is None:
                return False
            if ty == "void":
                return False
            return self.at_ident() and self.peek(1).text in DECL_FOLLOWERS
        except ParseFailure:
            return False
        finally:
            self.pos = saved

    def parse_local_declarators(self, mods: set[str], line: int) -> list[n.Stmt]:
        type_text = self.parse_type()
        out: list[n.Stmt] = []
        while True:
            name_tok = self.expect_ident()
            while self.at("[") and self.at("]", 1):
                self.pos += 2
            init = self.parse_var_init() if self.accept("=") else None
            out.append(
                n.LocalVarDecl(
                    line=line,
                    name=name_tok.text,
                    type_text=type_text,
                    is_final="final" in mods,
                    initializer=init,
                    name_line=name_tok.line,
                )
            )
            if not self.accept(","):
                return out

    def parse_var_init(self) -> n.Expr:
        if self.at("{"):
            return self.parse_array_init()
        return self.parse_expr()

    def parse_array_init(self) -> n.ArrayInit:
        tok = self.expect("{")
        init = n.ArrayInit(line=tok.line)
        with self.nested():
            while not self.at("}"):
                init.elements.append(self.parse_var_init())
                if not self.accept(","):
                    break
            self.expect("}")
        return init

    def parse_statement(self) -> n.Stmt:
        with self.nested():
            return self._parse_statement()

    def _parse_statement(self) -> n.Stmt:
        tok = self.peek()
        line = tok.line
        text = tok.text if tok.kind == KEYWORD else None
        if tok.kind == IDENTIFIER:
            if tok.text == "yield" and self._is_yield_statement():
                self.advance()
                value = self.parse_expr()
                self.expect(";")
                return n.Jump(line=line, keyword="yield", value=value)
            stmts = self.parse_block_statement() if self.starts_local_decl_or_class() or self.at(":", 1) else None
            if stmts is not None:
                return stmts[0] if len(stmts) == 1 else n.Block(line=line, stmts=stmts)
        if tok.is_("{"):
            return self.parse_block()
        if tok.is_(";"):
            self.advance()
            return n.Empty(line=line)
        if text == "if":
            self.advance()
            cond = self.parse_paren_expr()
            then = self.parse_statement()
            orelse = self.parse_statement() if self.accept("else") else None
            return n.If(line=line, condition=cond, then=then, orelse=orelse)
        if text == "while":
            self.advance()
            cond = self.parse_paren_expr()
            return n.Loop(line=line, kind="while", condition=cond, body=self.parse_statement())
        if text == "do":
            self.advance()
            body = self.parse_statement()
            self.expect("while")
            cond = self.parse_paren_expr()
            self.expect(";")
            return n.Loop(line=line, kind="do", condition=cond, body=body)
        if text == "for":
            return self.parse_for()
        if text == "try":
            return self.parse_try()
        if text == "switch":
            self.advance()
            selector = self.parse_paren_expr()
            return n.Switch(line=line, selector=selector, cases=self.parse_switch_body())
        if text == "return":
            self.advance()
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return n.Return(line=line, value=value)
        if text in ("break", "continue"):
            self.advance()
            if self.at_ident():
                self.advance()
            self.expect(";")
            return n.Jump(line=line, keyword=text)
        if text == "throw":
            self.advance()
            value = self.parse_expr()
            self.expect(";")
            return n.Jump(line=line, keyword="throw", value=value)
        if text == "assert":
            self.advance()
            value = self.parse_expr()
            extra = self.parse_expr() if self.accept(":") else None
            self.expect(";")
            return n.Jump(line=line, keyword="assert", value=value, extra=extra)
        if text == "synchronized" and self.at("(", 1):
            self.advance()
            lock = self.parse_paren_expr()
            return n.Synchronized(line=line, lock=lock, body=self.parse_block())
        if text in MODIFIERS or text in ("class", "interface", "enum") or tok.is_("@"):
            mods, decl_line = self.parse_modifiers()
            if self.is_type_decl_start():
                return n.LocalClass(line=decl_line, decl=self.parse_type_decl(mods, decl_line))
            decls = self.parse_local_declarators(mods, decl_line)
            self.expect(";")
            return decls[0] if len(decls) == 1 else n.Block(line=line, stmts=decls)
        expr = self.parse_expr()
        self.expect(";")
        return n.ExprStmt(line=line, expr=expr)

    def _is_yield_statement(self) -> bool:
        nxt = self.peek(1)
        if nxt.text in ASSIGN_OPS or nxt.text in (".", "[", "++", "--", ";", ":", "(", "->"):
            return False
        return True

    def parse_paren_expr(self) -> n.Expr:
        self.expect("(")
        expr = self.parse_expr()
        self.expect(")")
        return expr

    def parse_for(self) -> n.Loop:
        line = self.expect("for").line
        self.expect("(")
        saved = self.pos
        mods, decl_line = self.parse_modifiers()
        ty = self.try_type()
        if ty is not None and self.at_ident() and self.at(":", 1):
            name_tok = self.advance()
            self.advance()
            var = n.LocalVarDecl(
                line=decl_line, name=name_tok.text, type_text=ty, is_final="final" in mods, name_line=name_tok.line
            )
            iterable = self.parse_expr()
            self.expect(")")
            return n.Loop(line=line, kind="foreach", init=[var], condition=iterable, body=self.parse_statement())
        self.pos = saved

        init: list[n.Stmt] = []
        if not self.at(";"):
            if self.starts_local_decl_or_class():
                mods, decl_line = self.parse_modifiers()
                init.extend(self.parse_local_declarators(mods, decl_line))
            else:
                init.append(n.ExprStmt(line=self.peek().line, expr=self.parse_expr()))
                while self.accept(","):
                    init.append(n.ExprStmt(line=self.peek().line, expr=self.parse_expr()))
        self.expect(";")
        cond = None if self.at(";") else self.parse_expr()
        self.expect(";")
        update: list[n.Expr] = []
        if not self.at(")"):
            update.append(self.parse_expr())
            while self.accept(","):
                update.append(self.parse_expr())
        self.expect(")")
        return n.Loop(line=line, kind="for", init=init, condition=cond, update=update, body=self.parse_statement())

    def parse_try(self) -> n.Try:
        line = self.expect("try").line
        node = n.Try(line=line)
        if self.accept("("):
            while not self.at(")"):
                if self.starts_local_decl_or_class():
                    mods, decl_line = self.parse_modifiers()
                    node.resources.extend(self.parse_local_declarators(mods, decl_line))
                else:
                    node.resources.append(self.parse_expr())
                if not self.accept(";"):
                    break
            self.expect(")")
        node.body = self.parse_block()
        while self.at("catch"):
            catch_line = self.advance().line
            self.expect("(")
            self.parse_modifiers()
            types = [self.parse_type()]
            while self.accept("|"):
                types.append(self.parse_type())
            name = self.expect_ident().text
            self.expect(")")
            node.catches.append(n.CatchClause(line=catch_line, name=name, types="|".join(types), body=self.parse_block()))
        if self.accept("finally"):
            node.final = self.parse_block()
        if not node.catches and node.final is None and not node.resources:
            self.fail("expected 'catch' or 'finally'")
        return node

    def parse_switch_body(self) -> list[n.SwitchCase]:
        self.expect("{")
        cases: list[n.SwitchCase] = []
        with self.nested():
            while not self.at("}"):
                tok = self.peek()
                if self.at_eof():
                    self.record_eof("switch")
                    return cases
                case = n.SwitchCase(line=tok.line)
                if self.accept("case"):
                    case.labels = self.parse_case_labels()
                elif not self.accept("default"):
                    self.fail("expected 'case' or 'default'")
                if self.accept("->"):
                    case.arrow = True
                    if self.at("{"):
                        case.body = [self.parse_block()]
                    elif self.at("throw"):
                        case.body = [self.parse_statement()]
                    else:
                        expr_line = self.peek().line
                        expr = self.parse_expr()
                        self.expect(";")
                        case.body = [n.ExprStmt(line=expr_line, expr=expr)]
                else:
                    self.expect(":")
                    while not (self.at("case") or self.at("default") and self._default_is_label() or self.at("}")):
                        if self.at_eof():
                            break
                        case.body.extend(self.parse_block_statement_safe())
                cases.append(case)
            self.expect("}")
        return cases

    def _default_is_label(self) -> bool:
        return self.at(":", 1) or self.at("->", 1)

    def parse_case_labels(self) -> list[n.Expr]:
        labels: list[n.Expr] = []
        while True:
            if self.accept("default"):
                pass
            elif self._at_type_pattern():
                self.parse_modifiers()
                self.parse_type()
                if self.at("("):
                    self.skip_parens()
                if self.at_ident():
                    self.advance()
            else:
                labels.append(self.parse_expr(allow_lambda=False))
            if self.at_ident() and self.peek().text == "when":
                self.advance()
                labels.append(self.parse_expr(allow_lambda=False))
            if not self.accept(","):
                return labels

    def _at_type_pattern(self) -> bool:
        saved = self.pos
        try:
            self.parse_modifiers()
            if self.try_type() is None:
                return False
            if self.at("("):
                return True
            return self.at_ident() and self.peek(1).text in ("->", ":", ",", "when", "&&")
        finally:
            self.pos = saved

    # -- expressions ---------------------------------------------------------

    def parse_expr(self, allow_lambda: bool = True) -> n.Expr:
        with self.nested():
            if allow_lambda and self.at_lambda():
                return self.parse_lambda()
            start_line = self.peek().line
            lhs = self.parse_ternary()
            tok = self.peek()
            if tok.kind == OPERATOR and tok.text in ASSIGN_OPS:
                self.advance()
                value = self.parse_expr()
                if tok.text == "=" and isinstance(lhs, n.Name):
                    lhs = n.VarWrite(line=lhs.line, name=lhs.name)
                return n.Assignment(line=start_line, op=tok.text, target=lhs, value=value)
            return lhs

    def at_lambda(self) -> bool:
        if self.at_ident() and self.at("->", 1):
            return True
        if self.at("("):
            close = self.paren_match.get(self.pos)
            return close is not None and self.toks[close + 1].is_("->")
        return False

    def parse_lambda(self) -> n.Lambda:
        line = self.peek().line
        params: list[str] = []
        if self.at_ident():
            params.append(self.advance().text)
        else:
            close = self.paren_match[self.pos]
            last_ident = None
            depth = 0
            for tok in self.toks[self.pos + 1 : close]:
                if tok.text in ("<", "("):
                    depth += 1
                elif tok.text in (">", ")"):
                    depth -= 1
                elif tok.text == "," and depth == 0:
                    if last_ident:
                        params.append(last_ident)
                    last_ident = None
                elif tok.kind == IDENTIFIER:
                    last_ident = tok.text
            if last_ident:
                params.append(last_ident)
            self.pos = close + 1
        self.expect("->")
        body: n.Node = self.parse_block() if self.at("{") else self.parse_expr()
        return n.Lambda(line=line, params=params, body=body)  # type: ignore[arg-type]

    def parse_ternary(self) -> n.Expr:
        cond = self.parse_binary(1)
        if self.accept("?"):
            if_true = self.parse_expr()
            self.expect(":")
            if_false = self.parse_expr()
            return n.Conditional(line=cond.line, condition=cond, if_true=if_true, if_false=if_false)
        return cond

    def parse_binary(self, min_prec: int) -> n.Expr:
        lhs = self.parse_unary()
        while True:
            tok = self.peek()
            if tok.kind not in (OPERATOR, KEYWORD):
                return lhs
            prec = BINARY_PRECEDENCE.get(tok.text)
            if prec is None or prec < min_prec:
                return lhs
            self.advance()
            if tok.text == "instanceof":
                self.accept("final")
                type_text = self.parse_type()
                binding = None
                if self.at("("):
                    self.skip_parens()
                if self.at_ident():
                    binding = self.advance().text
                lhs = n.InstanceOf(line=lhs.line, expr=lhs, type_text=type_text, binding=binding)
                continue
            with self.nested():
                rhs = self.parse_binary(prec + 1)
            lhs = n.BinaryOp(line=lhs.line, op=tok.text, lhs=lhs, rhs=rhs)

    def parse_unary(self) -> n.Expr:
        with self.nested():
            tok = self.peek()
            if tok.kind == OPERATOR and tok.text in PREFIX_OPS:
                self.advance()
                return n.UnaryOp(line=tok.line, op=tok.text, operand=self.parse_unary())
            if tok.is_("("):
                cast = self.try_cast()
                if cast is not None:
                    return cast
            return self.parse_postfix(self.pos, self.parse_primary())

    def try_cast(self) -> Optional[n.Expr]:
        saved = self.pos
        line = self.advance().line
        ty = self.try_type()
        while ty is not None and self.accept("&"):
            ty = self.try_type()
        if ty is None or not self.accept(")"):
            self.pos = saved
            return None
        primitive = ty.split("[")[0] in PRIMITIVES
        nxt = self.peek()
        if primitive and not (nxt.kind == OPERATOR and nxt.text not in PREFIX_OPS) and not nxt.is_(")"):
            return n.Cast(line=line, type_text=ty, expr=self.parse_unary())
        if nxt.kind in (IDENTIFIER, NUMBER, STRING, CHAR):
            starts_operand = True
        elif nxt.kind == KEYWORD:
            starts_operand = nxt.text in ("this", "super", "new", "true", "false", "null", "switch") or nxt.text in PRIMITIVES
        else:
            starts_operand = nxt.text in ("(", "!", "~")
        if not starts_operand:
            self.pos = saved
            return None
        if self.at_lambda():
            return n.Cast(line=line, type_text=ty, expr=self.parse_lambda())
        return n.Cast(line=line, type_text=ty, expr=self.parse_unary())

    def parse_args(self) -> list[n.Expr]:
        self.expect("(")
        args: list[n.Expr] = []
        while not self.at(")"):
            args.append(self.parse_expr())
            if not self.accept(","):
                break
        self.expect(")")
        return args

    def parse_primary(self) -> n.Expr:
        tok = self.peek()
        line = tok.line
        if tok.kind == NUMBER:
            self.advance()
            return n.NumberLit(line=line, text=tok.text)
        if tok.kind in (STRING, CHAR):
            self.advance()
            return n.Literal(line=line, text=tok.text)
        if tok.kind == KEYWORD:
            text = tok.text
            if text in ("true", "false", "null"):
                self.advance()
                return n.Literal(line=line, text=text)
            if text in ("this", "super"):
                self.advance()
                if self.at("("):
                    return n.MethodCall(line=line, receiver=None, receiver_text="", name=text, args=self.parse_args())
                return n.This(line=line, keyword=text)
            if text == "new":
                return self.parse_creation()
            if text == "switch":
                self.advance()
                selector = self.parse_paren_expr()
                return n.SwitchExpr(line=line, selector=selector, cases=self.parse_switch_body())
            if text in PRIMITIVES or text == "void":
                ty = self.parse_type()
                return self._type_suffix(line, ty)
        if tok.kind == IDENTIFIER:
            self.advance()
            if self.at("("):
                return n.MethodCall(line=line, receiver=None, receiver_text="", name=tok.text, args=self.parse_args())
            if self.at("[") and self.at("]", 1):
                self.pos -= 1
                return self._type_suffix(line, self.parse_type())
            if self.at("<") and self._generic_method_ref_ahead():
                self.pos -= 1
                return self._type_suffix(line, self.parse_type())
            return n.Name(line=line, name=tok.text)
        if tok.is_("("):
            self.advance()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        self.fail("unexpected token")
        raise AssertionError  # unreachable

    def _generic_method_ref_ahead(self) -> bool:
        saved = self.pos
        try:
            self.skip_generics()
            return self.at("::")
        except ParseFailure:
            return False
        finally:
            self.pos = saved

    def _type_suffix(self, line: int, ty: str) -> n.Expr:
        if self.accept("::"):
            name = self.advance()
            return n.MethodRef(line=line, target=None, target_text=ty, name=name.text)
        self.expect(".")
        self.expect("class")
        return n.ClassLit(line=line, type_text=ty)

    def parse_postfix(self, start: int, expr: n.Expr) -> n.Expr:
        while True:
            tok = self.peek()
            if tok.is_("."):
                receiver_text = self.text_from(start)
                self.advance()
                if self.at("<"):
                    self.skip_generics()
                if self.at("new"):
                    expr = self.parse_creation(outer=expr)
                    continue
                name = self.advance()
                if name.kind not in (IDENTIFIER, KEYWORD):
                    self.pos -= 1
                    self.fail("expected a member name")
                if name.text == "class":
                    expr = n.ClassLit(line=expr.line, type_text=receiver_text)
                elif self.at("("):
                    expr = n.MethodCall(
                        line=expr.line, receiver=expr, receiver_text=receiver_text, name=name.text, args=self.parse_args()
                    )
                else:
                    expr = n.FieldAccess(line=expr.line, target=expr, name=name.text)
            elif tok.is_("["):
                self.advance()
                index = self.parse_expr()
                self.expect("]")
                expr = n.ArrayAccess(line=expr.line, array=expr, index=index)
            elif tok.kind == OPERATOR and tok.text in ("++", "--"):
                self.advance()
                expr = n.UnaryOp(line=expr.line, op=tok.text, operand=expr, postfix=True)
            elif tok.is_("::"):
                target_text = self.text_from(start)
                self.advance()
                name = self.advance()
                expr = n.MethodRef(line=expr.line, target=expr, target_text=target_text, name=name.text)
            else:
                return expr

    def parse_creation(self, outer: Optional[n.Expr] = None) -> n.Expr:
        line = self.expect("new").line
        while self.at("@"):
            self.skip_annotation()
        if self.at("<"):
            self.skip_generics()
        tok = self.peek()
        parts: list[str] = []
        if tok.kind == KEYWORD and tok.text in PRIMITIVES:
            parts.append(self.advance().text)
        else:
            parts.append(self.expect_ident().text)
            if self.at("<"):
                self.skip_generics()
            while self.at(".") and self.at_ident(1):
                self.advance()
                parts.append(self.advance().text)
                if self.at("<"):
                    self.skip_generics()
        class_name = ".".join(parts)
        if self.at("["):
            node = n.ArrayCreation(line=line, type_text=class_name)
            while self.at("["):
                self.advance()
                if not self.at("]"):
                    node.dims.append(self.parse_expr())
                self.expect("]")
            if self.at("{"):
                node.init = self.parse_array_init()
            return node
        args = self.parse_args()
        body = None
        if self.at("{"):
            body = n.TypeDecl(line=line, name=class_name, kind="class")
            self.parse_class_body(body)
        return n.ObjectCreation(line=line, class_name=class_name, args=args, body=body, outer=outer)


def _lines_from_tokens(tokens: list[Token]) -> list[str]:
    by_line: dict[int, list[str]] = {}
    for tok in tokens:
        by_line.setdefault(tok.line, []).append(tok.text.splitlines()[0] if tok.text else "")
    last = max(by_line, default=0)
    return [" ".join(by_line.get(i, [])) for i in range(1, last + 1)]


def parse(tokens: list[Token], file_path: str, source: Optional[str] = None) -> n.SyntaxModel:
    """Build a :class:`SyntaxModel` from ``tokens``; never raises.

    ``source`` supplies the exact line texts used in violation reports; when
    omitted they are approximated from the tokens.
    """
    lines = split_lines(source) if source is not None else _lines_from_tokens(tokens)
    model = n.SyntaxModel(file_path=file_path, lines=lines)
    parser = _Parser(tokens)
    try:
        model.type_decls = parser.parse_compilation_unit()
    except RecursionError:
        tok = parser.peek()
        parser.errors.append(n.ParseError(tok.line, "nesting too deep", 1, len(lines)))
    model.parse_errors = parser.errors
    return model


def parse_source(source: str | bytes, file_path: str = "<memory>") -> n.SyntaxModel:
    if isinstance(source, bytes):
        source = source.decode("utf-8", errors="replace")
    return parse(tokenize(source), file_path, source)
