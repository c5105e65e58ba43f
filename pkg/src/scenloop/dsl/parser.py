"""Recursive-descent parser producing :class:`ScenarioProgram` ASTs.

The grammar is deliberately fixed to the constructs the scenario corpus
exercises; anything else is a syntax error. Keywords are soft: they are
ordinary NAME tokens matched by value in the positions where they can occur.
"""

from __future__ import annotations

import re

from ..diagnostics import Diagnostic, SourceError, Span, error
from . import nodes as n
from .lexer import Token, tokenize

_OBJECT_KINDS = ("Car", "Pedestrian")
_COMPARE_OPS = ("<", "<=", ">", ">=", "==", "!=")

_DOCSTRING_RE = re.compile(r'\A\s*("""|\'\'\')(.*?)\1[ \t]*\n?', re.DOTALL)


def split_docstring(source: str) -> tuple[str | None, str]:
    """Split a leading triple-quoted docstring off the source.

    Returns (docstring text stripped of the surrounding blank lines, rest).
    """
    m = _DOCSTRING_RE.match(source)
    if not m:
        return None, source
    return m.group(2).strip("\n"), source[m.end():]


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # --- token helpers ---

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def at_name(self, *values: str) -> bool:
        return self.tok.kind == "NAME" and self.tok.value in values

    def expect(self, kind: str, value: str | None = None, what: str | None = None) -> Token:
        if self.at(kind, value):
            return self.advance()
        return self.fail(what or (value if value is not None else kind.lower()))

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else (t.value or t.kind.lower())
        raise SourceError([error(
            "SyntaxError", f"expected {expected}, found {found!r}", t.span)])

    # --- program structure ---

    def parse_program(self, docstring: str | None) -> n.ScenarioProgram:
        stmts: list[n.Stmt] = []
        while not self.at("EOF"):
            if self.at("NEWLINE"):
                self.advance()
                continue
            stmts.append(self.statement())
        return n.ScenarioProgram(statements=tuple(stmts), docstring=docstring)

    def statement(self) -> n.Stmt:
        t = self.tok
        if t.kind != "NAME":
            self.fail("a statement")
        if t.value == "param":
            return self.param_decl()
        if t.value == "model":
            return self.model_decl()
        if t.value == "require":
            self.advance()
            cond = self.expression()
            self.expect("NEWLINE", what="end of line")
            return n.RequireStmt(cond, span=t.span)
        if t.value == "terminate":
            self.advance()
            self.expect("NAME", "when")
            cond = self.expression()
            self.expect("NEWLINE", what="end of line")
            return n.TerminateWhenStmt(cond, span=t.span)
        if t.value in ("behaviour", "behavior"):
            return self.behavior_def()
        return self.assignment_or_object()

    def param_decl(self) -> n.ParamDecl:
        start = self.advance()
        name = self.expect("NAME", what="parameter name")
        self.expect("OP", "=")
        value = self.expression()
        self.expect("NEWLINE", what="end of line")
        return n.ParamDecl(name.value, value, span=start.span)

    def model_decl(self) -> n.ModelDecl:
        start = self.advance()
        parts = [self.expect("NAME", what="model name").value]
        while self.at("OP", "."):
            self.advance()
            parts.append(self.expect("NAME", what="model name").value)
        self.expect("NEWLINE", what="end of line")
        return n.ModelDecl(".".join(parts), span=start.span)

    def assignment_or_object(self) -> n.Stmt:
        name = self.expect("NAME", what="a name")
        self.expect("OP", "=")
        if (self.tok.kind == "NAME" and self.tok.value in _OBJECT_KINDS
                and self.tokens[self.pos + 1].kind == "NAME"
                and self.tokens[self.pos + 1].value in ("at", "left", "right")):
            return self.object_decl(name)
        value = self.expression()
        self.expect("NEWLINE", what="end of line")
        return n.ConstantDecl(name.value, value, span=name.span)

    def object_decl(self, name: Token) -> n.ObjectDecl:
        kind = self.advance()
        placement = self.placement()
        props: list[tuple[str, n.Expr]] = []
        while self.at("OP", ","):
            self.advance()
            self.expect("NAME", "with")
            key = self.expect("NAME", what="property name")
            value = self.expression()
            props.append((key.value, value))
        self.expect("NEWLINE", what="end of line")
        return n.ObjectDecl(name.value, kind.value, placement, tuple(props), span=name.span)

    def placement(self) -> n.Placement:
        t = self.tok
        if t.value == "at":
            self.advance()
            return n.AtPlacement(self.arith(), span=t.span)
        side = self.advance()  # left | right
        self.expect("NAME", "of")
        anchor = self.arith()
        self.expect("NAME", "by")
        distance = self.arith()
        return n.OffsetPlacement(side.value, anchor, distance, span=side.span)

    # --- behaviors ---

    def behavior_def(self) -> n.BehaviorDef:
        start = self.advance()
        name = self.expect("NAME", what="behavior name")
        self.expect("OP", "(")
        params: list[str] = []
        if not self.at("OP", ")"):
            params.append(self.expect("NAME", what="parameter name").value)
            while self.at("OP", ","):
                self.advance()
                params.append(self.expect("NAME", what="parameter name").value)
        self.expect("OP", ")")
        body = self.block(self.behavior_stmt)
        return n.BehaviorDef(name.value, tuple(params), tuple(body), span=start.span)

    def block(self, stmt_parser) -> list:
        self.expect("OP", ":")
        self.expect("NEWLINE", what="end of line")
        self.expect("INDENT", what="an indented block")
        stmts = []
        while not self.at("DEDENT"):
            if self.at("NEWLINE"):
                self.advance()
                continue
            stmts.append(stmt_parser())
        self.advance()  # DEDENT
        if not stmts:
            self.fail("at least one statement in block")
        return stmts

    def behavior_stmt(self) -> n.BehaviorStmt:
        t = self.tok
        if t.kind != "NAME":
            self.fail("a behavior statement")
        if t.value == "do":
            self.advance()
            call = self.call_expr("behavior call")
            self.expect("NEWLINE", what="end of line")
            return n.DoStmt(call, span=t.span)
        if t.value == "take":
            self.advance()
            call = self.call_expr("action call")
            self.expect("NEWLINE", what="end of line")
            return n.TakeStmt(call, span=t.span)
        if t.value == "terminate":
            self.advance()
            self.expect("NEWLINE", what="end of line")
            return n.TerminateStmt(span=t.span)
        if t.value == "while":
            self.advance()
            cond = self.expression()
            body = self.block(self.behavior_stmt)
            return n.WhileStmt(cond, tuple(body), span=t.span)
        if t.value == "try":
            return self.try_interrupt()
        name = self.expect("NAME", what="a behavior statement")
        self.expect("OP", "=")
        value = self.expression()
        self.expect("NEWLINE", what="end of line")
        return n.AssignStmt(name.value, value, span=name.span)

    def try_interrupt(self) -> n.TryInterrupt:
        start = self.advance()
        body = self.block(self.behavior_stmt)
        handlers: list[n.InterruptClause] = []
        while self.at_name("interrupt"):
            clause_tok = self.advance()
            self.expect("NAME", "when")
            cond = self.expression()
            handler_body = self.block(self.behavior_stmt)
            handlers.append(n.InterruptClause(cond, tuple(handler_body), span=clause_tok.span))
        return n.TryInterrupt(tuple(body), tuple(handlers), span=start.span)

    def call_expr(self, what: str) -> n.Call:
        expr = self.postfix()
        if not isinstance(expr, n.Call):
            self.fail(what)
        return expr

    # --- expressions ---

    def expression(self) -> n.Expr:
        return self.or_expr()

    def or_expr(self) -> n.Expr:
        first = self.and_expr()
        if not self.at_name("or"):
            return first
        values = [first]
        span = self.tok.span
        while self.at_name("or"):
            self.advance()
            values.append(self.and_expr())
        return n.BoolOp("or", tuple(values), span=span)

    def and_expr(self) -> n.Expr:
        first = self.not_expr()
        if not self.at_name("and"):
            return first
        values = [first]
        span = self.tok.span
        while self.at_name("and"):
            self.advance()
            values.append(self.not_expr())
        return n.BoolOp("and", tuple(values), span=span)

    def not_expr(self) -> n.Expr:
        if self.at_name("not"):
            t = self.advance()
            return n.UnaryOp("not", self.not_expr(), span=t.span)
        return self.comparison()

    def comparison(self) -> n.Expr:
        first = self.arith()
        ops: list[str] = []
        rest: list[n.Expr] = []
        span = self.tok.span
        while True:
            if self.tok.kind == "OP" and self.tok.value in _COMPARE_OPS:
                ops.append(self.advance().value)
            elif self.at_name("is") or self.at_name("in"):
                ops.append(self.advance().value)
            else:
                break
            rest.append(self.arith())
        if not ops:
            return first
        return n.Compare(first, tuple(ops), tuple(rest), span=span)

    def arith(self) -> n.Expr:
        left = self.term()
        while self.tok.kind == "OP" and self.tok.value in ("+", "-"):
            op = self.advance()
            left = n.BinOp(op.value, left, self.term(), span=op.span)
        return left

    def term(self) -> n.Expr:
        left = self.unary()
        while self.tok.kind == "OP" and self.tok.value in ("*", "/"):
            op = self.advance()
            left = n.BinOp(op.value, left, self.unary(), span=op.span)
        return left

    def unary(self) -> n.Expr:
        if self.at("OP", "-"):
            t = self.advance()
            return n.UnaryOp("-", self.unary(), span=t.span)
        return self.postfix()

    def postfix(self) -> n.Expr:
        expr = self.primary()
        while True:
            if self.at("OP", "("):
                expr = self.finish_call(expr)
            elif self.at("OP", "["):
                t = self.advance()
                index = self.expression()
                self.expect("OP", "]")
                expr = n.Index(expr, index, span=t.span)
            elif self.at("OP", "."):
                t = self.advance()
                attr = self.expect("NAME", what="attribute name")
                expr = n.Attribute(expr, attr.value, span=t.span)
            else:
                return expr

    def finish_call(self, func: n.Expr) -> n.Call:
        t = self.advance()  # (
        args: list[n.Expr] = []
        kwargs: list[tuple[str, n.Expr]] = []
        star: n.Expr | None = None
        while not self.at("OP", ")"):
            if self.at("OP", "*"):
                self.advance()
                if star is not None:
                    self.fail("a single starred argument")
                star = self.expression()
            elif (self.tok.kind == "NAME"
                  and self.tokens[self.pos + 1].kind == "OP"
                  and self.tokens[self.pos + 1].value == "="):
                key = self.advance()
                self.advance()  # =
                kwargs.append((key.value, self.expression()))
            else:
                if kwargs:
                    self.fail("keyword arguments after positional ones")
                args.append(self.expression())
            if self.at("OP", ","):
                self.advance()
            elif not self.at("OP", ")"):
                self.fail("',' or ')'")
        self.advance()  # )
        return n.Call(func, tuple(args), tuple(kwargs), star, span=t.span)

    def primary(self) -> n.Expr:
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            value = float(t.value) if "." in t.value else int(t.value)
            return n.Num(value, span=t.span)
        if t.kind == "STRING":
            self.advance()
            return n.Str(t.value, span=t.span)
        if t.kind == "OP" and t.value == "(":
            self.advance()
            expr = self.expression()
            self.expect("OP", ")")
            return expr
        if t.kind == "OP" and t.value == "[":
            self.advance()
            items: list[n.Expr] = []
            while not self.at("OP", "]"):
                items.append(self.expression())
                if self.at("OP", ","):
                    self.advance()
                elif not self.at("OP", "]"):
                    self.fail("',' or ']'")
            self.advance()
            return n.ListExpr(tuple(items), span=t.span)
        if t.kind == "NAME":
            if t.value in ("True", "False", "None"):
                self.advance()
                return n.Const({"True": True, "False": False, "None": None}[t.value], span=t.span)
            if t.value == "lambda":
                self.advance()
                param = self.expect("NAME", what="lambda parameter")
                self.expect("OP", ":")
                body = self.or_expr()
                return n.Lambda(param.value, body, span=t.span)
            if t.value == "distance":
                return self.distance_expr()
            self.advance()
            return n.Name(t.value, span=t.span)
        self.fail("an expression")

    def distance_expr(self) -> n.Expr:
        t = self.advance()  # distance
        if self.at_name("to"):
            self.advance()
            return n.DistanceTo(self.arith(), span=t.span)
        if self.at_name("from"):
            self.advance()
            source = self.arith()
            self.expect("NAME", "to")
            target = self.arith()
            return n.DistanceFrom(source, target, span=t.span)
        self.fail("'to' or 'from' after 'distance'")


def parse(source: str) -> n.ScenarioProgram:
    """Parse source text; raises :class:`SourceError` with diagnostics."""
    docstring, body = split_docstring(source)
    tokens = tokenize(body)
    # token line numbers refer to the body; shift them to the original text
    offset = source[:len(source) - len(body)].count("\n")
    if offset:
        tokens = [Token(t.kind, t.value, t.line + offset, t.col) for t in tokens]
    return Parser(tokens).parse_program(docstring)


def try_parse(source: str) -> tuple[n.ScenarioProgram | None, list[Diagnostic]]:
    try:
        return parse(source), []
    except SourceError as exc:
        return None, exc.diagnostics
