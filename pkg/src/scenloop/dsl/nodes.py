"""AST node definitions for the scenario DSL.

Node equality is structural and ignores source spans, so that
``parse(unparse(parse(s)))`` compares equal to ``parse(s)`` even though the
unparsed text has different line numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..diagnostics import NO_SPAN, Span


def _span():
    return field(default=NO_SPAN, compare=False, repr=False, kw_only=True)


# --- expressions ---


@dataclass(frozen=True)
class Name:
    id: str
    span: Span = _span()


@dataclass(frozen=True)
class Num:
    value: float  # ints are stored as float-compatible ints, see parser
    span: Span = _span()


@dataclass(frozen=True)
class Str:
    value: str
    span: Span = _span()


@dataclass(frozen=True)
class Const:
    """True / False / None literal."""

    value: object
    span: Span = _span()


@dataclass(frozen=True)
class ListExpr:
    items: tuple["Expr", ...]
    span: Span = _span()


@dataclass(frozen=True)
class Attribute:
    value: "Expr"
    attr: str
    span: Span = _span()


@dataclass(frozen=True)
class Index:
    value: "Expr"
    index: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Call:
    func: "Expr"
    args: tuple["Expr", ...] = ()
    kwargs: tuple[tuple[str, "Expr"], ...] = ()
    star_arg: Union["Expr", None] = None
    span: Span = _span()


@dataclass(frozen=True)
class Compare:
    """Chained comparison: first (op0) rest0 (op1) rest1 ..."""

    first: "Expr"
    ops: tuple[str, ...]  # "<", "<=", ">", ">=", "==", "!=", "is", "in"
    rest: tuple["Expr", ...]
    span: Span = _span()


@dataclass(frozen=True)
class BinOp:
    op: str  # "+", "-", "*", "/"
    left: "Expr"
    right: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "-", "not"
    operand: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and", "or"
    values: tuple["Expr", ...]
    span: Span = _span()


@dataclass(frozen=True)
class Lambda:
    param: str
    body: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class DistanceTo:
    """``distance to X``: Euclidean distance from ego to X."""

    target: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class DistanceFrom:
    """``distance from A to B``."""

    source: "Expr"
    target: "Expr"
    span: Span = _span()


Expr = Union[
    Name, Num, Str, Const, ListExpr, Attribute, Index, Call, Compare,
    BinOp, UnaryOp, BoolOp, Lambda, DistanceTo, DistanceFrom,
]


# --- behavior statements ---


@dataclass(frozen=True)
class DoStmt:
    call: Call
    span: Span = _span()


@dataclass(frozen=True)
class TakeStmt:
    action: Call
    span: Span = _span()


@dataclass(frozen=True)
class AssignStmt:
    name: str
    value: Expr
    span: Span = _span()


@dataclass(frozen=True)
class WhileStmt:
    cond: Expr
    body: tuple["BehaviorStmt", ...]
    span: Span = _span()


@dataclass(frozen=True)
class TerminateStmt:
    span: Span = _span()


@dataclass(frozen=True)
class InterruptClause:
    cond: Expr
    body: tuple["BehaviorStmt", ...]
    span: Span = _span()


@dataclass(frozen=True)
class TryInterrupt:
    body: tuple["BehaviorStmt", ...]
    handlers: tuple[InterruptClause, ...]  # source order; later = higher priority
    span: Span = _span()


BehaviorStmt = Union[DoStmt, TakeStmt, AssignStmt, WhileStmt, TerminateStmt, TryInterrupt]


# --- top-level statements ---


@dataclass(frozen=True)
class ParamDecl:
    name: str
    value: Expr
    span: Span = _span()


@dataclass(frozen=True)
class ModelDecl:
    """``model a.b.c`` line: accepted and ignored (backend selection)."""

    dotted_name: str
    span: Span = _span()


@dataclass(frozen=True)
class ConstantDecl:
    name: str
    value: Expr
    span: Span = _span()


@dataclass(frozen=True)
class BehaviorDef:
    name: str
    parameters: tuple[str, ...]
    body: tuple[BehaviorStmt, ...]
    span: Span = _span()

    def try_blocks(self) -> list[TryInterrupt]:
        return [s for s in self.body if isinstance(s, TryInterrupt)]


@dataclass(frozen=True)
class AtPlacement:
    point: Expr
    span: Span = _span()


@dataclass(frozen=True)
class OffsetPlacement:
    side: str  # "left" | "right"
    anchor: Expr
    distance: Expr
    span: Span = _span()


Placement = Union[AtPlacement, OffsetPlacement]


@dataclass(frozen=True)
class ObjectDecl:
    name: str
    kind: str  # "Car" | "Pedestrian"
    placement: Placement
    properties: tuple[tuple[str, Expr], ...] = ()
    span: Span = _span()

    def property(self, key: str) -> Expr | None:
        for k, v in self.properties:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class RequireStmt:
    cond: Expr
    span: Span = _span()


@dataclass(frozen=True)
class TerminateWhenStmt:
    cond: Expr
    span: Span = _span()


Stmt = Union[
    ParamDecl, ModelDecl, ConstantDecl, BehaviorDef, ObjectDecl,
    RequireStmt, TerminateWhenStmt,
]


@dataclass(frozen=True)
class ScenarioProgram:
    """A parsed scenario: statements in source order plus categorized views."""

    statements: tuple[Stmt, ...]
    docstring: str | None = None

    @property
    def params(self) -> list[ParamDecl]:
        return [s for s in self.statements if isinstance(s, ParamDecl)]

    @property
    def constants(self) -> dict[str, Expr]:
        return {s.name: s.value for s in self.statements if isinstance(s, ConstantDecl)}

    @property
    def behaviors(self) -> dict[str, BehaviorDef]:
        return {s.name: s for s in self.statements if isinstance(s, BehaviorDef)}

    @property
    def objects(self) -> list[ObjectDecl]:
        return [s for s in self.statements if isinstance(s, ObjectDecl)]

    @property
    def requirements(self) -> list[RequireStmt]:
        return [s for s in self.statements if isinstance(s, RequireStmt)]

    @property
    def terminations(self) -> list[TerminateWhenStmt]:
        return [s for s in self.statements if isinstance(s, TerminateWhenStmt)]
