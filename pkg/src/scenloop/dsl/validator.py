"""Semantic checks: identifier resolution, behavior references, light typing.

The messages mirror the exception phrasing a Python-embedded DSL would
produce (``name 'X' is not defined``) because they are fed back to the
language model, which has seen plenty of those.
"""

from __future__ import annotations

from ..diagnostics import Diagnostic, Span, error
from . import builtins as bt
from . import nodes as n


class _Checker:
    def __init__(self, program: n.ScenarioProgram, network_symbols: frozenset[str]):
        self.program = program
        self.network_symbols = network_symbols
        self.diagnostics: list[Diagnostic] = []
        self.param_names = {p.name for p in program.params}
        self.behaviors = program.behaviors
        self.object_names = {o.name for o in program.objects}
        self.globals: dict[str, str] = dict(bt.GLOBAL_BUILTINS)

    def err(self, code: str, message: str, span: Span) -> None:
        self.diagnostics.append(error(code, message, span))

    # --- entry point ---

    def run(self) -> list[Diagnostic]:
        # first pass binds every global name so later statements can be
        # referenced by earlier behaviors (objects are late-bound at runtime)
        for name in self.behaviors:
            self.globals[name] = bt.BEHAVIOR
        for obj in self.program.objects:
            self.globals[obj.name] = bt.OBJECT
        for stmt in self.program.statements:
            if isinstance(stmt, n.ParamDecl):
                self.globals[stmt.name] = self.infer(stmt.value, self.globals)
            elif isinstance(stmt, n.ConstantDecl):
                self.globals[stmt.name] = self.infer(stmt.value, self.globals)
        for stmt in self.program.statements:
            self.check_statement(stmt)
        if not any(o.name == "ego" for o in self.program.objects):
            self.err("NoEgoDefined", "no object named 'ego' is defined",
                     self.program.statements[0].span if self.program.statements else Span(1, 1, 1))
        self.diagnostics.sort(key=lambda d: (d.span.line, d.span.col, d.code))
        return self.diagnostics

    # --- statements ---

    def check_statement(self, stmt: n.Stmt) -> None:
        if isinstance(stmt, (n.ParamDecl, n.ConstantDecl)):
            self.infer(stmt.value, self.globals, emit=True)
        elif isinstance(stmt, n.ModelDecl):
            pass
        elif isinstance(stmt, n.BehaviorDef):
            self.check_behavior(stmt)
        elif isinstance(stmt, n.ObjectDecl):
            self.check_object(stmt)
        elif isinstance(stmt, (n.RequireStmt, n.TerminateWhenStmt)):
            self.infer(stmt.cond, self.globals, emit=True)

    def check_behavior(self, b: n.BehaviorDef) -> None:
        scope = dict(self.globals)
        scope["self"] = bt.OBJECT
        for p in b.parameters:
            scope[p] = bt.UNKNOWN
        for name in _assigned_locals(b.body):
            scope[name] = bt.UNKNOWN
        self.check_behavior_body(b.body, scope)

    def check_behavior_body(self, body: tuple[n.BehaviorStmt, ...], scope: dict) -> None:
        for stmt in body:
            if isinstance(stmt, n.DoStmt):
                self.check_behavior_call(stmt.call, scope)
            elif isinstance(stmt, n.TakeStmt):
                self.infer(stmt.action, scope, emit=True)
            elif isinstance(stmt, n.AssignStmt):
                self.infer(stmt.value, scope, emit=True)
            elif isinstance(stmt, n.WhileStmt):
                self.infer(stmt.cond, scope, emit=True)
                self.check_behavior_body(stmt.body, scope)
            elif isinstance(stmt, n.TerminateStmt):
                pass
            elif isinstance(stmt, n.TryInterrupt):
                self.check_behavior_body(stmt.body, scope)
                for clause in stmt.handlers:
                    self.infer(clause.cond, scope, emit=True)
                    self.check_behavior_body(clause.body, scope)

    def check_behavior_call(self, call: n.Call, scope: dict) -> None:
        if isinstance(call.func, n.Name):
            name = call.func.id
            if name not in self.behaviors and name not in bt.BUILTIN_BEHAVIORS:
                self.err("UnknownBehavior", f"behavior '{name}' is not defined", call.func.span)
        for a in call.args:
            self.infer(a, scope, emit=True)
        for _, v in call.kwargs:
            self.infer(v, scope, emit=True)

    def check_object(self, obj: n.ObjectDecl) -> None:
        placement = obj.placement
        if isinstance(placement, n.AtPlacement):
            t = self.infer(placement.point, self.globals, emit=True)
            if t not in (bt.POINT, bt.OBJECT, bt.UNKNOWN):
                self.err("TypeMismatch",
                         f"placement expression must be an oriented point, not {t}",
                         placement.span)
        else:
            t = self.infer(placement.anchor, self.globals, emit=True)
            if t not in (bt.POINT, bt.OBJECT, bt.UNKNOWN):
                self.err("TypeMismatch",
                         f"offset anchor must be an oriented point, not {t}",
                         placement.span)
            d = self.infer(placement.distance, self.globals, emit=True)
            if not bt.comparable(d, bt.NUMBER):
                self.err("TypeMismatch", f"offset distance must be a number, not {d}",
                         placement.span)
        for key, value in obj.properties:
            if key not in bt.OBJECT_PROPERTIES:
                self.err("UnknownProperty", f"unknown property '{key}'", obj.span)
                continue
            if key in ("behaviour", "behavior"):
                if isinstance(value, n.Call):
                    self.check_behavior_call(value, self.globals)
                elif isinstance(value, n.Name):
                    if value.id not in self.behaviors and value.id not in bt.BUILTIN_BEHAVIORS:
                        self.err("UnknownBehavior",
                                 f"behavior '{value.id}' is not defined", value.span)
                else:
                    self.err("TypeMismatch", "behaviour property must be a behavior call",
                             obj.span)
            else:
                self.infer(value, self.globals, emit=True)

    # --- expression typing ---

    def infer(self, e: n.Expr, scope: dict, emit: bool = False) -> str:
        # emit=False is used for the binding pre-pass, where errors would be
        # reported twice otherwise
        t = self._infer(e, scope, emit)
        return t

    def _infer(self, e: n.Expr, scope: dict, emit: bool) -> str:
        if isinstance(e, n.Name):
            if e.id in scope:
                return scope[e.id]
            if emit:
                self.err("UnknownIdentifier", f"name '{e.id}' is not defined", e.span)
            return bt.UNKNOWN
        if isinstance(e, n.Num):
            return bt.NUMBER
        if isinstance(e, n.Str):
            return bt.STRING
        if isinstance(e, n.Const):
            return bt.BOOL if isinstance(e.value, bool) else bt.NONE
        if isinstance(e, n.ListExpr):
            kinds = {self._infer(item, scope, emit) for item in e.items}
            if len(kinds) == 1:
                return bt.list_of(kinds.pop())
            return bt.list_of(bt.UNKNOWN)
        if isinstance(e, n.Attribute):
            return self._infer_attribute(e, scope, emit)
        if isinstance(e, n.Index):
            base = self._infer(e.value, scope, emit)
            idx = self._infer(e.index, scope, emit)
            if emit and not bt.comparable(idx, bt.NUMBER):
                self.err("TypeMismatch", f"index must be a number, not {idx}", e.span)
            if base == bt.POLYLINE:
                return bt.POINT
            if bt.is_list(base):
                return bt.elem_of(base)
            return bt.UNKNOWN
        if isinstance(e, n.Call):
            return self._infer_call(e, scope, emit)
        if isinstance(e, n.Compare):
            return self._infer_compare(e, scope, emit)
        if isinstance(e, n.BinOp):
            lt = self._infer(e.left, scope, emit)
            rt = self._infer(e.right, scope, emit)
            for t, operand in ((lt, e.left), (rt, e.right)):
                if emit and not bt.comparable(t, bt.NUMBER):
                    self.err("TypeMismatch",
                             f"unsupported operand type for {e.op}: {t}", e.span)
                    break
            return bt.NUMBER
        if isinstance(e, n.UnaryOp):
            t = self._infer(e.operand, scope, emit)
            if e.op == "not":
                return bt.BOOL
            if emit and not bt.comparable(t, bt.NUMBER):
                self.err("TypeMismatch", f"unsupported operand type for -: {t}", e.span)
            return bt.NUMBER
        if isinstance(e, n.BoolOp):
            for v in e.values:
                self._infer(v, scope, emit)
            return bt.BOOL
        if isinstance(e, n.Lambda):
            inner = dict(scope)
            inner[e.param] = bt.UNKNOWN
            self._infer(e.body, inner, emit)
            return bt.UNKNOWN
        if isinstance(e, n.DistanceTo):
            self._check_distance_operand(e.target, scope, emit)
            return bt.NUMBER
        if isinstance(e, n.DistanceFrom):
            self._check_distance_operand(e.source, scope, emit)
            self._check_distance_operand(e.target, scope, emit)
            return bt.NUMBER
        return bt.UNKNOWN

    _DISTANCE_OK = (bt.POINT, bt.OBJECT, bt.REGION, bt.POLYLINE, bt.INTERSECTION,
                    bt.LANE, bt.UNKNOWN)

    def _check_distance_operand(self, e: n.Expr, scope: dict, emit: bool) -> None:
        t = self._infer(e, scope, emit)
        if emit and t not in self._DISTANCE_OK:
            self.err("TypeMismatch", f"cannot measure distance to a {t}",
                     getattr(e, "span", Span(0, 0)))

    def _infer_attribute(self, e: n.Attribute, scope: dict, emit: bool) -> str:
        base = self._infer(e.value, scope, emit)
        if base == bt.NETWORK:
            if e.attr in self.network_symbols:
                return bt.NETWORK_ATTR_TYPES.get(e.attr, bt.UNKNOWN)
            if emit:
                self.err("UnknownIdentifier",
                         f"road network has no attribute '{e.attr}'", e.span)
            return bt.UNKNOWN
        if base == bt.GLOBAL_PARAMS:
            if e.attr in self.param_names:
                return self.globals.get(e.attr, bt.UNKNOWN)
            if emit:
                self.err("UnknownIdentifier",
                         f"scenario has no param '{e.attr}'", e.span)
            return bt.UNKNOWN
        if base == bt.MANEUVER_TYPE_ENUM:
            if e.attr in bt.MANEUVER_TYPE_MEMBERS:
                return bt.MANEUVER_TYPE
            if emit:
                self.err("UnknownIdentifier",
                         f"ManeuverType has no member '{e.attr}'", e.span)
            return bt.UNKNOWN
        table = bt.ATTRIBUTES.get(base)
        if table is not None:
            if e.attr in table:
                return table[e.attr]
            if emit:
                self.err("UnknownIdentifier",
                         f"'{base}' object has no attribute '{e.attr}'", e.span)
        return bt.UNKNOWN

    def _infer_call(self, e: n.Call, scope: dict, emit: bool) -> str:
        arg_types = [self._infer(a, scope, emit) for a in e.args]
        star_type = self._infer(e.star_arg, scope, emit) if e.star_arg is not None else None
        for _, v in e.kwargs:
            self._infer(v, scope, emit)
        if isinstance(e.func, n.Name):
            name = e.func.id
            if name not in scope and emit:
                self.err("UnknownIdentifier", f"name '{name}' is not defined", e.func.span)
            if name == "VerifaiRange":
                return bt.NUMBER
            if name == "Uniform":
                if star_type is not None and bt.is_list(star_type):
                    return bt.elem_of(star_type)
                if len(set(arg_types)) == 1 and arg_types:
                    return arg_types[0]
                return bt.UNKNOWN
            if name == "filter":
                if len(e.args) == 2 and bt.is_list(arg_types[1]):
                    return arg_types[1]
                return bt.list_of(bt.UNKNOWN)
            if name == "localPath":
                return bt.STRING
            if name == "withinDistanceToAnyObjs":
                return bt.BOOL
            if name in bt.BUILTIN_ACTIONS:
                return bt.ACTION
            if name in bt.BUILTIN_BEHAVIORS or name in self.behaviors:
                return bt.BEHAVIOR
            return bt.UNKNOWN
        self._infer(e.func, scope, emit)
        return bt.UNKNOWN

    def _infer_compare(self, e: n.Compare, scope: dict, emit: bool) -> str:
        operands = [self._infer(e.first, scope, emit)]
        operands += [self._infer(r, scope, emit) for r in e.rest]
        result = bt.BOOL
        for i, op in enumerate(e.ops):
            left, right = operands[i], operands[i + 1]
            if op == "in":
                if right == bt.POLYLINE or right == bt.REGION:
                    if left == bt.ORIENTED_POINT_CLASS:
                        result = bt.POINT
                elif bt.is_list(right) or right == bt.UNKNOWN:
                    pass
                elif emit:
                    self.err("TypeMismatch",
                             f"right operand of 'in' must be a region, centerline or "
                             f"list, not {right}", e.span)
            elif op == "is":
                for t in (left, right):
                    if t not in (bt.MANEUVER_TYPE, bt.UNKNOWN):
                        if emit:
                            self.err("TypeMismatch",
                                     f"'is' compares maneuver types, not {t}", e.span)
                        break
            else:
                if not bt.comparable(left, right):
                    if emit:
                        self.err("TypeMismatch",
                                 f"cannot compare {left} with {right}", e.span)
        return result


def _assigned_locals(body: tuple[n.BehaviorStmt, ...]) -> set[str]:
    names: set[str] = set()
    for stmt in body:
        if isinstance(stmt, n.AssignStmt):
            names.add(stmt.name)
        elif isinstance(stmt, n.WhileStmt):
            names |= _assigned_locals(stmt.body)
        elif isinstance(stmt, n.TryInterrupt):
            names |= _assigned_locals(stmt.body)
            for clause in stmt.handlers:
                names |= _assigned_locals(clause.body)
    return names


def validate(program: n.ScenarioProgram,
             network_symbols: frozenset[str] | set[str] | None = None) -> list[Diagnostic]:
    """Empty list iff the program is executable against that symbol set."""
    symbols = frozenset(network_symbols) if network_symbols is not None else bt.NETWORK_SYMBOLS
    return _Checker(program, symbols | bt.NETWORK_SYMBOLS).run()
