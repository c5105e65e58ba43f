"""Deterministic source rendering of scenario ASTs.

Canonical form: 4-space indentation, single spaces around ``=`` and binary
operators, no trailing whitespace. ``parse(unparse(p))`` is structurally
equal to ``p``.
"""

from __future__ import annotations

from . import nodes as n

_PRECEDENCE = {
    "or": 1, "and": 2, "not": 3, "cmp": 4, "+": 5, "-": 5, "*": 6, "/": 6, "neg": 7,
}


def _num(value) -> str:
    if isinstance(value, float) and value.is_integer() and abs(value) < 1e16:
        # floats written as x.0 keep their literal form
        return f"{value:.1f}"
    return repr(value)


def expr(e: n.Expr, parent_prec: int = 0) -> str:
    if isinstance(e, n.Name):
        return e.id
    if isinstance(e, n.Num):
        return _num(e.value)
    if isinstance(e, n.Str):
        return "'" + e.value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if isinstance(e, n.Const):
        return repr(e.value)
    if isinstance(e, n.ListExpr):
        return "[" + ", ".join(expr(i) for i in e.items) + "]"
    if isinstance(e, n.Attribute):
        return f"{expr(e.value, 8)}.{e.attr}"
    if isinstance(e, n.Index):
        return f"{expr(e.value, 8)}[{expr(e.index)}]"
    if isinstance(e, n.Call):
        parts = [expr(a) for a in e.args]
        if e.star_arg is not None:
            parts.append("*" + expr(e.star_arg))
        parts.extend(f"{k}={expr(v)}" for k, v in e.kwargs)
        return f"{expr(e.func, 8)}({', '.join(parts)})"
    if isinstance(e, n.Compare):
        out = expr(e.first, _PRECEDENCE["cmp"] + 1)
        for op, rhs in zip(e.ops, e.rest):
            out += f" {op} {expr(rhs, _PRECEDENCE['cmp'] + 1)}"
        return _wrap(out, _PRECEDENCE["cmp"], parent_prec)
    if isinstance(e, n.BinOp):
        prec = _PRECEDENCE[e.op]
        out = f"{expr(e.left, prec)} {e.op} {expr(e.right, prec + 1)}"
        return _wrap(out, prec, parent_prec)
    if isinstance(e, n.UnaryOp):
        if e.op == "not":
            out = f"not {expr(e.operand, _PRECEDENCE['not'])}"
            return _wrap(out, _PRECEDENCE["not"], parent_prec)
        out = f"-{expr(e.operand, _PRECEDENCE['neg'])}"
        return _wrap(out, _PRECEDENCE["neg"], parent_prec)
    if isinstance(e, n.BoolOp):
        prec = _PRECEDENCE[e.op]
        out = f" {e.op} ".join(expr(v, prec + 1) for v in e.values)
        return _wrap(out, prec, parent_prec)
    if isinstance(e, n.Lambda):
        return _wrap(f"lambda {e.param}: {expr(e.body)}", 1, parent_prec)
    if isinstance(e, n.DistanceTo):
        return f"(distance to {expr(e.target, 5)})"
    if isinstance(e, n.DistanceFrom):
        return f"(distance from {expr(e.source, 5)} to {expr(e.target, 5)})"
    raise TypeError(f"cannot unparse {type(e).__name__}")


def _wrap(text: str, prec: int, parent_prec: int) -> str:
    return f"({text})" if prec < parent_prec else text


def _behavior_stmt(s: n.BehaviorStmt, indent: int, out: list[str]) -> None:
    pad = "    " * indent
    if isinstance(s, n.DoStmt):
        out.append(f"{pad}do {expr(s.call)}")
    elif isinstance(s, n.TakeStmt):
        out.append(f"{pad}take {expr(s.action)}")
    elif isinstance(s, n.AssignStmt):
        out.append(f"{pad}{s.name} = {expr(s.value)}")
    elif isinstance(s, n.TerminateStmt):
        out.append(f"{pad}terminate")
    elif isinstance(s, n.WhileStmt):
        out.append(f"{pad}while {expr(s.cond)}:")
        for inner in s.body:
            _behavior_stmt(inner, indent + 1, out)
    elif isinstance(s, n.TryInterrupt):
        out.append(f"{pad}try:")
        for inner in s.body:
            _behavior_stmt(inner, indent + 1, out)
        for clause in s.handlers:
            out.append(f"{pad}interrupt when {expr(clause.cond)}:")
            for inner in clause.body:
                _behavior_stmt(inner, indent + 1, out)
    else:
        raise TypeError(f"cannot unparse {type(s).__name__}")


def _statement(s: n.Stmt, out: list[str]) -> None:
    if isinstance(s, n.ParamDecl):
        out.append(f"param {s.name} = {expr(s.value)}")
    elif isinstance(s, n.ModelDecl):
        out.append(f"model {s.dotted_name}")
    elif isinstance(s, n.ConstantDecl):
        out.append(f"{s.name} = {expr(s.value)}")
    elif isinstance(s, n.BehaviorDef):
        out.append(f"behaviour {s.name}({', '.join(s.parameters)}):")
        for inner in s.body:
            _behavior_stmt(inner, 1, out)
    elif isinstance(s, n.ObjectDecl):
        if isinstance(s.placement, n.AtPlacement):
            head = f"{s.name} = {s.kind} at {expr(s.placement.point, 5)}"
        else:
            p = s.placement
            head = (f"{s.name} = {s.kind} {p.side} of "
                    f"{expr(p.anchor, 5)} by {expr(p.distance, 5)}")
        lines = [head] + [f"    with {k} {expr(v)}" for k, v in s.properties]
        out.append(",\n".join(lines))
    elif isinstance(s, n.RequireStmt):
        out.append(f"require {expr(s.cond)}")
    elif isinstance(s, n.TerminateWhenStmt):
        out.append(f"terminate when {expr(s.cond)}")
    else:
        raise TypeError(f"cannot unparse {type(s).__name__}")


def unparse(program: n.ScenarioProgram) -> str:
    out: list[str] = []
    if program.docstring is not None:
        out.append(f'"""\n{program.docstring}\n"""')
    for s in program.statements:
        _statement(s, out)
    return "\n".join(out) + "\n"
