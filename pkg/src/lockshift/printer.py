"""Source printers for both dialects.

Printing is line-aware: every statement is emitted on the line recorded in the
AST (padding with blank lines, sharing a line when several statements carry the
same number), so a transformed program lines up with its input and a parse ->
print -> parse round trip preserves statement lines.
"""
from __future__ import annotations

from .ast import (
    AcquireAssign,
    AddrOf,
    Assign,
    Binary,
    Block,
    Call,
    CallAssign,
    Deref,
    Discard,
    DropCall,
    Expr,
    ExprStmt,
    FieldAccess,
    FunctionDef,
    GetMutAccess,
    GlobalDecl,
    GuardDeref,
    GuardRef,
    GuardTarget,
    GuardedProgram,
    If,
    IntLit,
    LockDecl,
    Program,
    Return,
    Stmt,
    StructDef,
    TupleExpr,
    Type,
    Var,
    While,
)

_PREC_CMP = 1
_PREC_ADD = 2
_PREC_MUL = 3
_PREC_UNARY = 4
_PREC_POSTFIX = 5
_PREC_PRIMARY = 6

_BIN_PREC = {"==": _PREC_CMP, "!=": _PREC_CMP, "<": _PREC_CMP, "<=": _PREC_CMP,
             "+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL}


def type_text(ty: Type) -> str:
    if ty.kind == "int":
        base = "int"
    elif ty.kind == "void":
        base = "void"
    elif ty.kind == "mutex":
        base = "mutex_t"
    elif ty.kind == "thread":
        base = "thread_t"
    elif ty.kind == "struct":
        base = "struct %s" % ty.name
    elif ty.kind == "lock":
        base = "mutex<%s>" % ty.name
    elif ty.kind == "guard":
        base = "guard<%s>" % ty.path.text
    else:
        raise ValueError("unprintable type kind %r" % ty.kind)
    return base + "*" * ty.ptr


def decl_text(ty: Type, name: str) -> str:
    if ty.ptr:
        base = type_text(Type(ty.kind, ty.name, ty.path, 0))
        return "%s %s%s" % (base, "*" * ty.ptr, name)
    return "%s %s" % (type_text(ty), name)


def expr_text(e: Expr, min_prec: int = 0) -> str:
    text, prec = _expr(e)
    if prec < min_prec:
        return "(%s)" % text
    return text


def _expr(e: Expr) -> tuple[str, int]:
    if isinstance(e, IntLit):
        return str(e.value), _PREC_PRIMARY
    if isinstance(e, Var):
        return e.name, _PREC_PRIMARY
    if isinstance(e, GuardRef):
        return e.name, _PREC_PRIMARY
    if isinstance(e, FieldAccess):
        if e.arrow:
            return "%s->%s" % (expr_text(e.base, _PREC_POSTFIX), e.fld), _PREC_POSTFIX
        if isinstance(e.base, Deref):
            return "(*%s).%s" % (expr_text(e.base.expr), e.fld), _PREC_POSTFIX
        return "%s.%s" % (expr_text(e.base, _PREC_POSTFIX), e.fld), _PREC_POSTFIX
    if isinstance(e, GuardDeref):
        return "(*%s).%s" % (e.guard, e.fld), _PREC_POSTFIX
    if isinstance(e, GetMutAccess):
        return "%s.get_mut().%s" % (e.path.text, e.fld), _PREC_POSTFIX
    if isinstance(e, AddrOf):
        op = "&mut " if e.mut else "&"
        return op + expr_text(e.expr, _PREC_UNARY), _PREC_UNARY
    if isinstance(e, Deref):
        return "*" + expr_text(e.expr, _PREC_UNARY), _PREC_UNARY
    if isinstance(e, Binary):
        prec = _BIN_PREC[e.op]
        lhs = expr_text(e.lhs, prec)
        rhs = expr_text(e.rhs, prec + 1)
        return "%s %s %s" % (lhs, e.op, rhs), prec
    if isinstance(e, Call):
        args = ", ".join(expr_text(a) for a in e.args)
        return "%s(%s)" % (e.name, args), _PREC_PRIMARY
    if isinstance(e, TupleExpr):
        return "(%s)" % ", ".join(expr_text(i) for i in e.items), _PREC_PRIMARY
    raise ValueError("unprintable expression %r" % e)


def stmt_text(s: Stmt) -> str:
    """Single-statement text without trailing brace context (simple forms only)."""
    if isinstance(s, Assign):
        return "%s = %s;" % (expr_text(s.place), expr_text(s.value))
    if isinstance(s, ExprStmt):
        return "%s;" % expr_text(s.expr)
    if isinstance(s, Return):
        if s.value is None:
            return "return;"
        return "return %s;" % expr_text(s.value)
    if isinstance(s, AcquireAssign):
        return "%s = %s.acquire();" % (s.guard, s.path.text)
    if isinstance(s, DropCall):
        return "drop(%s);" % s.guard
    if isinstance(s, CallAssign):
        targets = ", ".join(
            "_" if isinstance(t, Discard)
            else t.name if isinstance(t, GuardTarget)
            else expr_text(t)
            for t in s.targets
        )
        call = expr_text(s.call)
        if len(s.targets) == 1:
            return "%s = %s;" % (targets, call)
        return "(%s) = %s;" % (targets, call)
    raise ValueError("not a simple statement: %r" % s)


class _Sink:
    def __init__(self) -> None:
        self.lines: list[str] = []

    def put(self, line: int, text: str, depth: int) -> None:
        line = max(line, 1)
        while len(self.lines) < line:
            self.lines.append("")
        target = max(line, self._last_content() or line)
        while len(self.lines) < target:
            self.lines.append("")
        i = target - 1
        if self.lines[i] == "":
            self.lines[i] = "    " * depth + text
        else:
            self.lines[i] += " " + text

    def append_to_last(self, text: str) -> None:
        if not self.lines:
            self.lines.append(text)
            return
        i = self._last_content()
        if i == 0:
            self.lines[0] = text
        else:
            self.lines[i - 1] += " " + text

    def _last_content(self) -> int:
        for i in range(len(self.lines), 0, -1):
            if self.lines[i - 1] != "":
                return i
        return 0

    def render(self) -> str:
        return "\n".join(self.lines) + "\n" if self.lines else ""


def _emit_block_stmts(sink: _Sink, block: Block, depth: int) -> None:
    for s in block.stmts:
        _emit_stmt(sink, s, depth)


def _emit_stmt(sink: _Sink, s: Stmt, depth: int) -> None:
    if isinstance(s, Block):
        sink.put(s.line, "{", depth)
        _emit_block_stmts(sink, s, depth + 1)
        sink.append_to_last("}")
        return
    if isinstance(s, If):
        sink.put(s.line, "if (%s) {" % expr_text(s.cond), depth)
        _emit_block_stmts(sink, s.then, depth + 1)
        sink.append_to_last("}")
        if s.orelse is not None:
            sink.append_to_last("else {")
            _emit_block_stmts(sink, s.orelse, depth + 1)
            sink.append_to_last("}")
        return
    if isinstance(s, While):
        sink.put(s.line, "while (%s) {" % expr_text(s.cond), depth)
        _emit_block_stmts(sink, s.body, depth + 1)
        sink.append_to_last("}")
        return
    sink.put(s.line, stmt_text(s), depth)


def _emit_function(sink: _Sink, f: FunctionDef) -> None:
    if len(f.rets) == 1:
        ret = type_text(f.rets[0])
    else:
        ret = "(%s)" % ", ".join(type_text(t) for t in f.rets)
    params = ", ".join(decl_text(p.ty, p.name) for p in f.params)
    sink.put(f.line_span[0], "%s %s(%s) {" % (ret, f.name, params), 0)
    for d in f.guard_decls:
        sink.put(d.line, "guard<%s> %s;" % (d.path.text, d.guard), 1)
    _emit_block_stmts(sink, f.body, 1)
    sink.append_to_last("}")


def _emit_global(sink: _Sink, g: GlobalDecl) -> None:
    if g.init is not None:
        sink.put(g.line, "%s = %s;" % (decl_text(g.ty, g.name), expr_text(g.init)), 0)
    else:
        sink.put(g.line, "%s;" % decl_text(g.ty, g.name), 0)


def _emit_struct(sink: _Sink, s: StructDef) -> None:
    fields = " ".join("%s;" % decl_text(f.ty, f.name) for f in s.fields)
    if fields:
        sink.put(s.line, "struct %s { %s };" % (s.name, fields), 0)
    else:
        sink.put(s.line, "struct %s { };" % s.name, 0)


def _emit_lock_decl(sink: _Sink, d: LockDecl) -> None:
    head = "mutex<%s> %s" % (d.payload, d.name)
    if d.inits:
        inits = ", ".join(
            name if init is None else "%s = %s" % (name, expr_text(init))
            for name, init in d.inits
        )
        sink.put(d.line, "%s = %s { %s };" % (head, d.payload, inits), 0)
    else:
        sink.put(d.line, "%s;" % head, 0)


def _emit_program(p: Program | GuardedProgram) -> str:
    items: list[tuple[int, int, object]] = []
    seq = 0
    for g in p.globals:
        items.append((g.line, seq, g))
        seq += 1
    if isinstance(p, GuardedProgram):
        for d in p.lock_decls:
            items.append((d.line, seq, d))
            seq += 1
    for s in p.structs:
        items.append((s.line, seq, s))
        seq += 1
    for f in p.functions:
        items.append((f.line_span[0], seq, f))
        seq += 1
    items.sort(key=lambda it: (it[0], it[1]))
    sink = _Sink()
    for _, _, item in items:
        if isinstance(item, GlobalDecl):
            _emit_global(sink, item)
        elif isinstance(item, LockDecl):
            _emit_lock_decl(sink, item)
        elif isinstance(item, StructDef):
            _emit_struct(sink, item)
        else:
            _emit_function(sink, item)
    return sink.render()


def print_source(p: Program) -> str:
    """Render a plain-dialect program back to source text."""
    return _emit_program(p)


def print_guarded(p: GuardedProgram) -> str:
    """Render a guarded-dialect program to source text."""
    return _emit_program(p)
