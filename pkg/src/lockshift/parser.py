"""Recursive-descent parser and name resolver for both dialects.

parse() reads the plain dialect (.mc); parse_guarded() additionally accepts the
guarded forms a transformed program uses (.gmc): data-owning lock declarations,
guard variables typed guard<lock-path>, acquire/drop, destructuring call
assignments, tuple returns, and payload accesses.
"""
from __future__ import annotations

from .ast import (
    INT,
    LOCK_API,
    CREATE_FN,
    INIT_FN,
    LOCK_FN,
    UNLOCK_FN,
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
    FieldDecl,
    FunctionDef,
    GetMutAccess,
    GlobalDecl,
    GuardDeref,
    GuardRef,
    GuardTarget,
    GuardVarDecl,
    GuardedProgram,
    If,
    IntLit,
    LockDecl,
    LockPath,
    Param,
    Program,
    Return,
    Stmt,
    StructDef,
    TupleExpr,
    Type,
    Var,
    While,
    lock_path_of,
    place_path,
)
from .diagnostics import (
    NotALockPlace,
    ParseError,
    TypeCheckError,
    UnknownIdentifier,
)
from .lexer import Token, tokenize

_CMP_OPS = ("==", "!=", "<", "<=")
_BASE_KINDS = {"int": "int", "void": "void", "mutex_t": "mutex", "thread_t": "thread"}


class _AcquireExpr(Expr):
    """Parse-time marker for `path.acquire()`; must become an AcquireAssign."""

    def __init__(self, path: LockPath, line: int):
        self.path = path
        self.line = line


class _Parser:
    def __init__(self, tokens: list[Token], guarded: bool):
        self.toks = tokens
        self.pos = 0
        self.guarded = guarded
        self.guards: dict[str, LockPath] = {}  # in-scope guard vars of the current fn

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[i]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, value: str) -> bool:
        return self.peek().value == value and self.peek().kind != "eof"

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.next()
            return True
        return False

    def expect(self, value: str) -> Token:
        t = self.peek()
        if t.value != value or t.kind == "eof":
            raise ParseError("expected %r, found %r" % (value, t.value or "end of input"),
                             t.line, t.col)
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError("expected %s, found %r" % (what, t.value or "end of input"),
                             t.line, t.col)
        return self.next()

    def fail(self, message: str) -> ParseError:
        t = self.peek()
        return ParseError(message, t.line, t.col)

    # -- types ---------------------------------------------------------------

    def at_type(self) -> bool:
        t = self.peek()
        if t.kind == "kw" and t.value in ("int", "void", "mutex_t", "thread_t", "struct"):
            return True
        if self.guarded and t.kind == "ident" and t.value in ("mutex", "guard"):
            return self.peek(1).value == "<"
        return False

    def parse_type(self) -> Type:
        t = self.next()
        if t.value in _BASE_KINDS:
            ty = Type(_BASE_KINDS[t.value])
        elif t.value == "struct":
            name = self.expect_ident("struct name")
            ty = Type("struct", name.value)
        elif self.guarded and t.value == "mutex":
            self.expect("<")
            payload = self.expect_ident("payload struct name")
            self.expect(">")
            ty = Type("lock", payload.value)
        elif self.guarded and t.value == "guard":
            self.expect("<")
            path = self.parse_dotted_path()
            self.expect(">")
            ty = Type("guard", path=path)
        else:
            raise ParseError("expected a type, found %r" % t.value, t.line, t.col)
        ptr = 0
        while self.accept("*"):
            ptr += 1
        ty.ptr = ptr
        return ty

    def parse_dotted_path(self) -> LockPath:
        segs = [self.expect_ident("path segment").value]
        while self.accept("."):
            segs.append(self.expect_ident("path segment").value)
        return LockPath(tuple(segs))

    # -- top level -----------------------------------------------------------

    def parse_program(self):
        globals_: list[GlobalDecl] = []
        structs: list[StructDef] = []
        functions: list[FunctionDef] = []
        lock_decls: list[LockDecl] = []
        while self.peek().kind != "eof":
            if (self.at("struct") and self.peek(1).kind == "ident"
                    and self.peek(2).value == "{"):
                structs.append(self.parse_struct_def())
                continue
            first = self.peek()
            if first.value == "(" and self.guarded:
                rets = self.parse_ret_types()
                name = self.expect_ident("function name")
                functions.append(self.parse_function(rets, name, first.line))
                continue
            if not self.at_type():
                raise self.fail("expected a declaration")
            ty = self.parse_type()
            name = self.expect_ident("declared name")
            if self.at("("):
                functions.append(self.parse_function((ty,), name, first.line))
            elif ty.kind == "lock":
                lock_decls.append(self.parse_lock_decl(ty, name))
            else:
                if ty.kind == "guard":
                    raise ParseError("guard variables cannot be globals",
                                     first.line, first.col)
                init = None
                if self.accept("="):
                    init = self.parse_expr()
                self.expect(";")
                globals_.append(GlobalDecl(ty, name.value, init, first.line))
        if self.guarded:
            return GuardedProgram(globals_, lock_decls, structs, functions)
        return Program(globals_, structs, functions)

    def parse_struct_def(self) -> StructDef:
        start = self.expect("struct")
        name = self.expect_ident("struct name")
        self.expect("{")
        fields: list[FieldDecl] = []
        while not self.at("}"):
            fty = self.parse_type()
            fname = self.expect_ident("field name")
            self.expect(";")
            fields.append(FieldDecl(fty, fname.value))
        self.expect("}")
        self.expect(";")
        return StructDef(name.value, fields, start.line)

    def parse_lock_decl(self, ty: Type, name: Token) -> LockDecl:
        inits: list[tuple[str, Expr | None]] = []
        if self.accept("="):
            payload = self.expect_ident("payload struct name")
            if payload.value != ty.name:
                raise ParseError(
                    "initializer struct %r does not match payload %r"
                    % (payload.value, ty.name), payload.line, payload.col)
            self.expect("{")
            while not self.at("}"):
                fname = self.expect_ident("field name")
                finit = None
                if self.accept("="):
                    finit = self.parse_expr()
                inits.append((fname.value, finit))
                if not self.accept(","):
                    break
            self.expect("}")
        self.expect(";")
        return LockDecl(name.value, ty.name or "", inits, name.line)

    def parse_ret_types(self) -> tuple[Type, ...]:
        self.expect("(")
        rets = [self.parse_type()]
        while self.accept(","):
            rets.append(self.parse_type())
        self.expect(")")
        if len(rets) < 2:
            raise self.fail("a tuple return type needs at least two members")
        return tuple(rets)

    def parse_function(self, rets: tuple[Type, ...], name: Token, start_line: int) -> FunctionDef:
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            while True:
                pty = self.parse_type()
                pname = self.expect_ident("parameter name")
                params.append(Param(pty, pname.value))
                if not self.accept(","):
                    break
        self.expect(")")
        self.guards = {
            p.name: p.ty.path for p in params
            if p.ty.kind == "guard" and p.ty.path is not None
        }
        open_brace = self.expect("{")
        guard_decls: list[GuardVarDecl] = []
        while (self.guarded and self.peek().kind == "ident" and self.peek().value == "guard"
               and self.peek(1).value == "<"):
            decl_tok = self.next()
            self.expect("<")
            path = self.parse_dotted_path()
            self.expect(">")
            gname = self.expect_ident("guard variable name")
            self.expect(";")
            guard_decls.append(GuardVarDecl(gname.value, path, decl_tok.line))
            self.guards[gname.value] = path
        stmts: list[Stmt] = []
        while not self.at("}"):
            stmts.append(self.parse_stmt())
        close = self.expect("}")
        body = Block(line=open_brace.line, stmts=stmts)
        fn = FunctionDef(rets, name.value, params, body, (start_line, close.line),
                         guard_decls)
        self.guards = {}
        return fn

    # -- statements ------------------------------------------------------------

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        if t.value == "{":
            self.next()
            stmts = []
            while not self.at("}"):
                stmts.append(self.parse_stmt())
            self.expect("}")
            return Block(line=t.line, stmts=stmts)
        if t.value == "if":
            return self.parse_if()
        if t.value == "while":
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_body_block()
            return While(line=t.line, cond=cond, body=body)
        if t.value == "return":
            return self.parse_return()
        if self.guarded and t.kind == "ident" and t.value == "drop" and self.peek(1).value == "(":
            self.next()
            self.expect("(")
            gname = self.expect_ident("guard variable")
            if gname.value not in self.guards:
                raise ParseError("drop target %r is not a guard" % gname.value,
                                 gname.line, gname.col)
            self.expect(")")
            self.expect(";")
            return DropCall(line=t.line, guard=gname.value)
        if self.guarded and t.value == "(" and self._at_target_list():
            return self.parse_call_assign()
        return self.parse_simple_stmt()

    def parse_body_block(self) -> Block:
        body = self.parse_stmt()
        if isinstance(body, Block):
            return body
        return Block(line=body.line, stmts=[body])

    def parse_if(self) -> If:
        t = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_body_block()
        orelse = None
        if self.accept("else"):
            if self.at("if"):
                nested = self.parse_if()
                orelse = Block(line=nested.line, stmts=[nested])
            else:
                orelse = self.parse_body_block()
        return If(line=t.line, cond=cond, then=then, orelse=orelse)

    def parse_return(self) -> Return:
        t = self.expect("return")
        if self.accept(";"):
            return Return(line=t.line, value=None)
        if self.guarded and self.at("("):
            save = self.pos
            self.next()
            first = self.parse_expr()
            if self.accept(","):
                items = [first]
                while True:
                    items.append(self.parse_expr())
                    if not self.accept(","):
                        break
                self.expect(")")
                self.expect(";")
                return Return(line=t.line, value=TupleExpr(items))
            self.pos = save
        value = self.parse_expr()
        self.expect(";")
        return Return(line=t.line, value=value)

    def _at_target_list(self) -> bool:
        """Lookahead: does `(` start a destructuring target list `(a, b) =`?"""
        depth = 0
        i = self.pos
        while i < len(self.toks):
            v = self.toks[i].value
            if v == "(":
                depth += 1
            elif v == ")":
                depth -= 1
                if depth == 0:
                    return i + 1 < len(self.toks) and self.toks[i + 1].value == "="
            elif v == ";" or self.toks[i].kind == "eof":
                return False
            i += 1
        return False

    def parse_call_assign(self) -> CallAssign:
        t = self.expect("(")
        targets = []
        while True:
            targets.append(self.parse_target())
            if not self.accept(","):
                break
        self.expect(")")
        self.expect("=")
        call = self.parse_expr()
        self.expect(";")
        if not isinstance(call, Call):
            raise ParseError("destructuring assignment needs a call on the right",
                             t.line, t.col)
        return CallAssign(line=t.line, targets=targets, call=call)

    def parse_target(self):
        t = self.peek()
        if t.kind == "ident" and t.value == "_":
            self.next()
            return Discard()
        e = self.parse_expr()
        if isinstance(e, GuardRef):
            return GuardTarget(e.name, e.path)
        return e

    def parse_simple_stmt(self) -> Stmt:
        t = self.peek()
        lhs = self.parse_expr()
        if self.accept("="):
            rhs = self.parse_expr()
            self.expect(";")
            if isinstance(rhs, _AcquireExpr):
                if not isinstance(lhs, GuardRef):
                    raise ParseError("acquire() must assign to a guard variable",
                                     t.line, t.col)
                return AcquireAssign(line=t.line, guard=lhs.name, path=rhs.path)
            if isinstance(lhs, GuardRef):
                if isinstance(rhs, Call):
                    return CallAssign(line=t.line,
                                      targets=[GuardTarget(lhs.name, lhs.path)], call=rhs)
                raise ParseError("a guard can only receive acquire() or a call result",
                                 t.line, t.col)
            return Assign(line=t.line, place=lhs, value=rhs)
        self.expect(";")
        if isinstance(lhs, _AcquireExpr):
            raise ParseError("acquire() result must be assigned to a guard", t.line, t.col)
        return ExprStmt(line=t.line, expr=lhs)

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        e = self.parse_add()
        while self.peek().value in _CMP_OPS and self.peek().kind == "punct":
            op = self.next().value
            e = Binary(op, e, self.parse_add())
        return e

    def parse_add(self) -> Expr:
        e = self.parse_mul()
        while self.peek().value in ("+", "-") and self.peek().kind == "punct":
            op = self.next().value
            e = Binary(op, e, self.parse_mul())
        return e

    def parse_mul(self) -> Expr:
        e = self.parse_unary()
        while self.at("*"):
            self.next()
            e = Binary("*", e, self.parse_unary())
        return e

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.value == "&":
            self.next()
            mut = False
            if self.peek().kind == "ident" and self.peek().value == "mut":
                self.next()
                mut = True
            return AddrOf(self.parse_unary(), mut)
        if t.value == "*":
            self.next()
            return Deref(self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            t = self.peek()
            if t.value == "." or t.value == "->":
                arrow = t.value == "->"
                self.next()
                fld = self.expect_ident("field name")
                if self.peek().value == "(":
                    e = self.parse_method(e, fld, arrow)
                else:
                    e = self._make_field_access(e, fld.value, arrow)
            elif t.value == "(" and isinstance(e, Var):
                e = self.parse_call(e.name)
            else:
                return e

    def _make_field_access(self, base: Expr, fld: str, arrow: bool) -> Expr:
        if isinstance(base, Deref) and isinstance(base.expr, GuardRef):
            g = base.expr
            return GuardDeref(g.name, g.path, fld)
        return FieldAccess(base, fld, arrow)

    def parse_method(self, recv: Expr, method: Token, arrow: bool) -> Expr:
        if not self.guarded:
            raise ParseError("method call syntax is not part of this dialect",
                             method.line, method.col)
        if method.value == "acquire":
            self.expect("(")
            self.expect(")")
            path = place_path(recv)
            if path is None:
                raise ParseError("acquire() receiver must be a lock place",
                                 method.line, method.col)
            return _AcquireExpr(path, method.line)
        if method.value == "get_mut":
            self.expect("(")
            self.expect(")")
            path = place_path(recv)
            if path is None:
                raise ParseError("get_mut() receiver must be a lock place",
                                 method.line, method.col)
            self.expect(".")
            fld = self.expect_ident("payload field name")
            return GetMutAccess(path, fld.value)
        raise ParseError("unknown method %r" % method.value, method.line, method.col)

    def parse_call(self, name: str) -> Call:
        self.expect("(")
        args: list[Expr] = []
        if not self.at(")"):
            while True:
                args.append(self.parse_expr())
                if not self.accept(","):
                    break
        self.expect(")")
        return Call(name, args)

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.value))
        if t.kind == "ident":
            self.next()
            if t.value in self.guards:
                return GuardRef(t.value, self.guards[t.value])
            return Var(t.value)
        if t.value == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        raise ParseError("expected an expression, found %r" % (t.value or "end of input"),
                         t.line, t.col)


# ---------------------------------------------------------------------------
# Name resolution and checking

class _Resolver:
    def __init__(self, program: Program | GuardedProgram):
        self.program = program
        self.globals: dict[str, Type] = {}
        self.structs: dict[str, StructDef] = {}
        self.functions: dict[str, FunctionDef] = {}
        self.params: dict[str, Type] = {}
        self.line = 0

    def run(self) -> None:
        p = self.program
        for s in p.structs:
            if s.name in self.structs:
                raise TypeCheckError("duplicate struct %r" % s.name, s.line)
            self.structs[s.name] = s
        for g in p.globals:
            if g.name in self.globals:
                raise TypeCheckError("duplicate global %r" % g.name, g.line)
            self.globals[g.name] = g.ty
        if isinstance(p, GuardedProgram):
            for d in p.lock_decls:
                if d.name in self.globals:
                    raise TypeCheckError("duplicate global %r" % d.name, d.line)
                if d.payload not in self.structs:
                    raise UnknownIdentifier("unknown payload struct %r" % d.payload, d.line)
                payload = self.structs[d.payload]
                for fname, _ in d.inits:
                    if payload.field_type(fname) is None:
                        raise UnknownIdentifier(
                            "payload %r has no field %r" % (d.payload, fname), d.line)
                self.globals[d.name] = Type("lock", d.payload)
        for f in p.functions:
            if f.name in self.functions or f.name in self.globals:
                raise TypeCheckError("duplicate definition of %r" % f.name, f.line_span[0])
            self.functions[f.name] = f
        for s in p.structs:
            for fd in s.fields:
                self.check_type(fd.ty, s.line)
        for g in p.globals:
            self.check_type(g.ty, g.line)
            if g.init is not None:
                self.line = g.line
                self.resolve_expr(g.init)
        for f in p.functions:
            self.resolve_function(f)

    def check_type(self, ty: Type, line: int) -> None:
        if ty.kind == "struct" and ty.name not in self.structs:
            raise UnknownIdentifier("unknown struct %r" % ty.name, line)

    def resolve_function(self, f: FunctionDef) -> None:
        self.params = {}
        for param in f.params:
            self.check_type(param.ty, f.line_span[0])
            if param.name in self.params:
                raise TypeCheckError(
                    "duplicate parameter %r in %s" % (param.name, f.name), f.line_span[0])
            self.params[param.name] = param.ty
        self.resolve_block(f.body)
        self.check_lock_api_positions(f.body)
        self.params = {}

    def check_lock_api_positions(self, block: Block) -> None:
        """Lock-API calls may only appear as standalone expression statements."""
        from .ast import calls_in, iter_stmts, stmt_exprs

        for s in iter_stmts(block):
            if isinstance(s, Block):
                continue
            standalone = s.expr if isinstance(s, ExprStmt) else None
            for e in stmt_exprs(s):
                for call in calls_in(e):
                    if call.name in LOCK_API and call is not standalone:
                        raise TypeCheckError(
                            "%s() must be a standalone statement" % call.name, s.line)

    def resolve_block(self, b: Block) -> None:
        for s in b.stmts:
            self.resolve_stmt(s)

    def resolve_stmt(self, s: Stmt) -> None:
        self.line = s.line
        if isinstance(s, Assign):
            self.resolve_expr(s.value)
            self.resolve_expr(s.place)
            self.check_assign_place(s.place, s.line)
        elif isinstance(s, ExprStmt):
            self.resolve_expr(s.expr)
        elif isinstance(s, Block):
            self.resolve_block(s)
        elif isinstance(s, If):
            self.resolve_expr(s.cond)
            self.resolve_block(s.then)
            if s.orelse is not None:
                self.resolve_block(s.orelse)
        elif isinstance(s, While):
            self.resolve_expr(s.cond)
            self.resolve_block(s.body)
        elif isinstance(s, Return):
            if s.value is not None:
                self.resolve_expr(s.value)
        elif isinstance(s, CallAssign):
            self.resolve_expr(s.call)
            for t in s.targets:
                if isinstance(t, Expr):
                    self.resolve_expr(t)
                    self.check_assign_place(t, s.line)
        elif isinstance(s, (AcquireAssign, DropCall)):
            pass
        else:
            raise TypeCheckError("unexpected statement form", s.line)

    def check_assign_place(self, e: Expr, line: int) -> None:
        if isinstance(e, (GuardDeref, GetMutAccess)):
            return
        if place_path(e) is None or isinstance(e, AddrOf):
            raise TypeCheckError("assignment target is not a place", line)
        ty = self.place_type(e)
        if ty is not None and ty.ptr == 0 and ty.kind in ("struct", "mutex", "lock"):
            raise TypeCheckError("cannot assign whole %s values" % ty.kind, line)

    def resolve_expr(self, e: Expr, fn_name_ok: bool = False) -> None:
        if isinstance(e, IntLit):
            return
        if isinstance(e, Var):
            if e.name in self.params:
                e.kind, e.ty = "param", self.params[e.name]
            elif e.name in self.globals:
                e.kind, e.ty = "global", self.globals[e.name]
            elif e.name in self.functions:
                if not fn_name_ok:
                    raise TypeCheckError(
                        "function %r used as a value" % e.name, self.line)
                e.kind = "function"
            else:
                raise UnknownIdentifier("unknown identifier %r" % e.name, self.line)
            return
        if isinstance(e, FieldAccess):
            self.resolve_expr(e.base)
            base_ty = self.place_type(e.base)
            if base_ty is None or base_ty.kind != "struct" or base_ty.ptr > 1:
                raise TypeCheckError(
                    "field access %r on a non-struct value" % e.fld, self.line)
            struct = self.structs[base_ty.name]
            fty = struct.field_type(e.fld)
            if fty is None:
                raise UnknownIdentifier(
                    "struct %r has no field %r" % (struct.name, e.fld), self.line)
            e.owner = struct.name
            e.ty = fty
            return
        if isinstance(e, AddrOf):
            self.resolve_expr(e.expr)
            if place_path(e.expr) is None:
                raise TypeCheckError("cannot take the address of a non-place", self.line)
            return
        if isinstance(e, Deref):
            self.resolve_expr(e.expr)
            inner = self.place_type(e.expr)
            if inner is not None and inner.ptr == 0:
                raise TypeCheckError("cannot dereference a non-pointer", self.line)
            return
        if isinstance(e, Binary):
            self.resolve_expr(e.lhs)
            self.resolve_expr(e.rhs)
            return
        if isinstance(e, Call):
            self.resolve_call(e)
            return
        if isinstance(e, (GuardRef, GuardDeref, GetMutAccess)):
            return
        if isinstance(e, TupleExpr):
            for item in e.items:
                self.resolve_expr(item)
            return
        raise TypeCheckError("unexpected expression form", self.line)

    def place_type(self, e: Expr) -> Type | None:
        if isinstance(e, Var):
            return e.ty
        if isinstance(e, FieldAccess):
            return e.ty
        if isinstance(e, Deref):
            inner = self.place_type(e.expr)
            if inner is not None and inner.ptr > 0:
                return inner.deref()
            return None
        if isinstance(e, AddrOf):
            inner = self.place_type(e.expr)
            if inner is not None:
                return Type(inner.kind, inner.name, inner.path, inner.ptr + 1)
            return None
        return None

    def resolve_call(self, call: Call) -> None:
        line = self.line
        if call.name in LOCK_API:
            self.resolve_lock_api(call, line)
            return
        fn = self.functions.get(call.name)
        if fn is None:
            raise UnknownIdentifier("call to undeclared function %r" % call.name, line)
        plain = [p for p in fn.params if p.ty.kind != "guard"]
        if len(call.args) != len(plain) and len(call.args) != len(fn.params):
            raise TypeCheckError(
                "%s() takes %d arguments, got %d" % (call.name, len(plain), len(call.args)),
                line)
        for a in call.args:
            self.resolve_expr(a)

    def resolve_lock_api(self, call: Call, line: int) -> None:
        if call.name in (LOCK_FN, UNLOCK_FN, INIT_FN):
            if len(call.args) != 1:
                raise TypeCheckError(
                    "%s() takes 1 argument, got %d" % (call.name, len(call.args)), line)
            arg = call.args[0]
            if not isinstance(arg, AddrOf):
                raise TypeCheckError(
                    "%s() argument is not an address-of place" % call.name, line)
            self.resolve_expr(arg)
            try:
                lock_path_of(arg, line)
            except NotALockPlace as exc:
                raise TypeCheckError(exc.message, line) from None
            return
        # pthread_create(&t, f)
        if len(call.args) != 2:
            raise TypeCheckError(
                "pthread_create() takes 2 arguments, got %d" % len(call.args), line)
        handle, entry = call.args
        if not isinstance(handle, AddrOf):
            raise TypeCheckError(
                "pthread_create() first argument is not an address-of place", line)
        self.resolve_expr(handle)
        hty = self.place_type(handle.expr)
        if hty is None or hty.kind != "thread" or hty.ptr != 0:
            raise TypeCheckError(
                "pthread_create() first argument does not denote a thread handle", line)
        if not isinstance(entry, Var):
            raise TypeCheckError(
                "pthread_create() second argument must be a bare function name", line)
        self.resolve_expr(entry, fn_name_ok=True)
        if entry.kind != "function":
            raise TypeCheckError(
                "pthread_create() second argument must name a function", line)


def parse(source: str) -> Program:
    """Parse and resolve a plain-dialect program."""
    program = _Parser(tokenize(source), guarded=False).parse_program()
    _Resolver(program).run()
    return program


def parse_guarded(source: str) -> GuardedProgram:
    """Parse and resolve a guarded-dialect program."""
    program = _Parser(tokenize(source), guarded=True).parse_program()
    if isinstance(program, Program):
        program = GuardedProgram(program.globals, [], program.structs, program.functions)
    _Resolver(program).run()
    return program
