"""Summary-driven rewrite of a program into the guarded dialect.

Locks absorb the data they protect: protected globals move into a payload
struct owned by the lock declaration, protected struct fields move into a
payload struct owned by the lock field. Lock and unlock calls become guard
acquisition and drop, accesses go through a guard where one is held (per
lock_line) and through get_mut elsewhere, and functions with entry or return
locks exchange guards through parameters and return values.

Functions invoked from outside the program (main and thread entry points)
keep their original signatures; nobody exists to hand them a guard. Their
lock use must balance internally or the ownership checker rejects the
result.
"""
from __future__ import annotations

from collections import Counter

from .ast import (
    AcquireAssign,
    AddrOf,
    Assign,
    Binary,
    Block,
    CREATE_FN,
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
    INIT_FN,
    If,
    IntLit,
    LOCK_FN,
    LockDecl,
    LockPath,
    Param,
    Program,
    Return,
    Stmt,
    StructDef,
    TupleExpr,
    Type,
    UNLOCK_FN,
    Var,
    While,
    calls_in,
    iter_stmts,
    lock_path_of,
    path_of,
    place_path,
    stmt_exprs,
)
from .callgraph import thread_entries
from .diagnostics import (
    Diagnostics,
    SchemaError,
    SummaryMismatch,
    UnaliasableArgument,
)
from .flowanalysis import alias
from .summary import LockSummary, validate_against_program


def guard_name_for(path: LockPath) -> str:
    """m -> m_guard, x.m -> x_m_guard."""
    return "_".join(path.segments) + "_guard"


class _GuardNames:
    """Per-function path -> guard variable name, collision-free."""

    def __init__(self, reserved: set[str], diags: Diagnostics, fn_name: str):
        self.names: dict[LockPath, str] = {}
        self.taken = set(reserved)
        self.diags = diags
        self.fn_name = fn_name

    def register(self, path: LockPath) -> str:
        if path in self.names:
            return self.names[path]
        base = guard_name_for(path)
        name = base
        k = 2
        while name in self.taken:
            name = "%s%d" % (base, k)
            k += 1
        if name != base:
            self.diags.warn(
                "guard name %s for %s collides; renamed %s" % (base, path.text, name),
                function=self.fn_name)
        self.names[path] = name
        self.taken.add(name)
        return name


class _Transformer:
    def __init__(self, p: Program, s: LockSummary, diags: Diagnostics):
        self.p = p
        self.s = s
        self.diags = diags
        self.external = {"main"} | set(thread_entries(p))
        self.entry_paths: dict[str, list[LockPath]] = {}
        self.ret_paths: dict[str, list[LockPath]] = {}
        for fn in p.functions:
            fs = s.function(fn.name)
            if fn.name in self.external:
                self.entry_paths[fn.name] = []
                self.ret_paths[fn.name] = []
                if fs.entry_lock or fs.return_lock:
                    diags.warn(
                        "%s is invoked from outside; entry/return guards stay "
                        "local instead of changing its signature" % fn.name,
                        function=fn.name)
            else:
                self.entry_paths[fn.name] = [path_of(t) for t in fs.entry_lock]
                self.ret_paths[fn.name] = [path_of(t) for t in fs.return_lock]
        self.reserved = ({g.name for g in p.globals}
                         | {f.name for f in p.functions}
                         | {sd.name for sd in p.structs})

    # -- declarations -------------------------------------------------------

    def _fresh_struct_name(self, base: str, taken: set[str]) -> str:
        name = base
        k = 2
        while name in taken:
            name = "%s%d" % (base, k)
            k += 1
        if name != base:
            self.diags.warn("payload struct name %s taken; using %s" % (base, name))
        taken.add(name)
        return name

    def _build_decls(self):
        taken = {sd.name for sd in self.p.structs}
        by_lock: dict[str, list[GlobalDecl]] = {}
        for g in self.p.globals:
            lock = self.s.global_lock_map.get(g.name)
            if lock is not None:
                by_lock.setdefault(lock, []).append(g)
        self.global_payloads: list[StructDef] = []
        self.lock_decls: list[LockDecl] = []
        for lock, datums in by_lock.items():
            payload = self._fresh_struct_name(lock + "Data", taken)
            fields = [FieldDecl(d.ty, d.name) for d in datums]
            self.global_payloads.append(StructDef(payload, fields, datums[0].line))
            inits = [(d.name, d.init if d.init is not None else IntLit(0))
                     for d in datums]
            self.lock_decls.append(
                LockDecl(lock, payload, inits, self.p.global_decl(lock).line))

        removed = set(self.s.global_lock_map) | set(by_lock)
        self.globals_out = [g for g in self.p.globals if g.name not in removed]

        self.structs_out: list[StructDef] = list(self.global_payloads)
        for sd in self.p.structs:
            fmap = self.s.struct_lock_map.get(sd.name)
            if not fmap:
                self.structs_out.append(sd)
                continue
            by_field: dict[str, list[FieldDecl]] = {}
            for f in sd.fields:
                lock = fmap.get(f.name)
                if lock is not None:
                    by_field.setdefault(lock, []).append(f)
            remaining: list[FieldDecl] = []
            payloads: list[StructDef] = []
            for f in sd.fields:
                if f.name in fmap:
                    continue
                if f.name in by_field:
                    payload = self._fresh_struct_name(sd.name + f.name + "Data", taken)
                    pfields = [FieldDecl(pf.ty, pf.name) for pf in by_field[f.name]]
                    payloads.append(StructDef(payload, pfields, sd.line))
                    remaining.append(FieldDecl(Type("lock", name=payload), f.name))
                else:
                    remaining.append(f)
            self.structs_out.extend(payloads)
            self.structs_out.append(StructDef(sd.name, remaining, sd.line))

    # -- functions ----------------------------------------------------------

    def run(self) -> GuardedProgram:
        self._build_decls()
        functions = [self._transform_function(fn) for fn in self.p.functions]
        return GuardedProgram(self.globals_out, self.lock_decls,
                              self.structs_out, functions)

    def _candidate_paths(self, fn: FunctionDef) -> set[LockPath]:
        paths = set(self._entry) | set(self._rets) | set(self._lock_line)
        for st in iter_stmts(fn.body):
            for e in stmt_exprs(st):
                for c in calls_in(e):
                    if c.name in (LOCK_FN, UNLOCK_FN):
                        paths.add(lock_path_of(c.args[0], st.line))
                    elif c.name in (INIT_FN, CREATE_FN):
                        continue
                    elif self.p.function(c.name) is not None:
                        callee_params = self.p.function(c.name).param_names
                        for q in (self.entry_paths[c.name] + self.ret_paths[c.name]):
                            try:
                                paths.add(alias(q, callee_params, c.args))
                            except UnaliasableArgument:
                                pass
        return paths

    def _transform_function(self, fn: FunctionDef) -> FunctionDef:
        fs = self.s.function(fn.name)
        self._fn = fn
        self._entry = self.entry_paths[fn.name]
        self._rets = self.ret_paths[fn.name]
        self._nonvoid = fn.rets[0].kind != "void"
        self._lock_line = {path_of(t): set(lines)
                           for t, lines in fs.lock_line.items()}
        self._names = _GuardNames(self.reserved | set(fn.param_names),
                                  self.diags, fn.name)
        self._used: set[str] = set()
        for path in sorted(self._candidate_paths(fn)):
            self._names.register(path)

        body = self._rewrite_block(fn.body)
        if self._rets and (not body.stmts or not isinstance(body.stmts[-1], Return)):
            body.stmts.append(self._make_return(None, fn.line_span[1]))

        param_guards = {self._names.register(q) for q in self._entry}
        self._used |= param_guards
        params = list(fn.params) + [
            Param(Type("guard", path=q), self._names.register(q))
            for q in self._entry]
        if self._rets:
            guard_types = tuple(Type("guard", path=q) for q in self._rets)
            rets = (fn.rets if self._nonvoid else ()) + guard_types
        else:
            rets = fn.rets
        decls = [GuardVarDecl(name, path, fn.line_span[0])
                 for path, name in sorted(self._names.names.items())
                 if name in self._used and name not in param_guards]
        return FunctionDef(rets, fn.name, params, body, fn.line_span, decls)

    def _guard(self, path: LockPath) -> str:
        name = self._names.register(path)
        self._used.add(name)
        return name

    # -- statements ---------------------------------------------------------

    def _rewrite_block(self, b: Block) -> Block:
        out: list[Stmt] = []
        for st in b.stmts:
            out.extend(self._rewrite_stmt(st))
        return Block(line=b.line, stmts=out)

    def _rewrite_stmt(self, st: Stmt) -> list[Stmt]:
        if isinstance(st, Block):
            return [self._rewrite_block(st)]
        if isinstance(st, If):
            return [If(line=st.line, cond=self._rewrite_expr(st.cond, st.line),
                       then=self._rewrite_block(st.then),
                       orelse=self._rewrite_block(st.orelse) if st.orelse else None)]
        if isinstance(st, While):
            return [While(line=st.line, cond=self._rewrite_expr(st.cond, st.line),
                          body=self._rewrite_block(st.body))]
        if isinstance(st, Return):
            value = self._rewrite_expr(st.value, st.line) if st.value else None
            return [self._make_return(value, st.line)]
        if isinstance(st, ExprStmt) and isinstance(st.expr, Call):
            return self._rewrite_call_stmt(st)
        if isinstance(st, Assign):
            return [self._rewrite_assign(st)]
        if isinstance(st, ExprStmt):
            return [ExprStmt(line=st.line, expr=self._rewrite_expr(st.expr, st.line))]
        return [st]

    def _rewrite_call_stmt(self, st: ExprStmt) -> list[Stmt]:
        c = st.expr
        if c.name == INIT_FN:
            return []
        if c.name == LOCK_FN:
            path = lock_path_of(c.args[0], st.line)
            return [AcquireAssign(line=st.line, guard=self._guard(path), path=path)]
        if c.name == UNLOCK_FN:
            path = lock_path_of(c.args[0], st.line)
            return [DropCall(line=st.line, guard=self._guard(path))]
        if c.name == CREATE_FN:
            return [st]
        callee = self.p.function(c.name)
        if callee is None:
            return [ExprStmt(line=st.line, expr=self._rewrite_expr(c, st.line))]
        call = self._thread_call(c, st.line)
        ret_qs = self._callee_ret_guards(c, st.line)
        if not ret_qs:
            return [ExprStmt(line=st.line, expr=call)]
        targets: list = []
        if callee.rets[0].kind != "void":
            targets.append(Discard())
        targets.extend(GuardTarget(self._guard(p), p) for p in ret_qs)
        return [CallAssign(line=st.line, targets=targets, call=call)]

    def _rewrite_assign(self, st: Assign) -> Stmt:
        value = st.value
        place = self._rewrite_expr(st.place, st.line)
        if isinstance(value, Call) and self.p.function(value.name) is not None:
            ret_qs = self._callee_ret_guards(value, st.line)
            if ret_qs:
                call = self._thread_call(value, st.line)
                targets: list = [place]
                targets.extend(GuardTarget(self._guard(p), p) for p in ret_qs)
                return CallAssign(line=st.line, targets=targets, call=call)
        return Assign(line=st.line, place=place,
                      value=self._rewrite_expr(st.value, st.line))

    def _callee_ret_guards(self, c: Call, line: int) -> list[LockPath]:
        """Caller-side paths of the guards a call hands back."""
        out = []
        for q in self.ret_paths[c.name]:
            try:
                out.append(alias(q, self.p.function(c.name).param_names, c.args))
            except UnaliasableArgument as exc:
                self.diags.warn(
                    "returned guard dropped at call to %s: %s" % (c.name, exc),
                    function=self._fn.name, line=line)
        return out

    def _thread_call(self, c: Call, line: int) -> Call:
        args = [self._rewrite_expr(a, line) for a in c.args]
        callee_params = self.p.function(c.name).param_names
        for q in self.entry_paths[c.name]:
            try:
                caller_path = alias(q, callee_params, c.args)
            except UnaliasableArgument as exc:
                self.diags.warn(
                    "guard argument dropped at call to %s: %s" % (c.name, exc),
                    function=self._fn.name, line=line)
                continue
            args.append(GuardRef(self._guard(caller_path), caller_path))
        return Call(c.name, args)

    def _make_return(self, value: Expr | None, line: int) -> Return:
        parts: list[Expr] = []
        if self._nonvoid:
            if value is None:
                value = IntLit(0)
                self.diags.warn(
                    "fall-through return in %s yields 0 alongside its guards"
                    % self._fn.name, function=self._fn.name, line=line)
            parts.append(value)
        elif value is not None:
            parts.append(value)
        parts.extend(GuardRef(self._guard(q), q) for q in self._rets)
        if not parts:
            return Return(line=line, value=None)
        if len(parts) == 1:
            return Return(line=line, value=parts[0])
        return Return(line=line, value=TupleExpr(parts))

    # -- expressions --------------------------------------------------------

    def _rewrite_expr(self, e: Expr, line: int) -> Expr:
        if isinstance(e, Var):
            if e.kind == "global":
                lock = self.s.global_lock_map.get(e.name)
                if lock is not None:
                    lock_path = LockPath((lock,))
                    if line in self._lock_line.get(lock_path, ()):
                        return GuardDeref(self._guard(lock_path), lock_path, e.name)
                    return GetMutAccess(lock_path, e.name)
            return e
        if isinstance(e, FieldAccess):
            fmap = self.s.struct_lock_map.get(e.owner or "", {})
            if e.fld in fmap:
                base = place_path(e.base)
                if base is not None:
                    lock_path = base.child(fmap[e.fld])
                    if line in self._lock_line.get(lock_path, ()):
                        return GuardDeref(self._guard(lock_path), lock_path, e.fld)
                    return GetMutAccess(lock_path, e.fld)
            return FieldAccess(self._rewrite_expr(e.base, line), e.fld,
                               arrow=e.arrow, owner=e.owner, ty=e.ty)
        if isinstance(e, AddrOf):
            return AddrOf(self._rewrite_expr(e.expr, line), e.mut)
        if isinstance(e, Deref):
            return Deref(self._rewrite_expr(e.expr, line))
        if isinstance(e, Binary):
            return Binary(e.op, self._rewrite_expr(e.lhs, line),
                          self._rewrite_expr(e.rhs, line))
        if isinstance(e, Call):
            if (self.p.function(e.name) is not None
                    and (self.entry_paths[e.name] or self.ret_paths[e.name])):
                self.diags.warn(
                    "call to %s inside an expression cannot thread guards; "
                    "left unchanged" % e.name,
                    function=self._fn.name, line=line)
            return Call(e.name, [self._rewrite_expr(a, line) for a in e.args])
        return e


def transform(p: Program, s: LockSummary,
              diags: Diagnostics | None = None) -> GuardedProgram:
    """Apply the summary to the program. The summary must describe p."""
    try:
        validate_against_program(s, p)
    except SchemaError as exc:
        raise SummaryMismatch(str(exc)) from None
    if diags is None:
        diags = Diagnostics()
    return _Transformer(p, s, diags).run()


# ---------------------------------------------------------------------------
# Access bookkeeping, used to check the transformation preserves accesses.

def access_multiset(p: Program | GuardedProgram) -> Counter:
    """Multiset of (line, kind, datum) for every data access in p.

    Datum is the dotted place text of the accessed global or field; guard
    and get_mut accesses map back to the datum they reach. Address
    computations (operands of &, bases of field accesses) touch nothing.
    """
    acc: Counter = Counter()

    def datum_through_lock(path: LockPath, fld: str) -> str:
        return ".".join(path.segments[:-1] + (fld,))

    def visit(e: Expr, line: int, kind: str = "read", as_address: bool = False):
        if isinstance(e, Var):
            if (not as_address and e.kind == "global" and e.ty is not None
                    and e.ty.kind not in ("mutex", "lock")):
                acc[(line, kind, e.name)] += 1
        elif isinstance(e, FieldAccess):
            if (not as_address and e.owner is not None and e.ty is not None
                    and e.ty.kind not in ("mutex", "lock")):
                base = place_path(e.base)
                if base is not None:
                    acc[(line, kind, base.child(e.fld).text)] += 1
            visit(e.base, line, "read", as_address=True)
        elif isinstance(e, GuardDeref):
            acc[(line, kind, datum_through_lock(e.path, e.fld))] += 1
        elif isinstance(e, GetMutAccess):
            acc[(line, kind, datum_through_lock(e.path, e.fld))] += 1
        elif isinstance(e, AddrOf):
            visit(e.expr, line, "read", as_address=True)
        elif isinstance(e, Deref):
            visit(e.expr, line, kind, as_address)
        elif isinstance(e, Binary):
            visit(e.lhs, line, "read")
            visit(e.rhs, line, "read")
        elif isinstance(e, Call):
            for a in e.args:
                visit(a, line, "read")
        elif isinstance(e, TupleExpr):
            for item in e.items:
                visit(item, line, "read")

    def visit_stmt(s: Stmt):
        if isinstance(s, Assign):
            visit(s.place, s.line, "write")
            visit(s.value, s.line, "read")
        elif isinstance(s, ExprStmt):
            visit(s.expr, s.line, "read")
        elif isinstance(s, (If, While)):
            visit(s.cond, s.line, "read")
        elif isinstance(s, Return):
            if s.value is not None:
                visit(s.value, s.line, "read")
        elif isinstance(s, CallAssign):
            for t in s.targets:
                if isinstance(t, Expr):
                    visit(t, s.line, "write")
            visit(s.call, s.line, "read")

    for fn in p.functions:
        for s in iter_stmts(fn.body):
            visit_stmt(s)
    return acc
