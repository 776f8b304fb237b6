"""AST node types for the plain and guarded dialects, plus lock-path canonicalization.

Node classes use identity equality (eq=False) so they can key CFG maps;
structural comparison goes through shape(), which ignores line numbers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import NotALockPlace

KEYWORDS = frozenset(
    ["int", "struct", "void", "mutex_t", "thread_t", "if", "else", "while", "return"]
)

LOCK_FN = "pthread_mutex_lock"
UNLOCK_FN = "pthread_mutex_unlock"
INIT_FN = "pthread_mutex_init"
CREATE_FN = "pthread_create"
LOCK_API = frozenset([LOCK_FN, UNLOCK_FN, INIT_FN, CREATE_FN])


@dataclass(frozen=True, order=True)
class LockPath:
    """A canonical dotted place path; first segment is a global or a parameter."""

    segments: tuple[str, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("lock path needs at least one segment")

    @property
    def text(self) -> str:
        return ".".join(self.segments)

    @property
    def root(self) -> str:
        return self.segments[0]

    def starts_with(self, prefix: "LockPath") -> bool:
        n = len(prefix.segments)
        return len(self.segments) >= n and self.segments[:n] == prefix.segments

    def replace_prefix(self, prefix: "LockPath", repl: "LockPath") -> "LockPath":
        return LockPath(repl.segments + self.segments[len(prefix.segments):])

    def child(self, segment: str) -> "LockPath":
        return LockPath(self.segments + (segment,))

    def __str__(self) -> str:
        return self.text


def path_of(text: str) -> LockPath:
    """Build a LockPath from dotted text (test/CLI convenience)."""
    return LockPath(tuple(text.split(".")))


# ---------------------------------------------------------------------------
# Types

@dataclass(eq=False)
class Type:
    """A declared type: base kind, optional struct/payload name, pointer depth."""

    kind: str  # int | void | mutex | thread | struct | lock | guard
    name: str | None = None      # struct name, or payload struct for kind == "lock"
    path: LockPath | None = None  # lock path for kind == "guard"
    ptr: int = 0

    def deref(self) -> "Type":
        return Type(self.kind, self.name, self.path, self.ptr - 1)

    def is_mutex(self) -> bool:
        return self.kind in ("mutex", "lock") and self.ptr == 0

    def is_struct(self) -> bool:
        return self.kind == "struct" and self.ptr == 0


INT = Type("int")
VOID = Type("void")


# ---------------------------------------------------------------------------
# Expressions

@dataclass(eq=False)
class Expr:
    pass


@dataclass(eq=False)
class IntLit(Expr):
    value: int


@dataclass(eq=False)
class Var(Expr):
    name: str
    # set by the resolver: "global" | "param" | "function" | "guard"
    kind: str | None = None
    ty: Type | None = None


@dataclass(eq=False)
class FieldAccess(Expr):
    """Covers both `.` and `->`; arrow is recorded for printing only."""

    base: Expr
    fld: str
    arrow: bool = False
    owner: str | None = None  # struct name owning fld, set by the resolver
    ty: Type | None = None


@dataclass(eq=False)
class AddrOf(Expr):
    expr: Expr
    mut: bool = False


@dataclass(eq=False)
class Deref(Expr):
    expr: Expr


@dataclass(eq=False)
class Binary(Expr):
    op: str  # + - * == != < <=
    lhs: Expr
    rhs: Expr


@dataclass(eq=False)
class Call(Expr):
    name: str
    args: list[Expr]


# Guarded-dialect expressions

@dataclass(eq=False)
class GuardRef(Expr):
    """A guard variable used as a value (call argument or return)."""

    name: str
    path: LockPath


@dataclass(eq=False)
class GuardDeref(Expr):
    """Payload field access through an owned guard: (*m_guard).n"""

    guard: str
    path: LockPath
    fld: str


@dataclass(eq=False)
class GetMutAccess(Expr):
    """Unguarded payload field access on the lock itself: m.get_mut().n"""

    path: LockPath
    fld: str


@dataclass(eq=False)
class TupleExpr(Expr):
    items: list[Expr]


# ---------------------------------------------------------------------------
# Statements

@dataclass(eq=False)
class Stmt:
    line: int = 0


@dataclass(eq=False)
class Assign(Stmt):
    place: Expr = None  # type: ignore[assignment]
    value: Expr = None  # type: ignore[assignment]


@dataclass(eq=False)
class ExprStmt(Stmt):
    expr: Expr = None  # type: ignore[assignment]


@dataclass(eq=False)
class Block(Stmt):
    stmts: list[Stmt] = field(default_factory=list)


@dataclass(eq=False)
class If(Stmt):
    cond: Expr = None  # type: ignore[assignment]
    then: Block = None  # type: ignore[assignment]
    orelse: Block | None = None


@dataclass(eq=False)
class While(Stmt):
    cond: Expr = None  # type: ignore[assignment]
    body: Block = None  # type: ignore[assignment]


@dataclass(eq=False)
class Return(Stmt):
    value: Expr | None = None


# Guarded-dialect statements

@dataclass(eq=False)
class AcquireAssign(Stmt):
    guard: str = ""
    path: LockPath = None  # type: ignore[assignment]


@dataclass(eq=False)
class DropCall(Stmt):
    guard: str = ""


@dataclass(eq=False)
class Discard:
    """The `_` slot in a destructuring call assignment."""


@dataclass(eq=False)
class GuardTarget:
    name: str
    path: LockPath


@dataclass(eq=False)
class CallAssign(Stmt):
    """Destructuring call: (x, m_guard) = g(...); targets are places, guards, or _."""

    targets: list = field(default_factory=list)
    call: Call = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# Declarations

@dataclass(eq=False)
class GlobalDecl:
    ty: Type
    name: str
    init: Expr | None
    line: int


@dataclass(eq=False)
class FieldDecl:
    ty: Type
    name: str


@dataclass(eq=False)
class StructDef:
    name: str
    fields: list[FieldDecl]
    line: int

    def field_type(self, name: str) -> Type | None:
        for f in self.fields:
            if f.name == name:
                return f.ty
        return None


@dataclass(eq=False)
class Param:
    ty: Type
    name: str


@dataclass(eq=False)
class GuardVarDecl:
    guard: str
    path: LockPath
    line: int


@dataclass(eq=False)
class LockDecl:
    """A data-owning lock global: mutex<Payload> name = Payload { f = init, ... };"""

    name: str
    payload: str
    inits: list[tuple[str, Expr | None]]
    line: int


@dataclass(eq=False)
class FunctionDef:
    rets: tuple[Type, ...]
    name: str
    params: list[Param]
    body: Block
    line_span: tuple[int, int]
    guard_decls: list[GuardVarDecl] = field(default_factory=list)

    @property
    def param_names(self) -> list[str]:
        return [p.name for p in self.params]

    def param(self, name: str) -> Param | None:
        for p in self.params:
            if p.name == name:
                return p
        return None


def _function_index(obj) -> dict:
    """Lazy name index; rebuilt if the function list changed size."""
    index = obj.__dict__.get("_fn_index")
    if index is None or len(index) != len(obj.functions):
        index = {f.name: f for f in obj.functions}
        obj.__dict__["_fn_index"] = index
    return index


@dataclass(eq=False)
class Program:
    globals: list[GlobalDecl]
    structs: list[StructDef]
    functions: list[FunctionDef]

    def function(self, name: str) -> FunctionDef | None:
        return _function_index(self).get(name)

    def global_decl(self, name: str) -> GlobalDecl | None:
        for g in self.globals:
            if g.name == name:
                return g
        return None

    def struct(self, name: str) -> StructDef | None:
        for s in self.structs:
            if s.name == name:
                return s
        return None


@dataclass(eq=False)
class GuardedProgram:
    globals: list[GlobalDecl]
    lock_decls: list[LockDecl]
    structs: list[StructDef]
    functions: list[FunctionDef]

    def function(self, name: str) -> FunctionDef | None:
        return _function_index(self).get(name)

    def struct(self, name: str) -> StructDef | None:
        for s in self.structs:
            if s.name == name:
                return s
        return None

    def lock_decl(self, name: str) -> LockDecl | None:
        for d in self.lock_decls:
            if d.name == name:
                return d
        return None


# ---------------------------------------------------------------------------
# Place paths and lock-path canonicalization

def place_path(e: Expr) -> LockPath | None:
    """Canonical dotted path of a place expression, or None if e is not a place.

    Strips `&`, `&mut`, `*`, and treats `->` like `.`, so `&mut (*a).m`,
    `&a->m`, and `a.m` all canonicalize to a.m.
    """
    segs: list[str] = []
    while True:
        if isinstance(e, (AddrOf, Deref)):
            e = e.expr
        elif isinstance(e, FieldAccess):
            segs.append(e.fld)
            e = e.base
        elif isinstance(e, Var):
            segs.append(e.name)
            return LockPath(tuple(reversed(segs)))
        else:
            return None


def lock_path_of(arg: Expr, line: int = 0) -> LockPath:
    """Canonical LockPath of a lock-API argument.

    The argument must be `&p` or `&mut p` where p is a mutex-typed place on a
    resolved AST; anything else raises NotALockPlace.
    """
    if not isinstance(arg, AddrOf):
        raise NotALockPlace("lock-API argument is not an address-of place", line)
    path = place_path(arg.expr)
    if path is None:
        raise NotALockPlace("lock-API argument is not a place", line)
    ty = expr_type(arg.expr)
    if ty is not None and not ty.is_mutex():
        raise NotALockPlace("lock-API argument does not denote a mutex", line)
    return path


def expr_type(e: Expr) -> Type | None:
    """Resolved type of a place expression, if the resolver annotated it."""
    if isinstance(e, Var):
        return e.ty
    if isinstance(e, FieldAccess):
        return e.ty
    if isinstance(e, Deref):
        inner = expr_type(e.expr)
        if inner is not None and inner.ptr > 0:
            return inner.deref()
        return None
    return None


def calls_in(e: Expr) -> list[Call]:
    """All calls syntactically inside e, in evaluation order (arguments first)."""
    out: list[Call] = []
    _collect_calls(e, out)
    return out


def _collect_calls(e: Expr, out: list[Call]) -> None:
    if isinstance(e, Call):
        for a in e.args:
            _collect_calls(a, out)
        out.append(e)
    elif isinstance(e, Binary):
        _collect_calls(e.lhs, out)
        _collect_calls(e.rhs, out)
    elif isinstance(e, (AddrOf, Deref)):
        _collect_calls(e.expr, out)
    elif isinstance(e, FieldAccess):
        _collect_calls(e.base, out)
    elif isinstance(e, TupleExpr):
        for item in e.items:
            _collect_calls(item, out)


def iter_stmts(block: "Block"):
    """All statements under a block, outer-first, textual order."""
    for s in block.stmts:
        yield s
        if isinstance(s, Block):
            yield from iter_stmts(s)
        elif isinstance(s, If):
            yield from iter_stmts(s.then)
            if s.orelse is not None:
                yield from iter_stmts(s.orelse)
        elif isinstance(s, While):
            yield from iter_stmts(s.body)


def stmt_exprs(s: Stmt) -> list[Expr]:
    """The expressions evaluated by s itself (not by nested statements)."""
    if isinstance(s, Assign):
        return [s.value, s.place]
    if isinstance(s, ExprStmt):
        return [s.expr]
    if isinstance(s, (If, While)):
        return [s.cond]
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, CallAssign):
        return [s.call]
    return []


# ---------------------------------------------------------------------------
# Structural shapes (equality modulo line numbers and annotations)

def type_shape(t: Type | None):
    if t is None:
        return None
    return (t.kind, t.name, t.path.text if t.path else None, t.ptr)


def expr_shape(e: Expr | None):
    if e is None:
        return None
    if isinstance(e, IntLit):
        return ("int", e.value)
    if isinstance(e, Var):
        return ("var", e.name)
    if isinstance(e, FieldAccess):
        return ("field", expr_shape(e.base), e.fld)
    if isinstance(e, AddrOf):
        return ("addrof", expr_shape(e.expr))
    if isinstance(e, Deref):
        return ("deref", expr_shape(e.expr))
    if isinstance(e, Binary):
        return ("bin", e.op, expr_shape(e.lhs), expr_shape(e.rhs))
    if isinstance(e, Call):
        return ("call", e.name, tuple(expr_shape(a) for a in e.args))
    if isinstance(e, GuardRef):
        return ("guardref", e.name)
    if isinstance(e, GuardDeref):
        return ("guardderef", e.guard, e.fld)
    if isinstance(e, GetMutAccess):
        return ("getmut", e.path.text, e.fld)
    if isinstance(e, TupleExpr):
        return ("tuple", tuple(expr_shape(i) for i in e.items))
    raise TypeError("unshapeable expr %r" % e)


def stmt_shape(s: Stmt):
    if isinstance(s, Assign):
        return ("assign", expr_shape(s.place), expr_shape(s.value))
    if isinstance(s, ExprStmt):
        return ("expr", expr_shape(s.expr))
    if isinstance(s, Block):
        return ("block", tuple(stmt_shape(c) for c in s.stmts))
    if isinstance(s, If):
        return (
            "if",
            expr_shape(s.cond),
            stmt_shape(s.then),
            stmt_shape(s.orelse) if s.orelse else None,
        )
    if isinstance(s, While):
        return ("while", expr_shape(s.cond), stmt_shape(s.body))
    if isinstance(s, Return):
        return ("return", expr_shape(s.value))
    if isinstance(s, AcquireAssign):
        return ("acquire", s.guard, s.path.text)
    if isinstance(s, DropCall):
        return ("drop", s.guard)
    if isinstance(s, CallAssign):
        tgts = tuple(
            "_" if isinstance(t, Discard)
            else ("g", t.name) if isinstance(t, GuardTarget)
            else expr_shape(t)
            for t in s.targets
        )
        return ("callassign", tgts, expr_shape(s.call))
    raise TypeError("unshapeable stmt %r" % s)


def function_shape(f: FunctionDef):
    return (
        "fn",
        f.name,
        tuple(type_shape(t) for t in f.rets),
        tuple((type_shape(p.ty), p.name) for p in f.params),
        tuple((d.guard, d.path.text) for d in f.guard_decls),
        stmt_shape(f.body),
    )


def program_shape(p: Program | GuardedProgram):
    globals_shape = tuple(
        (type_shape(g.ty), g.name, expr_shape(g.init)) for g in p.globals
    )
    structs_shape = tuple(
        (s.name, tuple((type_shape(f.ty), f.name) for f in s.fields)) for s in p.structs
    )
    locks_shape = ()
    if isinstance(p, GuardedProgram):
        locks_shape = tuple(
            (d.name, d.payload, tuple((n, expr_shape(e)) for n, e in d.inits))
            for d in p.lock_decls
        )
    return (
        globals_shape,
        locks_shape,
        structs_shape,
        tuple(function_shape(f) for f in p.functions),
    )
