"""Call graph construction and SCC condensation.

Edges only target user-defined callees; the four pthread API names are library
functions, and the function passed to pthread_create seeds the thread-entry set
instead of adding an edge. The condensation is emitted in post-order (callees
before callers), which the lock-set analysis consumes directly.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .ast import (
    CREATE_FN,
    LOCK_API,
    Block,
    Call,
    FunctionDef,
    Program,
    Stmt,
    Var,
    calls_in,
    iter_stmts,
    stmt_exprs,
)
from .diagnostics import Diagnostics


@dataclass
class CallGraph:
    nodes: list[str]
    edges: dict[str, list[str]]
    merged_nodes: list[list[str]] = field(default_factory=list)
    merged_edges: dict[int, list[int]] = field(default_factory=dict)
    post_order: list[int] = field(default_factory=list)
    scc_index: dict[str, int] = field(default_factory=dict)

    def callers_of(self, name: str) -> list[str]:
        return [f for f in self.nodes if name in self.edges[f]]

    def is_recursive_scc(self, idx: int) -> bool:
        members = self.merged_nodes[idx]
        if len(members) > 1:
            return True
        only = members[0]
        return only in self.edges[only]

    def reachable_from(self, roots: list[str]) -> set[str]:
        seen = set(r for r in roots if r in self.edges)
        work = deque(seen)
        while work:
            f = work.popleft()
            for g in self.edges[f]:
                if g not in seen:
                    seen.add(g)
                    work.append(g)
        return seen


def function_calls(fn: FunctionDef) -> list[tuple[Stmt, Call]]:
    """Every call in fn paired with its enclosing statement, in program order."""
    out: list[tuple[Stmt, Call]] = []
    for s in iter_stmts(fn.body):
        if isinstance(s, Block):
            continue
        for e in stmt_exprs(s):
            for c in calls_in(e):
                out.append((s, c))
    return out


def thread_entries(program) -> list[str]:
    """Function names passed to pthread_create, in first-spawn order."""
    out: list[str] = []
    for fn in program.functions:
        for _, call in function_calls(fn):
            if call.name == CREATE_FN and len(call.args) == 2:
                entry = call.args[1]
                if isinstance(entry, Var) and entry.name not in out:
                    out.append(entry.name)
    return out


def build_call_graph(program: Program, diags: Diagnostics | None = None) -> CallGraph:
    defined = {f.name for f in program.functions}
    nodes = [f.name for f in program.functions]
    edges: dict[str, list[str]] = {n: [] for n in nodes}
    for fn in program.functions:
        for stmt, call in function_calls(fn):
            if call.name in LOCK_API:
                continue
            if call.name not in defined:
                if diags is not None:
                    diags.warn("call to undeclared function %r ignored" % call.name,
                               function=fn.name, line=stmt.line)
                continue
            if call.name not in edges[fn.name]:
                edges[fn.name].append(call.name)
    cg = CallGraph(nodes, edges)
    _condense(cg)
    return cg


def _condense(cg: CallGraph) -> None:
    """Iterative Tarjan; SCC emission order is already callees-before-callers."""
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    sccs: list[list[str]] = []

    for root in cg.nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            node, ei = work[-1]
            if ei == 0:
                index[node] = lowlink[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            targets = cg.edges[node]
            while ei < len(targets):
                t = targets[ei]
                ei += 1
                if t not in index:
                    work[-1] = (node, ei)
                    work.append((t, 0))
                    advanced = True
                    break
                if t in on_stack:
                    lowlink[node] = min(lowlink[node], index[t])
            if advanced:
                continue
            work.pop()
            if lowlink[node] == index[node]:
                members = []
                while True:
                    m = stack.pop()
                    on_stack.discard(m)
                    members.append(m)
                    if m == node:
                        break
                members.reverse()
                sccs.append(members)
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])

    cg.merged_nodes = sccs
    cg.scc_index = {name: i for i, scc in enumerate(sccs) for name in scc}
    merged: dict[int, list[int]] = {i: [] for i in range(len(sccs))}
    for f in cg.nodes:
        fi = cg.scc_index[f]
        for g in cg.edges[f]:
            gi = cg.scc_index[g]
            if gi != fi and gi not in merged[fi]:
                merged[fi].append(gi)
    for i in merged:
        merged[i].sort()
    cg.merged_edges = merged
    cg.post_order = list(range(len(sccs)))


def callgraph_to_dot(cg: CallGraph) -> str:
    out = ["digraph calls {"]
    for n in cg.nodes:
        out.append('    "%s";' % n)
    for n in cg.nodes:
        for t in cg.edges[n]:
            out.append('    "%s" -> "%s";' % (n, t))
    out.append("}")
    return "\n".join(out) + "\n"


def merged_callgraph_to_dot(cg: CallGraph) -> str:
    out = ["digraph calls_merged {"]
    for i, members in enumerate(cg.merged_nodes):
        label = "{%s}" % ", ".join(members)
        out.append('    scc%d [label="%s"];' % (i, label))
    for i in range(len(cg.merged_nodes)):
        for j in cg.merged_edges[i]:
            out.append("    scc%d -> scc%d;" % (i, j))
    out.append("}")
    return "\n".join(out) + "\n"
