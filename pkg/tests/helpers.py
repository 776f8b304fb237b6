"""Shared fixtures: verified flow-analysis cases, fixture loading, and the
random program generator used by the property and oracle tests."""
from __future__ import annotations

import random
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


def corpus_paths() -> list[Path]:
    return sorted(CORPUS.glob("*.mc"))


# Hand-checked entry/return lock sets. Each case is
# (name, source, {function: (sorted MELS texts, sorted MRLS texts)}).

STRAIGHT_UNLOCK = """\
int n;
mutex_t m;
void f() {
    pthread_mutex_unlock(&m);
}
"""

BRANCH_UNLOCK = """\
int c;
mutex_t m;
void f() {
    if (c) {
        pthread_mutex_unlock(&m);
    }
}
"""

STRAIGHT_LOCK = """\
int n;
mutex_t m;
void f() {
    pthread_mutex_lock(&m);
}
"""

BRANCH_LOCK = """\
int c;
mutex_t m;
void f() {
    if (c) {
        pthread_mutex_lock(&m);
    }
}
"""

UNLOCK_RELOCK = """\
int c;
mutex_t m;
void f() {
    if (c) {
        pthread_mutex_unlock(&m);
        c = c + 1;
        pthread_mutex_lock(&m);
    }
}
"""

CHAINED_UNLOCK = """\
mutex_t m;
void release() {
    pthread_mutex_unlock(&m);
}
void f() {
    release();
}
"""

POINTER_ALIAS = """\
struct s { int n; mutex_t m; };
void release(struct s *a) {
    pthread_mutex_unlock(&a->m);
}
void cycle(struct s *b) {
    pthread_mutex_lock(&b->m);
    release(b);
}
"""

RECURSIVE_UNLOCK = """\
mutex_t m;
void rec(int k) {
    if (k <= 0) {
        pthread_mutex_unlock(&m);
    } else {
        rec(k - 1);
    }
}
"""

RECURSIVE_LOCK = """\
mutex_t m;
void rec(int k) {
    if (k <= 0) {
        pthread_mutex_lock(&m);
    } else {
        rec(k - 1);
    }
}
"""

FLOW_CASES = [
    ("straight_unlock", STRAIGHT_UNLOCK, {"f": (["m"], [])}),
    ("branch_unlock", BRANCH_UNLOCK, {"f": (["m"], [])}),
    ("straight_lock", STRAIGHT_LOCK, {"f": ([], ["m"])}),
    ("branch_lock", BRANCH_LOCK, {"f": ([], [])}),
    ("unlock_relock", UNLOCK_RELOCK, {"f": (["m"], ["m"])}),
    ("chained_unlock", CHAINED_UNLOCK, {"release": (["m"], []), "f": (["m"], [])}),
    ("pointer_alias", POINTER_ALIAS, {"release": (["a.m"], []), "cycle": ([], [])}),
    ("recursive_unlock", RECURSIVE_UNLOCK, {"rec": (["m"], [])}),
    ("recursive_lock", RECURSIVE_LOCK, {"rec": ([], ["m"])}),
]

# The caller-provides pattern: inc never touches the lock itself, but every
# caller enters it holding m, so propagation assigns entry {m} / return {m}.
CALLER_PROVIDES = """\
int n;
mutex_t m;
void inc() {
    n = n + 1;
}
void safe_inc() {
    pthread_mutex_lock(&m);
    inc();
    pthread_mutex_unlock(&m);
}
void main() {
    safe_inc();
}
"""


def chain_program(depth: int) -> str:
    """A lock at the bottom of a deep call chain, released at the top.

    Exercises call-graph construction, per-function analysis, and propagation
    on `depth` functions plus main without any recursion.
    """
    parts = ["int n;", "mutex_t m;"]
    parts.append("void f0() { pthread_mutex_lock(&m); n = n + 1; }")
    for i in range(1, depth):
        parts.append("void f%d() { f%d(); }" % (i, i - 1))
    parts.append(
        "void main() { f%d(); n = n + 1; pthread_mutex_unlock(&m); }" % (depth - 1))
    return "\n".join(parts) + "\n"


class ProgramGen:
    """Seeded generator of small acyclic, call-free lock programs.

    Bodies mix lock/unlock calls on up to two mutexes with plain assignments
    and nested if/else, which keeps every generated flow graph loop-free so
    path enumeration stays exact and cheap.
    """

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def program(self, max_stmts: int = 8) -> str:
        lines = ["int n;", "int c;", "mutex_t m;", "mutex_t w;", "void f() {"]
        lines.extend(self.stmts(1, max_stmts))
        lines.append("}")
        return "\n".join(lines) + "\n"

    def stmts(self, depth: int, budget: int) -> list[str]:
        out: list[str] = []
        n = self.rng.randint(1, max(1, budget))
        for _ in range(n):
            out.extend(self.stmt(depth))
        return out

    def stmt(self, depth: int) -> list[str]:
        pad = "    " * depth
        lock = self.rng.choice(["m", "w"])
        roll = self.rng.random()
        if roll < 0.3:
            return [pad + "pthread_mutex_lock(&%s);" % lock]
        if roll < 0.6:
            return [pad + "pthread_mutex_unlock(&%s);" % lock]
        if roll < 0.75:
            return [pad + "n = n + 1;"]
        body = self.stmts(depth + 1, 2)
        if depth < 3 and self.rng.random() < 0.5:
            orelse = self.stmts(depth + 1, 2)
            return ([pad + "if (c) {"] + body + [pad + "} else {"]
                    + orelse + [pad + "}"])
        return [pad + "if (c) {"] + body + [pad + "}"]
