"""Command-line driver.

Subcommands: analyze (emit a lock summary), transform (rewrite to the
guarded dialect), check (run the ownership checker on guarded code), and
full (all of it). Outputs are byte-deterministic; timings go to stderr so
they never perturb them.

Exit codes: 0 success, 1 input or analysis errors, 2 ownership rejection.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .ast import If, Program, While
from .cfg import cfg_to_dot
from .callgraph import callgraph_to_dot, merged_callgraph_to_dot
from .diagnostics import Diagnostics, LockshiftError, SourceError
from .guardcheck import check
from .parser import parse, parse_guarded
from .pipeline import AnalysisResult, analyze_program
from .printer import expr_text, print_guarded, stmt_text
from .summary import read_summary, validate_against_program, write_summary
from .transform import transform

_MODES = ("analyze", "transform", "check", "full")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("input", help="source file")
    sub.add_argument("--timings", action="store_true",
                     help="print per-phase wall time to stderr")


def _add_analysis_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--iteration-budget", type=int, default=1000, metavar="N",
                     help="fixpoint sweep limit per recursive call-graph "
                          "component (default 1000)")
    sub.add_argument("--dump-cfg", action="store_true",
                     help="write <input>.cfg.<function>.dot files")
    sub.add_argument("--dump-callgraph", action="store_true",
                     help="write <input>.callgraph.dot and .merged.dot")
    sub.add_argument("--dump-flow", action="store_true",
                     help="write <input>.flow.json with per-line lock sets")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lockshift",
        description="Lock-set analysis and guard-based rewriting for "
                    "mini-C programs with a pthread-style mutex API.")
    sub = parser.add_subparsers(dest="mode", required=True)

    p = sub.add_parser("analyze", help="compute and emit the lock summary")
    _add_common(p)
    _add_analysis_flags(p)
    p.add_argument("--emit-summary", metavar="PATH",
                   help="write the summary JSON here instead of stdout")

    p = sub.add_parser("transform", help="rewrite into the guarded dialect")
    _add_common(p)
    _add_analysis_flags(p)
    p.add_argument("--use-summary", metavar="PATH",
                   help="transform with this summary instead of analyzing")
    p.add_argument("--emit-summary", metavar="PATH")
    p.add_argument("-o", "--output", metavar="PATH",
                   help="write the guarded program here instead of stdout")

    p = sub.add_parser("check", help="run the guard ownership checker")
    _add_common(p)

    p = sub.add_parser("full", help="analyze, transform, and check")
    _add_common(p)
    _add_analysis_flags(p)
    p.add_argument("--use-summary", metavar="PATH")
    p.add_argument("--emit-summary", metavar="PATH")
    p.add_argument("-o", "--output", metavar="PATH")

    return parser


class _Phases:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.rows: list[tuple[str, float]] = []

    def run(self, name: str, fn):
        start = time.perf_counter()
        result = fn()
        self.rows.append((name, time.perf_counter() - start))
        return result

    def report(self) -> None:
        if not self.enabled:
            return
        for name, seconds in self.rows:
            print("%-10s %8.3fs" % (name, seconds), file=sys.stderr)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _node_text(n) -> str:
    if isinstance(n, If):
        return "if (%s)" % expr_text(n.cond)
    if isinstance(n, While):
        return "while (%s)" % expr_text(n.cond)
    return stmt_text(n)


def _flow_dump(result: AnalysisResult) -> str:
    out = {}
    for fn in result.program.functions:
        g = result.graphs[fn.name]
        f = result.flow[fn.name]
        lines: dict[str, list] = {}
        for n in g.stmt_nodes:
            lines.setdefault(str(n.line), []).append({
                "stmt": _node_text(n),
                "live_in": f.live_in[n].texts(),
                "live_out": f.live_out[n].texts(),
                "avail_in": f.avail_in[n].texts(),
                "avail_out": f.avail_out[n].texts(),
            })
        out[fn.name] = {
            "mels": f.mels.texts(),
            "mrls": f.mrls.texts(),
            "entry": {"live_in": f.live_in[g.entry].texts()},
            "ret": {"avail_out": f.avail_out[g.ret].texts()},
            "lines": lines,
        }
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def _write_dumps(args, result: AnalysisResult) -> None:
    base = Path(args.input)
    if getattr(args, "dump_cfg", False):
        for fn in result.program.functions:
            path = base.with_suffix(".cfg.%s.dot" % fn.name)
            path.write_text(cfg_to_dot(result.graphs[fn.name]))
    if getattr(args, "dump_callgraph", False):
        base.with_suffix(".callgraph.dot").write_text(
            callgraph_to_dot(result.callgraph))
        base.with_suffix(".callgraph.merged.dot").write_text(
            merged_callgraph_to_dot(result.callgraph))
    if getattr(args, "dump_flow", False):
        base.with_suffix(".flow.json").write_text(_flow_dump(result))


def _print_diagnostics(diags: Diagnostics, path: str) -> None:
    for d in diags:
        print("%s: %s" % (path, d.render()), file=sys.stderr)


def _load_summary(args, program: Program, result: AnalysisResult | None):
    if getattr(args, "use_summary", None):
        summary = read_summary(Path(args.use_summary).read_text())
        validate_against_program(summary, program)
        return summary
    return result.lock_summary


def _run(args) -> int:
    phases = _Phases(args.timings)
    text = Path(args.input).read_text()
    diags = Diagnostics()

    if args.mode == "check":
        guarded = phases.run("parse", lambda: parse_guarded(text))
        errors = phases.run("check", lambda: check(guarded, diags))
        _print_diagnostics(diags, args.input)
        for e in errors:
            print("%s:%d: %s: %s in %s"
                  % (args.input, e.line, e.kind, e.guard, e.function))
        phases.report()
        return 2 if errors else 0

    budget = args.iteration_budget
    needs_analysis = args.mode == "analyze" or not getattr(args, "use_summary", None)
    result = None
    if needs_analysis:
        result = phases.run(
            "analyze", lambda: analyze_program(text, budget, diags))
        program = result.program
        _write_dumps(args, result)
    else:
        program = phases.run("parse", lambda: parse(text))

    if args.mode == "analyze":
        _emit(write_summary(result.lock_summary), args.emit_summary)
        _print_diagnostics(diags, args.input)
        phases.report()
        return 0

    summary = _load_summary(args, program, result)
    if getattr(args, "emit_summary", None):
        _emit(write_summary(summary), args.emit_summary)

    guarded = phases.run("transform", lambda: transform(program, summary, diags))
    _emit(print_guarded(guarded), getattr(args, "output", None))

    code = 0
    if args.mode == "full":
        errors = phases.run("check", lambda: check(guarded, diags))
        for e in errors:
            print("%s:%d: %s: %s in %s"
                  % (args.input, e.line, e.kind, e.guard, e.function))
        if errors:
            code = 2
    _print_diagnostics(diags, args.input)
    phases.report()
    return code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--check" in argv:
        argv.remove("--check")
        if argv and argv[0] in _MODES:
            argv[0] = "check"
        else:
            argv.insert(0, "check")
    args = _build_parser().parse_args(argv)
    try:
        return _run(args)
    except LockshiftError as exc:
        if isinstance(exc, SourceError):
            print("%s:%d: error: %s" % (args.input, exc.line, exc.message),
                  file=sys.stderr)
        else:
            print("%s: error: %s" % (args.input, exc), file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
