"""lockshift: lock-set analysis and guard-based rewriting for mini-C.

Parse a mini-C program using a pthread-style mutex API, compute which locks
protect which data and which locks are held where, rewrite the program into
a guarded dialect in which locks own their data and guards witness
possession, and verify the result with a guard ownership checker.
"""

from .ast import GuardedProgram, LockPath, Program, path_of
from .callgraph import CallGraph, build_call_graph, thread_entries
from .cfg import FlowGraph, build_cfg
from .diagnostics import (
    Diagnostics,
    IterationBudgetExceeded,
    LockshiftError,
    ParseError,
    SchemaError,
    SourceError,
    SummaryMismatch,
)
from .flowanalysis import (
    EMPTY,
    TOP,
    FunctionFlowFacts,
    LockSet,
    alias,
    analyze_function,
    analyze_program_flow,
    analyze_scc,
    locks,
)
from .guardcheck import OwnershipError, check
from .parser import parse, parse_guarded
from .pipeline import AnalysisResult, analyze_program, run_pipeline
from .printer import print_guarded, print_source
from .propagation import FunctionFlowSummary, propagate
from .summary import (
    LockSummary,
    build_summary,
    read_summary,
    validate_against_program,
    write_summary,
)
from .transform import access_multiset, transform

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "CallGraph",
    "Diagnostics",
    "EMPTY",
    "FlowGraph",
    "FunctionFlowFacts",
    "FunctionFlowSummary",
    "GuardedProgram",
    "IterationBudgetExceeded",
    "LockPath",
    "LockSet",
    "LockshiftError",
    "LockSummary",
    "OwnershipError",
    "ParseError",
    "Program",
    "SchemaError",
    "SourceError",
    "SummaryMismatch",
    "TOP",
    "access_multiset",
    "alias",
    "analyze_function",
    "analyze_program",
    "analyze_program_flow",
    "analyze_scc",
    "build_call_graph",
    "build_cfg",
    "build_summary",
    "check",
    "locks",
    "parse",
    "parse_guarded",
    "path_of",
    "print_guarded",
    "print_source",
    "propagate",
    "read_summary",
    "run_pipeline",
    "thread_entries",
    "transform",
    "validate_against_program",
    "write_summary",
]
