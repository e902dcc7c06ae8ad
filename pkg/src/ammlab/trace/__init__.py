"""Chain/mempool trace ingestion, arbitrage forensics and synthetic corpora."""

from .records import ChainState, Trace, TraceParseStats, parse_trace_lines, read_trace
from .analyze import (
    AnalysisReport,
    BlockspaceFinding,
    NetworkFinding,
    analyze_trace,
    blockspace_reduction,
    classify_blockspace_overhead,
    classify_network_overhead,
    detect_arbitrages,
    is_successful_arb,
)
from .generate import GeneratorConfig, generate_corpus

__all__ = [
    "AnalysisReport",
    "BlockspaceFinding",
    "ChainState",
    "GeneratorConfig",
    "NetworkFinding",
    "Trace",
    "TraceParseStats",
    "analyze_trace",
    "blockspace_reduction",
    "classify_blockspace_overhead",
    "classify_network_overhead",
    "detect_arbitrages",
    "generate_corpus",
    "is_successful_arb",
    "parse_trace_lines",
    "read_trace",
]
