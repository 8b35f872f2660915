"""
mrsc-optsize: Multi-result supercompilation with size-optimal result selection

This package supercompiles programs of a small first-order functional
language. Instead of committing to one transformation, it builds a compact
graph-set holding every result and picks the ones you ask for.

Key Features:
- Multi-result driving that generalizes before it duplicates
- Folding with local/global histories and a homeomorphic-embedding whistle
- First/last/minimum/maximum queries without expanding the graph-set
- Residual programs with trivial lets inlined and duplicate definitions merged
- A call-by-name interpreter for checking results on random inputs

Basic Usage:
    from mrsc_optsize import (
        first_graph, min_max_size_graph, mr_scp, parse_program, residual_program,
    )

    program, target = parse_program(source_text)
    graphs = mr_scp(program, target)
    size, pruned = min_max_size_graph(graphs)
    residual, main = residual_program(first_graph(pruned))

Command Line:
    mrsc run examples.scp --query min-skip-unfold
    mrsc stats
"""

__version__ = "0.1.0"

# Driving
from .drive import FreshSource, MConf, drive_step, mdsr_sub_exps, multi_drive_steps

# Supercompilation
from .engine import embeds, mr_scp

# Exceptions
from .exceptions import (
    ConfigurationError,
    EmptyResultError,
    GraphSetBudgetError,
    InternalError,
    MRSCError,
    ParseError,
    ValidationError,
    WellFormednessError,
)

# Graph-set queries
from .graphset import (
    Extremum,
    QueryKind,
    QuerySpec,
    SizeMeasure,
    count_graphs,
    enumerate_graphs,
    first_graph,
    graph_size,
    last_graph,
    min_max_size_graph,
    select_graphs,
    to_dot,
)

# Object language
from .lang import (
    Program,
    Value,
    eval_cbn,
    find_renaming,
    free_vars,
    parse_expression,
    parse_program,
    pretty_print,
    print_program,
    substitute,
)

# Residualization
from .residual import lift, residual_program, residualize, simplify

__all__ = [
    # Object language
    "Program",
    "Value",
    "parse_program",
    "parse_expression",
    "pretty_print",
    "print_program",
    "substitute",
    "free_vars",
    "find_renaming",
    "eval_cbn",
    # Driving and supercompilation
    "FreshSource",
    "MConf",
    "drive_step",
    "multi_drive_steps",
    "mdsr_sub_exps",
    "embeds",
    "mr_scp",
    # Graph-set queries
    "SizeMeasure",
    "Extremum",
    "QueryKind",
    "QuerySpec",
    "enumerate_graphs",
    "count_graphs",
    "graph_size",
    "first_graph",
    "last_graph",
    "min_max_size_graph",
    "select_graphs",
    "to_dot",
    # Residualization
    "residualize",
    "lift",
    "simplify",
    "residual_program",
    # Exceptions
    "MRSCError",
    "ConfigurationError",
    "ValidationError",
    "ParseError",
    "WellFormednessError",
    "InternalError",
    "GraphSetBudgetError",
    "EmptyResultError",
]


def get_version() -> str:
    """Get the current version of mrsc-optsize"""
    return __version__
