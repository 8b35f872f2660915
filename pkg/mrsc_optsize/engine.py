"""
Multi-result supercompilation: folding, local/global history, the
homeomorphic-embedding whistle, and construction of the graph-set.
"""

import dataclasses
import enum
import sys
from typing import Dict, Optional, Tuple

from .config import get_config
from .drive import FreshSource, MConf, MDSRCases, mdsr_sub_exps, multi_drive_steps
from .exceptions import GraphSetBudgetError
from .graphset import Alternative, GraphSet, GSBuild, GSFold, GSNone
from .lang import Call, Exp, Program, Var, find_renaming
from .logging_config import get_logger
from .performance import PerformanceContext

logger = get_logger(__name__)

MIN_RECURSION_LIMIT = 10_000


class HistoryKind(enum.Enum):
    LOCAL = "local"
    GLOBAL = "global"


@dataclasses.dataclass(frozen=True)
class HistoryEntry:
    kind: HistoryKind
    level: int
    config: Exp


# Newest entry first
History = Tuple[HistoryEntry, ...]


def embeds(a: Exp, b: Exp) -> bool:
    """
    Homeomorphic embedding a ⊴ b

    Any variable embeds in any variable; `a` embeds in a call if it embeds in
    one of its arguments (diving) or if both are calls of the same symbol and
    arity whose arguments embed pairwise (coupling).
    """
    memo: Dict[Tuple[int, int], bool] = {}

    def go(x: Exp, y: Exp) -> bool:
        key = (id(x), id(y))
        cached = memo.get(key)
        if cached is not None:
            return cached
        if isinstance(x, Var) and isinstance(y, Var):
            result = True
        elif isinstance(y, Var):
            result = False
        else:
            assert isinstance(y, Call)
            result = any(go(x, arg) for arg in y.args) or (
                isinstance(x, Call)
                and x.kind is y.kind
                and x.name == y.name
                and len(x.args) == len(y.args)
                and all(go(xa, ya) for xa, ya in zip(x.args, y.args))
            )
        memo[key] = result
        return result

    return go(a, b)


def ensure_recursion_limit(limit: int = MIN_RECURSION_LIMIT) -> None:
    if sys.getrecursionlimit() < limit:
        sys.setrecursionlimit(limit)


class MultiResultSupercompiler:
    """Builds the graph-set of all supercompilation results of one configuration"""

    def __init__(self, program: Program, max_graphset_nodes: Optional[int] = None):
        self.program = program
        self.max_graphset_nodes = max_graphset_nodes or get_config().max_graphset_nodes
        self.nodes = 0
        self.fresh = FreshSource()

    def run(self, c0: Exp) -> GraphSet:
        self.nodes = 0
        self.fresh = FreshSource.for_run(self.program, c0)
        ensure_recursion_limit()
        with PerformanceContext("mrscp") as perf:
            gs = self._build(0, (), c0)
            perf.add_metric("nodes", self.nodes)
        logger.info(f"Graph-set for {c0} built with {self.nodes} nodes")
        return gs

    def _count_node(self) -> None:
        self.nodes += 1
        if self.nodes > self.max_graphset_nodes:
            raise GraphSetBudgetError(
                f"Graph-set exceeds {self.max_graphset_nodes} nodes",
                details={"limit": self.max_graphset_nodes},
            )

    def _build(self, level: int, history: History, c: Exp) -> GraphSet:
        self._count_node()

        for entry in reversed(history):
            renaming = find_renaming(entry.config, c)
            if renaming is not None:
                logger.debug(f"Fold {c} to level {entry.level}")
                return GSFold(MConf(None, c), level - entry.level, renaming)

        steps = multi_drive_steps(self.program, c, self.fresh)
        if any(isinstance(r, MDSRCases) for r in steps):
            kind = HistoryKind.GLOBAL
            relevant = [h for h in history if h.kind is HistoryKind.GLOBAL]
        else:
            kind = HistoryKind.LOCAL
            relevant = []
            for h in history:
                if h.kind is not HistoryKind.LOCAL:
                    break
                relevant.append(h)

        if any(embeds(h.config, c) for h in relevant):
            logger.debug(f"Whistle on {c}")
            return GSNone()

        extended = (HistoryEntry(kind, level, c), *history)
        alternatives = tuple(
            Alternative(
                MConf(r, c),
                tuple(self._build(level + 1, extended, s) for s in mdsr_sub_exps(r)),
            )
            for r in steps
        )
        return GSBuild(c, alternatives)


def mr_scp(p: Program, c0: Exp, max_graphset_nodes: Optional[int] = None) -> GraphSet:
    """
    Run multi-result supercompilation

    Args:
        p: Well-formed program
        c0: Initial configuration
        max_graphset_nodes: Safety valve, defaults to the configured limit

    Returns:
        Graph-set encoding every configuration graph

    Raises:
        GraphSetBudgetError: If the graph-set grows past the node budget
    """
    return MultiResultSupercompiler(p, max_graphset_nodes).run(c0)
