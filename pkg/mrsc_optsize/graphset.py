"""
Graph-sets: the compact encoding of all configuration graphs produced by a
multi-result supercompilation run, its lazy expansion, and size queries that
never expand it.
"""

import dataclasses
import enum
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .drive import MConf, MDSRCases, MDSRCon, MDSRLeaf, MDSRLet, MDSRUnfold, mdsr_sub_exps
from .exceptions import InternalError
from .lang import Exp, Pattern, Var, pretty_print
from .logging_config import get_logger

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Graph-sets


@dataclasses.dataclass(frozen=True)
class GSNone:
    pass


@dataclasses.dataclass(frozen=True)
class GSFold:
    conf: MConf
    back: int
    renaming: Mapping[str, str]


@dataclasses.dataclass(frozen=True)
class Alternative:
    conf: MConf
    children: Tuple["GraphSet", ...]


@dataclasses.dataclass(frozen=True)
class GSBuild:
    config: Exp
    alternatives: Tuple[Alternative, ...]


GraphSet = Union[GSNone, GSFold, GSBuild]


# ---------------------------------------------------------------------------
# Configuration graphs
#
# Every node keeps the configuration it was built from; residualization reads
# the parameters of fold targets from it.


@dataclasses.dataclass(frozen=True)
class CGLeaf:
    config: Exp
    var: Var


@dataclasses.dataclass(frozen=True)
class CGCon:
    config: Exp
    name: str
    children: Tuple["ConfGraph", ...]


@dataclasses.dataclass(frozen=True)
class CGUnfold:
    config: Exp
    child: "ConfGraph"


@dataclasses.dataclass(frozen=True)
class CGCases:
    config: Exp
    var: str
    branches: Tuple[Tuple[Pattern, "ConfGraph"], ...]


@dataclasses.dataclass(frozen=True)
class CGFold:
    config: Exp
    back: int
    renaming: Mapping[str, str]


@dataclasses.dataclass(frozen=True)
class CGLet:
    config: Exp
    bindings: Tuple[Tuple[str, "ConfGraph"], ...]
    body: "ConfGraph"


ConfGraph = Union[CGLeaf, CGCon, CGUnfold, CGCases, CGFold, CGLet]


def graph_children(g: ConfGraph) -> List[ConfGraph]:
    """Children in path order: let bindings first, then the body"""
    if isinstance(g, CGCon):
        return list(g.children)
    if isinstance(g, CGUnfold):
        return [g.child]
    if isinstance(g, CGCases):
        return [child for _, child in g.branches]
    if isinstance(g, CGLet):
        return [*(child for _, child in g.bindings), g.body]
    return []


def build_graph(conf: MConf, children: Sequence[ConfGraph]) -> ConfGraph:
    """Build a configuration graph node from a driving step and its subgraphs"""
    step = conf.step
    if step is None:
        raise InternalError("Fold configurations have no driving step to build from")
    expected = len(mdsr_sub_exps(step))
    if len(children) != expected:
        raise InternalError(
            f"{type(step).__name__} expects {expected} children, got {len(children)}"
        )
    if isinstance(step, MDSRLeaf):
        return CGLeaf(conf.config, step.exp)
    if isinstance(step, MDSRCon):
        return CGCon(conf.config, step.name, tuple(children))
    if isinstance(step, MDSRUnfold):
        return CGUnfold(conf.config, children[0])
    if isinstance(step, MDSRCases):
        return CGCases(
            conf.config, step.var, tuple(zip((p for p, _ in step.branches), children))
        )
    assert isinstance(step, MDSRLet)
    return CGLet(
        conf.config,
        tuple(zip((v for v, _ in step.bindings), children[1:])),
        children[0],
    )


# ---------------------------------------------------------------------------
# Expansion and counting


def _nonempty_index(gs: GraphSet, index: Dict[int, bool]) -> bool:
    if isinstance(gs, GSNone):
        result = False
    elif isinstance(gs, GSFold):
        result = True
    else:
        # Visit every child so the index covers the whole graph-set
        flags = [
            all([_nonempty_index(child, index) for child in alt.children])
            for alt in gs.alternatives
        ]
        result = any(flags)
    index[id(gs)] = result
    return result


def enumerate_graphs(gs: GraphSet) -> Iterator[ConfGraph]:
    """
    Lazily expand a graph-set into its configuration graphs

    Alternatives are produced in order; within an alternative the children
    combine as a cartesian product with the rightmost child varying fastest.
    """
    index: Dict[int, bool] = {}
    _nonempty_index(gs, index)
    return _expand(gs, index)


def _expand(gs: GraphSet, index: Dict[int, bool]) -> Iterator[ConfGraph]:
    if isinstance(gs, GSNone):
        return
    if isinstance(gs, GSFold):
        yield CGFold(gs.conf.config, gs.back, gs.renaming)
        return
    for alt in gs.alternatives:
        if not all(index[id(child)] for child in alt.children):
            continue
        for children in _product(alt.children, index):
            yield build_graph(alt.conf, children)


def _product(sets: Sequence[GraphSet], index: Dict[int, bool]) -> Iterator[Tuple[ConfGraph, ...]]:
    if not sets:
        yield ()
        return
    for head in _expand(sets[0], index):
        for rest in _product(sets[1:], index):
            yield (head, *rest)


def count_graphs(gs: GraphSet) -> int:
    """Number of graphs the graph-set expands to, computed without expanding it"""
    if isinstance(gs, GSNone):
        return 0
    if isinstance(gs, GSFold):
        return 1
    total = 0
    for alt in gs.alternatives:
        product = 1
        for child in alt.children:
            product *= count_graphs(child)
            if product == 0:
                break
        total += product
    return total


def graphset_node_count(gs: GraphSet) -> int:
    stack: List[GraphSet] = [gs]
    count = 0
    while stack:
        top = stack.pop()
        count += 1
        if isinstance(top, GSBuild):
            for alt in top.alternatives:
                stack.extend(alt.children)
    return count


def graphset_depth(gs: GraphSet) -> int:
    """Length of the longest root-to-leaf path, counted in graph-set nodes"""
    if not isinstance(gs, GSBuild):
        return 1
    depths = [graphset_depth(child) for alt in gs.alternatives for child in alt.children]
    return 1 + max(depths, default=0)


# ---------------------------------------------------------------------------
# Size measures and queries


class SizeMeasure(enum.Enum):
    ALL_NODES = "all-nodes"
    SKIP_UNFOLD = "skip-unfold"

    def step_weight(self, conf: MConf) -> int:
        if self is SizeMeasure.SKIP_UNFOLD and isinstance(conf.step, MDSRUnfold):
            return 0
        return 1

    def node_weight(self, g: ConfGraph) -> int:
        if self is SizeMeasure.SKIP_UNFOLD and isinstance(g, CGUnfold):
            return 0
        return 1


def graph_size(g: ConfGraph, m: SizeMeasure = SizeMeasure.ALL_NODES) -> int:
    stack: List[ConfGraph] = [g]
    size = 0
    while stack:
        node = stack.pop()
        size += m.node_weight(node)
        stack.extend(graph_children(node))
    return size


def first_graph(gs: GraphSet) -> Optional[ConfGraph]:
    """First graph of the expansion, found in one bottom-up pass"""
    return _extreme_graph(gs, last=False)


def last_graph(gs: GraphSet) -> Optional[ConfGraph]:
    """Last graph of the expansion, found in one bottom-up pass"""
    return _extreme_graph(gs, last=True)


def _extreme_graph(gs: GraphSet, last: bool) -> Optional[ConfGraph]:
    if isinstance(gs, GSNone):
        return None
    if isinstance(gs, GSFold):
        return CGFold(gs.conf.config, gs.back, gs.renaming)
    alternatives = reversed(gs.alternatives) if last else gs.alternatives
    for alt in alternatives:
        children: List[ConfGraph] = []
        for child in alt.children:
            g = _extreme_graph(child, last)
            if g is None:
                break
            children.append(g)
        else:
            return build_graph(alt.conf, children)
    return None


class Extremum(enum.Enum):
    MIN = "min"
    MAX = "max"


def min_max_size_graph(
    gs: GraphSet, m: SizeMeasure = SizeMeasure.ALL_NODES, mode: Extremum = Extremum.MIN
) -> Optional[Tuple[int, GraphSet]]:
    """
    Select a graph of minimum or maximum size without expanding the graph-set

    Args:
        gs: Graph-set to search
        m: Size measure
        mode: Whether to minimize or maximize

    Returns:
        The extremal size and a pruned graph-set holding exactly one graph of
        that size, or None if the graph-set is empty. Among alternatives of
        equal cost the earliest is kept.
    """
    if isinstance(gs, GSNone):
        return None
    if isinstance(gs, GSFold):
        return 1, gs
    best: Optional[Tuple[int, Alternative]] = None
    for alt in gs.alternatives:
        cost = m.step_weight(alt.conf)
        pruned: List[GraphSet] = []
        for child in alt.children:
            result = min_max_size_graph(child, m, mode)
            if result is None:
                break
            cost += result[0]
            pruned.append(result[1])
        else:
            better = best is None or (cost < best[0] if mode is Extremum.MIN else cost > best[0])
            if better:
                best = (cost, Alternative(alt.conf, tuple(pruned)))
    if best is None:
        return None
    return best[0], GSBuild(gs.config, (best[1],))


class QueryKind(str, enum.Enum):
    FIRST = "first"
    LAST = "last"
    MIN = "min"
    MAX = "max"
    ENUMERATE = "enumerate"


class QuerySpec(BaseModel):
    """Which graphs of a graph-set to select"""

    model_config = ConfigDict(frozen=True)

    kind: QueryKind
    measure: SizeMeasure = SizeMeasure.ALL_NODES
    limit: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _limit_only_for_enumerate(self) -> "QuerySpec":
        if (self.kind is QueryKind.ENUMERATE) != (self.limit is not None):
            raise ValueError("limit is required for enumerate queries and only for them")
        return self

    def __str__(self) -> str:
        if self.kind is QueryKind.ENUMERATE:
            return f"enumerate:{self.limit}"
        if self.measure is SizeMeasure.SKIP_UNFOLD:
            return f"{self.kind.value}-skip-unfold"
        return self.kind.value


def select_graphs(gs: GraphSet, query: QuerySpec) -> List[ConfGraph]:
    """Apply a query, returning the selected graphs in sequence order"""
    if query.kind is QueryKind.ENUMERATE:
        assert query.limit is not None
        selected: List[ConfGraph] = []
        for g in enumerate_graphs(gs):
            selected.append(g)
            if len(selected) >= query.limit:
                break
        return selected
    if query.kind is QueryKind.FIRST:
        g = first_graph(gs)
    elif query.kind is QueryKind.LAST:
        g = last_graph(gs)
    else:
        mode = Extremum.MIN if query.kind is QueryKind.MIN else Extremum.MAX
        result = min_max_size_graph(gs, query.measure, mode)
        g = first_graph(result[1]) if result is not None else None
    return [] if g is None else [g]


# ---------------------------------------------------------------------------
# DOT rendering


def _gvquote(s: str) -> str:
    return '"{}"'.format(s.replace("\\", "\\\\").replace('"', r"\""))


def _renaming_label(renaming: Mapping[str, str]) -> str:
    return ", ".join(f"{k}->{v}" for k, v in renaming.items())


def _step_label(conf: MConf) -> str:
    step = conf.step
    if isinstance(step, MDSRLet):
        return "let " + ", ".join(v for v, _ in step.bindings)
    if isinstance(step, MDSRCases):
        return f"case {step.var}"
    if isinstance(step, MDSRUnfold):
        return "unfold"
    if isinstance(step, MDSRCon):
        return step.name
    return "leaf"


class _DotWriter:
    def __init__(self, name: str):
        self.lines = [f"digraph {name} {{", "  node [fontname=monospace];"]
        self.counter = 0

    def node(self, label: str, **attrs: str) -> str:
        node_id = f"n{self.counter}"
        self.counter += 1
        rendered = "".join(f", {k}={v}" for k, v in attrs.items())
        self.lines.append(f"  {node_id} [label={_gvquote(label)}{rendered}];")
        return node_id

    def edge(self, src: str, dst: str, label: str = "", **attrs: str) -> None:
        rendered = [f"{k}={v}" for k, v in attrs.items()]
        if label:
            rendered.insert(0, f"label={_gvquote(label)}")
        suffix = f" [{', '.join(rendered)}]" if rendered else ""
        self.lines.append(f"  {src} -> {dst}{suffix};")

    def render(self) -> str:
        return "\n".join([*self.lines, "}"]) + "\n"


def _graphset_dot(gs: GraphSet, out: _DotWriter, ancestors: List[str]) -> str:
    if isinstance(gs, GSNone):
        return out.node("NONE", shape="plaintext")
    if isinstance(gs, GSFold):
        node_id = out.node(pretty_print(gs.conf.config), shape="box", style="rounded")
        if gs.back <= len(ancestors):
            out.edge(node_id, ancestors[-gs.back], _renaming_label(gs.renaming), style="dashed")
        return node_id
    node_id = out.node(pretty_print(gs.config), shape="box")
    ancestors.append(node_id)
    for i, alt in enumerate(gs.alternatives):
        alt_id = out.node(_step_label(alt.conf), shape="ellipse")
        out.edge(node_id, alt_id, str(i))
        for child in alt.children:
            out.edge(alt_id, _graphset_dot(child, out, ancestors))
    ancestors.pop()
    return node_id


def _graph_label(g: ConfGraph) -> str:
    if isinstance(g, CGUnfold):
        kind = "unfold"
    elif isinstance(g, CGCases):
        kind = f"case {g.var}"
    elif isinstance(g, CGLet):
        kind = "let " + ", ".join(v for v, _ in g.bindings)
    elif isinstance(g, CGFold):
        kind = "fold"
    elif isinstance(g, CGCon):
        kind = g.name
    else:
        kind = "leaf"
    return f"{pretty_print(g.config)} [{kind}]"


def _graph_dot(g: ConfGraph, out: _DotWriter, ancestors: List[str]) -> str:
    node_id = out.node(_graph_label(g), shape="box")
    if isinstance(g, CGFold):
        if g.back <= len(ancestors):
            out.edge(node_id, ancestors[-g.back], _renaming_label(g.renaming), style="dashed")
        return node_id
    ancestors.append(node_id)
    if isinstance(g, CGCases):
        for pattern, child in g.branches:
            out.edge(node_id, _graph_dot(child, out, ancestors), str(pattern))
    elif isinstance(g, CGLet):
        for var, child in g.bindings:
            out.edge(node_id, _graph_dot(child, out, ancestors), var)
        out.edge(node_id, _graph_dot(g.body, out, ancestors), "in")
    else:
        for child in graph_children(g):
            out.edge(node_id, _graph_dot(child, out, ancestors))
    ancestors.pop()
    return node_id


def to_dot(x: Union[GraphSet, ConfGraph]) -> str:
    """
    Render a graph-set or a configuration graph as a DOT digraph

    Nodes are numbered in pre-order. Fold nodes get a dashed edge back to
    their ancestor, labelled with the renaming.
    """
    if isinstance(x, (GSNone, GSFold, GSBuild)):
        out = _DotWriter("graphset")
        _graphset_dot(x, out, [])
    else:
        out = _DotWriter("confgraph")
        _graph_dot(x, out, [])
    return out.render()
