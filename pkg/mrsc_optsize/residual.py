"""
Residualization: configuration graph -> program with case/let -> core program.

Fold targets become recursive definitions named after their node path,
case and let expressions are lifted into generated functions, and the
result is cleaned up by inlining trivial lets and merging duplicated
definitions.
"""

import dataclasses
import re
from collections import defaultdict
from typing import Callable, Dict, Hashable, List, Set, Tuple, Union

from .exceptions import InternalError
from .graphset import CGCases, CGCon, CGFold, CGLeaf, CGLet, CGUnfold, ConfGraph, graph_children
from .lang import (
    Call,
    CallKind,
    Clause,
    Def,
    Exp,
    OrdinaryDef,
    Pattern,
    PatternDef,
    Program,
    Var,
    count_occurrences,
    free_vars,
    iter_calls,
    substitute,
)
from .logging_config import get_logger
from .performance import timed

logger = get_logger(__name__)

MAIN = "main"
LET_FUNCTION_RE = re.compile(r"_let\d+$")

Path = Tuple[int, ...]
CallRewrite = Callable[[Call], Exp]


# ---------------------------------------------------------------------------
# Extended language


@dataclasses.dataclass(frozen=True)
class ExtCall:
    kind: CallKind
    name: str
    args: Tuple["ExtExp", ...] = ()


@dataclasses.dataclass(frozen=True)
class CaseOf:
    scrutinee: Var
    branches: Tuple[Tuple[Pattern, "ExtExp"], ...]


@dataclasses.dataclass(frozen=True)
class LetIn:
    bindings: Tuple[Tuple[str, "ExtExp"], ...]
    body: "ExtExp"


ExtExp = Union[Var, ExtCall, CaseOf, LetIn]


@dataclasses.dataclass(frozen=True)
class ExtDef:
    name: str
    params: Tuple[str, ...]
    body: ExtExp


@dataclasses.dataclass(frozen=True)
class ExtProgram:
    defs: Tuple[ExtDef, ...]
    main: ExtExp


def ext_free_vars(e: ExtExp) -> List[str]:
    """Free variables in first-occurrence order; case patterns and let binders bind"""
    if isinstance(e, Var):
        return [e.name]
    if isinstance(e, ExtCall):
        found = [v for a in e.args for v in ext_free_vars(a)]
    elif isinstance(e, CaseOf):
        found = [e.scrutinee.name]
        for pattern, body in e.branches:
            found.extend(v for v in ext_free_vars(body) if v not in pattern.variables)
    else:
        binders = {v for v, _ in e.bindings}
        found = [v for _, b in e.bindings for v in ext_free_vars(b)]
        found.extend(v for v in ext_free_vars(e.body) if v not in binders)
    return list(dict.fromkeys(found))


# ---------------------------------------------------------------------------
# Graph -> extended program


def fold_definition_name(path: Path) -> str:
    return "f_" + "_".join(str(i) for i in path)


class _Residualizer:
    def __init__(self, root: ConfGraph):
        self.nodes: Dict[Path, ConfGraph] = {}
        self.targets: Set[Path] = set()
        self.defs: List[ExtDef] = []
        self._scan(root)

    def _scan(self, root: ConfGraph) -> None:
        stack: List[Tuple[Path, ConfGraph]] = [((), root)]
        while stack:
            path, node = stack.pop()
            self.nodes[path] = node
            if isinstance(node, CGFold):
                if not 1 <= node.back <= len(path):
                    raise InternalError(
                        f"Fold at {fold_definition_name(path)} points {node.back} levels up"
                    )
                self.targets.add(path[: len(path) - node.back])
            for i, child in enumerate(graph_children(node)):
                stack.append(((*path, i), child))

    def translate(self, node: ConfGraph, path: Path) -> ExtExp:
        if path not in self.targets:
            return self._translate_node(node, path)
        name = fold_definition_name(path)
        params = tuple(free_vars(node.config))
        body = self._translate_node(node, path)
        self.defs.append(ExtDef(name, params, body))
        return ExtCall(CallKind.FUNCTION, name, tuple(Var(v) for v in params))

    def _translate_node(self, node: ConfGraph, path: Path) -> ExtExp:
        if isinstance(node, CGLeaf):
            return node.var
        if isinstance(node, CGCon):
            return ExtCall(
                CallKind.CONSTRUCTOR,
                node.name,
                tuple(self.translate(c, (*path, i)) for i, c in enumerate(node.children)),
            )
        if isinstance(node, CGUnfold):
            return self.translate(node.child, (*path, 0))
        if isinstance(node, CGCases):
            return CaseOf(
                Var(node.var),
                tuple(
                    (pattern, self.translate(child, (*path, i)))
                    for i, (pattern, child) in enumerate(node.branches)
                ),
            )
        if isinstance(node, CGLet):
            bindings = tuple(
                (var, self.translate(child, (*path, i)))
                for i, (var, child) in enumerate(node.bindings)
            )
            return LetIn(bindings, self.translate(node.body, (*path, len(node.bindings))))
        assert isinstance(node, CGFold)
        target_path = path[: len(path) - node.back]
        target = self.nodes[target_path]
        return ExtCall(
            CallKind.FUNCTION,
            fold_definition_name(target_path),
            tuple(Var(node.renaming[v]) for v in free_vars(target.config)),
        )


def residualize(g: ConfGraph) -> ExtProgram:
    """
    Translate a configuration graph into a program with case and let

    Unfold nodes are skipped. Every node that some fold points to becomes a
    definition over the free variables of its configuration, and each fold
    becomes a call to it with arguments chosen by the fold's renaming.

    Raises:
        InternalError: If a fold points above the root
    """
    residualizer = _Residualizer(g)
    main = residualizer.translate(g, ())
    return ExtProgram(tuple(residualizer.defs), main)


# ---------------------------------------------------------------------------
# Lifting case/let into functions


class _Lifter:
    def __init__(self) -> None:
        self.generated: List[Def] = []
        self.counters: Dict[Tuple[str, str], int] = defaultdict(int)

    def _next_name(self, owner: str, kind: str) -> str:
        k = self.counters[(owner, kind)]
        self.counters[(owner, kind)] += 1
        return f"{owner}_{kind}{k}"

    def lift(self, e: ExtExp, owner: str) -> Exp:
        if isinstance(e, Var):
            return e
        if isinstance(e, ExtCall):
            return Call(e.kind, e.name, tuple(self.lift(a, owner) for a in e.args))
        if isinstance(e, CaseOf):
            name = self._next_name(owner, "case")
            x = e.scrutinee.name
            others: List[str] = []
            for pattern, body in e.branches:
                others.extend(
                    v for v in ext_free_vars(body) if v not in pattern.variables and v != x
                )
            others = list(dict.fromkeys(others))
            clauses = tuple(
                Clause(pattern, tuple(others), self.lift(body, owner))
                for pattern, body in e.branches
            )
            self.generated.append(PatternDef(name, clauses))
            return Call(CallKind.FUNCTION, name, (e.scrutinee, *(Var(v) for v in others)))
        name = self._next_name(owner, "let")
        binders = [v for v, _ in e.bindings]
        others = [v for v in ext_free_vars(e.body) if v not in binders]
        args = [self.lift(b, owner) for _, b in e.bindings]
        self.generated.append(
            OrdinaryDef(name, (*binders, *others), self.lift(e.body, owner))
        )
        return Call(CallKind.FUNCTION, name, (*args, *(Var(v) for v in others)))


def lift(ep: ExtProgram) -> Tuple[Program, Exp]:
    """Turn every case into a pattern-matching function and every let into an ordinary one"""
    lifter = _Lifter()
    defs: List[Def] = []
    for d in ep.defs:
        body = lifter.lift(d.body, d.name)
        defs.append(OrdinaryDef(d.name, d.params, body))
        defs.extend(lifter.generated)
        lifter.generated = []
    main = lifter.lift(ep.main, MAIN)
    defs.extend(lifter.generated)
    return Program(tuple(defs)), main


# ---------------------------------------------------------------------------
# Simplification


def _map_calls(e: Exp, rewrite: CallRewrite) -> Exp:
    if isinstance(e, Var):
        return e
    assert isinstance(e, Call)
    return rewrite(Call(e.kind, e.name, tuple(_map_calls(a, rewrite) for a in e.args)))


def _def_bodies(d: Def) -> List[Exp]:
    if isinstance(d, OrdinaryDef):
        return [d.body]
    return [clause.body for clause in d.clauses]


def _map_def(d: Def, rewrite: CallRewrite) -> Def:
    if isinstance(d, OrdinaryDef):
        return OrdinaryDef(d.name, d.params, _map_calls(d.body, rewrite))
    return PatternDef(
        d.name,
        tuple(Clause(c.pattern, c.params, _map_calls(c.body, rewrite)) for c in d.clauses),
    )


def _callees(d: Def) -> Set[str]:
    return {c.name for body in _def_bodies(d) for c in iter_calls(body) if not c.is_constructor}


def _recursive_functions(p: Program) -> Set[str]:
    graph = {d.name: _callees(d) for d in p.defs}
    recursive: Set[str] = set()
    for start in graph:
        seen: Set[str] = set()
        stack = list(graph[start])
        while stack:
            name = stack.pop()
            if name == start:
                recursive.add(start)
                break
            if name in seen or name not in graph:
                continue
            seen.add(name)
            stack.extend(graph[name])
    return recursive


def _inline_trivial_lets(p: Program, main: Exp) -> Tuple[Program, Exp]:
    recursive = _recursive_functions(p)
    lets = {
        d.name: d
        for d in p.defs
        if isinstance(d, OrdinaryDef) and LET_FUNCTION_RE.search(d.name) and d.name not in recursive
    }
    if not lets:
        return p, main

    def rewrite(call: Call) -> Exp:
        d = lets.get(call.name)
        if d is None or call.is_constructor:
            return call
        trivial = all(
            isinstance(arg, Var) or count_occurrences(d.body, param) <= 1
            for param, arg in zip(d.params, call.args)
        )
        if not trivial:
            return call
        return substitute(d.body, dict(zip(d.params, call.args)))

    defs = tuple(_map_def(d, rewrite) for d in p.defs)
    return Program(defs), _map_calls(main, rewrite)


def _canonical(e: Exp, names: Dict[str, str], classes: Dict[str, int]) -> Hashable:
    if isinstance(e, Var):
        return ("v", names.get(e.name, e.name))
    assert isinstance(e, Call)
    head: Hashable = e.name if e.is_constructor else ("f", classes.get(e.name, e.name))
    return (e.kind.value, head, tuple(_canonical(a, names, classes) for a in e.args))


def _signature(d: Def, classes: Dict[str, int]) -> Hashable:
    if isinstance(d, OrdinaryDef):
        names = {v: str(i) for i, v in enumerate(d.params)}
        return ("ordinary", len(d.params), _canonical(d.body, names, classes))
    clauses = []
    for clause in sorted(d.clauses, key=lambda c: c.pattern.constructor):
        bound = (*clause.pattern.variables, *clause.params)
        names = {v: str(i) for i, v in enumerate(bound)}
        clauses.append(
            (
                clause.pattern.constructor,
                len(clause.pattern.variables),
                len(clause.params),
                _canonical(clause.body, names, classes),
            )
        )
    return ("matching", tuple(clauses))


def _merge_duplicates(p: Program, main: Exp) -> Tuple[Program, Exp]:
    """Merge definitions equal up to renaming of parameters and of merged functions"""
    classes = {d.name: 0 for d in p.defs}
    count = 1
    for _ in range(len(p.defs)):
        signatures: Dict[Hashable, int] = {}
        refined = {}
        for d in p.defs:
            key = (classes[d.name], _signature(d, classes))
            refined[d.name] = signatures.setdefault(key, len(signatures))
        classes = refined
        if len(signatures) == count:
            break
        count = len(signatures)

    representative: Dict[int, str] = {}
    for d in p.defs:
        representative.setdefault(classes[d.name], d.name)
    target = {d.name: representative[classes[d.name]] for d in p.defs}
    if all(target[name] == name for name in target):
        return p, main

    def rewrite(call: Call) -> Exp:
        if call.is_constructor or target.get(call.name, call.name) == call.name:
            return call
        return Call(call.kind, target[call.name], call.args)

    defs = tuple(_map_def(d, rewrite) for d in p.defs if target[d.name] == d.name)
    return Program(defs), _map_calls(main, rewrite)


def _remove_unreachable(p: Program, main: Exp) -> Program:
    reachable: Set[str] = set()
    stack = [c.name for c in iter_calls(main) if not c.is_constructor]
    while stack:
        name = stack.pop()
        if name in reachable:
            continue
        reachable.add(name)
        d = p.get(name)
        if d is not None:
            stack.extend(_callees(d))
    return Program(tuple(d for d in p.defs if d.name in reachable))


def simplify(p: Program, main: Exp) -> Tuple[Program, Exp]:
    """
    Inline trivial lets and merge duplicated definitions until nothing changes

    A call to a generated let function is inlined when each argument is a
    variable or its parameter occurs at most once in the body. Definitions
    that are equal up to renaming of parameters and of other merged
    definitions are collapsed into the first of them. Definitions the main
    expression no longer reaches are dropped.
    """
    while True:
        inlined, inlined_main = _inline_trivial_lets(p, main)
        merged, merged_main = _merge_duplicates(inlined, inlined_main)
        pruned = _remove_unreachable(merged, merged_main)
        if pruned == p and merged_main == main:
            return p, main
        p, main = pruned, merged_main


@timed("residual_program")
def residual_program(g: ConfGraph) -> Tuple[Program, Exp]:
    """Residualize, lift and simplify a configuration graph"""
    program, main = simplify(*lift(residualize(g)))
    logger.debug(f"Residual program has {len(program.defs)} definitions")
    return program, main
