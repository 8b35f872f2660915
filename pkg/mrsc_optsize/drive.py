"""
Driving: single-step driving and multi-result driving with generalization
"""

import dataclasses
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .exceptions import InternalError
from .lang import (
    Call,
    CallKind,
    Clause,
    Exp,
    OrdinaryDef,
    Pattern,
    Program,
    Var,
    exp_vars,
    free_vars,
    substitute,
)
from .logging_config import get_logger

logger = get_logger(__name__)

# Not a valid variable name, so it can never clash with program variables
HOLE = "_hole"

Branch = Tuple[Pattern, Exp]


class FreshSource:
    """
    Supplies fresh variable names for one supercompilation run

    Names are derived from a base name (the hint with trailing digits
    removed) and a counter per base, skipping anything already taken.
    """

    def __init__(self, taken: Iterable[str] = ()):
        self._taken = set(taken)
        self._counters: Dict[str, int] = {}

    @classmethod
    def for_run(cls, program: Program, *exps: Exp) -> "FreshSource":
        taken = exp_vars(program)
        for e in exps:
            taken.update(free_vars(e))
        return cls(taken)

    @staticmethod
    def base_name(hint: str) -> str:
        return hint.rstrip("0123456789") or "x"

    def reserve(self, names: Iterable[str]) -> None:
        self._taken.update(names)

    def fresh(self, hint: str) -> str:
        base = self.base_name(hint)
        n = self._counters.get(base, 0)
        while f"{base}{n}" in self._taken:
            n += 1
        name = f"{base}{n}"
        self._counters[base] = n + 1
        self._taken.add(name)
        return name

    def is_taken(self, name: str) -> bool:
        return name in self._taken


@dataclasses.dataclass(frozen=True)
class ExpContext:
    """Expression with a single hole"""

    template: Exp

    @classmethod
    def around(cls, name: str, rest: Sequence[Exp]) -> "ExpContext":
        """Context `name(•, rest...)` with the hole in first argument position"""
        return cls(Call(CallKind.FUNCTION, name, (Var(HOLE), *rest)))

    def fill(self, e: Exp) -> Exp:
        return substitute(self.template, {HOLE: e})

    def substitute(self, s: Dict[str, Exp]) -> "ExpContext":
        return ExpContext(substitute(self.template, {k: v for k, v in s.items() if k != HOLE}))


# ---------------------------------------------------------------------------
# Single-step driving


@dataclasses.dataclass(frozen=True)
class DSRNone:
    pass


@dataclasses.dataclass(frozen=True)
class DSRCon:
    name: str
    args: Tuple[Exp, ...]


@dataclasses.dataclass(frozen=True)
class DSRUnfold:
    exp: Exp


@dataclasses.dataclass(frozen=True)
class DSRCases:
    var: str
    branches: Tuple[Branch, ...]


DriveStepResult = Union[DSRNone, DSRCon, DSRUnfold, DSRCases]


def _clause_subst(clause: Clause, con_args: Sequence[Exp], args: Sequence[Exp]) -> Dict[str, Exp]:
    s: Dict[str, Exp] = dict(zip(clause.pattern.variables, con_args))
    s.update(zip(clause.params, args))
    return s


def propagate(x: str, clause: Clause, args: Sequence[Exp], fresh: FreshSource) -> Branch:
    """
    Build a case branch with positive information propagation

    Args:
        x: Scrutinee variable
        clause: Clause being selected
        args: Remaining call arguments, bound to the clause's other parameters
        fresh: Source of fresh pattern variables

    Returns:
        The freshened pattern and the branch body, in which every occurrence
        of `x` (including those inside `args`) is replaced by the pattern
    """
    variables = tuple(fresh.fresh(v) for v in clause.pattern.variables)
    pattern = Pattern(clause.pattern.constructor, variables)
    known = {x: pattern.to_exp()}
    propagated = [substitute(a, known) for a in args]
    body = substitute(clause.body, _clause_subst(clause, [Var(v) for v in variables], propagated))
    return pattern, body


def _dsr_map(ctx: ExpContext, inner: DriveStepResult) -> DriveStepResult:
    if isinstance(inner, DSRUnfold):
        return DSRUnfold(ctx.fill(inner.exp))
    if isinstance(inner, DSRCases):
        return DSRCases(
            inner.var,
            tuple(
                (pattern, ctx.substitute({inner.var: pattern.to_exp()}).fill(body))
                for pattern, body in inner.branches
            ),
        )
    raise InternalError(f"Cannot splice {type(inner).__name__} into a context")


def drive_step(p: Program, e: Exp, fresh: Optional[FreshSource] = None) -> DriveStepResult:
    """Perform one step of driving on configuration `e`"""
    fresh = fresh or FreshSource.for_run(p, e)
    if isinstance(e, Var):
        return DSRNone()
    assert isinstance(e, Call)
    if e.is_constructor:
        return DSRCon(e.name, e.args)
    d = p.lookup(e.name)
    if isinstance(d, OrdinaryDef):
        return DSRUnfold(substitute(d.body, dict(zip(d.params, e.args))))
    scrutinee, rest = e.args[0], e.args[1:]
    if isinstance(scrutinee, Var):
        return DSRCases(
            scrutinee.name,
            tuple(propagate(scrutinee.name, clause, rest, fresh) for clause in d.clauses),
        )
    assert isinstance(scrutinee, Call)
    if scrutinee.is_constructor:
        clause = d.clause_for(scrutinee.name)
        if clause is None:
            raise InternalError(f"No clause of {d.name} for {scrutinee.name}")
        return DSRUnfold(substitute(clause.body, _clause_subst(clause, scrutinee.args, rest)))
    return _dsr_map(ExpContext.around(e.name, rest), drive_step(p, scrutinee, fresh))


# ---------------------------------------------------------------------------
# Multi-result driving


@dataclasses.dataclass(frozen=True)
class MDSRLeaf:
    exp: Var


@dataclasses.dataclass(frozen=True)
class MDSRCon:
    name: str
    args: Tuple[Exp, ...]


@dataclasses.dataclass(frozen=True)
class MDSRUnfold:
    exp: Exp


@dataclasses.dataclass(frozen=True)
class MDSRCases:
    var: str
    branches: Tuple[Branch, ...]


@dataclasses.dataclass(frozen=True)
class MDSRLet:
    bindings: Tuple[Tuple[str, Exp], ...]
    body: Exp


MultiDriveStepResult = Union[MDSRLeaf, MDSRCon, MDSRUnfold, MDSRCases, MDSRLet]


@dataclasses.dataclass(frozen=True)
class MConf:
    """A multi-result driving step paired with the configuration it was taken from

    Fold nodes have no driving step and carry `step=None`.
    """

    step: Optional[MultiDriveStepResult]
    config: Exp


def _generalize(
    fresh: FreshSource, hints: Sequence[str], exps: Sequence[Exp]
) -> Tuple[Tuple[Tuple[str, Exp], ...], Dict[str, Exp]]:
    binders = [fresh.fresh(h) for h in hints]
    return tuple(zip(binders, exps)), {h: Var(b) for h, b in zip(hints, binders)}


def mdsr_map(ctx: ExpContext, inner: Sequence[MultiDriveStepResult]) -> List[MultiDriveStepResult]:
    """Splice the results of driving the hole's expression into its context"""
    mapped: List[MultiDriveStepResult] = []
    for r in inner:
        if isinstance(r, MDSRUnfold):
            mapped.append(MDSRUnfold(ctx.fill(r.exp)))
        elif isinstance(r, MDSRLet):
            mapped.append(MDSRLet(r.bindings, ctx.fill(r.body)))
        elif isinstance(r, MDSRCases):
            mapped.append(
                MDSRCases(
                    r.var,
                    tuple(
                        (pattern, ctx.substitute({r.var: pattern.to_exp()}).fill(body))
                        for pattern, body in r.branches
                    ),
                )
            )
        else:
            raise InternalError(f"Cannot splice {type(r).__name__} into a context")
    return mapped


def multi_drive_steps(
    p: Program, e: Exp, fresh: Optional[FreshSource] = None
) -> List[MultiDriveStepResult]:
    """
    Compute every multi-result driving alternative of configuration `e`

    Generalization alternatives always precede the driving alternative they
    were derived from.

    Args:
        p: Program
        e: Configuration
        fresh: Run-wide fresh name source

    Returns:
        Nonempty list of alternatives
    """
    fresh = fresh or FreshSource.for_run(p, e)
    if isinstance(e, Var):
        return [MDSRLeaf(e)]
    assert isinstance(e, Call)
    if e.is_constructor:
        return [MDSRCon(e.name, e.args)]

    d = p.lookup(e.name)
    if isinstance(d, OrdinaryDef):
        bindings, renaming = _generalize(fresh, d.params, e.args)
        return [
            MDSRLet(bindings, substitute(d.body, renaming)),
            MDSRUnfold(substitute(d.body, dict(zip(d.params, e.args)))),
        ]

    scrutinee, rest = e.args[0], e.args[1:]
    if isinstance(scrutinee, Var):
        return [
            MDSRCases(
                scrutinee.name,
                tuple(propagate(scrutinee.name, clause, rest, fresh) for clause in d.clauses),
            )
        ]

    assert isinstance(scrutinee, Call)
    if scrutinee.is_constructor:
        clause = d.clause_for(scrutinee.name)
        if clause is None:
            raise InternalError(f"No clause of {d.name} for {scrutinee.name}")
        hints = (*clause.pattern.variables, *clause.params)
        bindings, renaming = _generalize(fresh, hints, (*scrutinee.args, *rest))
        return [
            MDSRLet(bindings, substitute(clause.body, renaming)),
            MDSRUnfold(substitute(clause.body, _clause_subst(clause, scrutinee.args, rest))),
        ]

    params = d.clauses[0].params
    bindings, renaming = _generalize(fresh, ("x", *params), (scrutinee, *rest))
    hole_var = bindings[0][0]
    generalized = MDSRLet(
        bindings,
        Call(CallKind.FUNCTION, d.name, (Var(hole_var), *(renaming[q] for q in params))),
    )
    inner = multi_drive_steps(p, scrutinee, fresh)
    return [generalized, *mdsr_map(ExpContext.around(e.name, rest), inner)]


def mdsr_sub_exps(r: MultiDriveStepResult) -> List[Exp]:
    """Child configurations of a driving step, let body before the bound expressions"""
    if isinstance(r, MDSRLeaf):
        return []
    if isinstance(r, MDSRCon):
        return list(r.args)
    if isinstance(r, MDSRUnfold):
        return [r.exp]
    if isinstance(r, MDSRCases):
        return [body for _, body in r.branches]
    return [r.body, *(e for _, e in r.bindings)]
