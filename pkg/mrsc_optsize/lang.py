"""
Object language: a first-order functional language with ordinary and
pattern-matching function definitions, evaluated call-by-name.

Concrete syntax::

    -- line comment
    append(Nil, ys) = ys;
    append(Cons(x, xs), ys) = Cons(x, append(xs, ys));
    expression: append(append(xs, ys), zs)

Constructors start with an uppercase letter, functions and variables with a
lowercase one. Zero-arity constructors may omit the parentheses.
"""

import abc
import dataclasses
import enum
import re
from typing import (
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    TypeVar,
    Union,
)

from .exceptions import ParseError, WellFormednessError
from .logging_config import get_logger

logger = get_logger(__name__)

VARIABLE_NAME_RE = re.compile(r"^[a-z][A-Za-z0-9_]*$")
CONSTRUCTOR_NAME_RE = re.compile(r"^[A-Z][A-Za-z0-9_]*$")


class Exp(abc.ABC):
    """Expression of the object language"""

    def __str__(self) -> str:
        return pretty_print(self)


@dataclasses.dataclass(frozen=True)
class Var(Exp):
    name: str

    __str__ = Exp.__str__


class CallKind(enum.Enum):
    CONSTRUCTOR = "constructor"
    FUNCTION = "function"


@dataclasses.dataclass(frozen=True)
class Call(Exp):
    kind: CallKind
    name: str
    args: Tuple[Exp, ...] = ()

    __str__ = Exp.__str__

    @property
    def is_constructor(self) -> bool:
        return self.kind is CallKind.CONSTRUCTOR


def con(name: str, *args: Exp) -> Call:
    """Build a constructor application"""
    return Call(CallKind.CONSTRUCTOR, name, tuple(args))


def fun(name: str, *args: Exp) -> Call:
    """Build a function call"""
    return Call(CallKind.FUNCTION, name, tuple(args))


@dataclasses.dataclass(frozen=True)
class Pattern:
    """Flat constructor pattern C(x1, ..., xn)"""

    constructor: str
    variables: Tuple[str, ...] = ()

    def to_exp(self) -> Call:
        return con(self.constructor, *(Var(v) for v in self.variables))

    def __str__(self) -> str:
        return f"{self.constructor}({', '.join(self.variables)})"


@dataclasses.dataclass(frozen=True)
class OrdinaryDef:
    name: str
    params: Tuple[str, ...]
    body: Exp

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclasses.dataclass(frozen=True)
class Clause:
    pattern: Pattern
    params: Tuple[str, ...]
    body: Exp


@dataclasses.dataclass(frozen=True)
class PatternDef:
    name: str
    clauses: Tuple[Clause, ...]

    @property
    def arity(self) -> int:
        return 1 + len(self.clauses[0].params) if self.clauses else 1

    def clause_for(self, constructor: str) -> Optional[Clause]:
        for clause in self.clauses:
            if clause.pattern.constructor == constructor:
                return clause
        return None


Def = Union[OrdinaryDef, PatternDef]
Subst = Mapping[str, Exp]
Renaming = Dict[str, str]


@dataclasses.dataclass(frozen=True)
class Program:
    """Ordered function definitions with lookup by name"""

    defs: Tuple[Def, ...] = ()
    _index: Dict[str, Def] = dataclasses.field(
        default_factory=dict, init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        for d in self.defs:
            self._index.setdefault(d.name, d)

    def lookup(self, name: str) -> Def:
        try:
            return self._index[name]
        except KeyError:
            raise WellFormednessError(f"Undefined function: {name}", name=name)

    def get(self, name: str) -> Optional[Def]:
        return self._index.get(name)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __str__(self) -> str:
        return pretty_print(self)


T = TypeVar("T")


def _pop_args(done: List[T], n: int) -> Tuple[T, ...]:
    """Remove and return the last `n` finished subterms of a post-order walk"""
    if n == 0:
        return ()
    args = tuple(done[-n:])
    del done[-n:]
    return args


@dataclasses.dataclass(frozen=True)
class Value:
    """Ground constructor term"""

    constructor: str
    args: Tuple["Value", ...] = ()

    def to_exp(self) -> Call:
        done: List[Call] = []
        stack: List[Tuple["Value", bool]] = [(self, False)]
        while stack:
            value, expanded = stack.pop()
            if value.args and not expanded:
                stack.append((value, True))
                stack.extend((a, False) for a in reversed(value.args))
                continue
            done.append(con(value.constructor, *_pop_args(done, len(value.args))))
        return done[0]

    def __str__(self) -> str:
        return pretty_print(self.to_exp())


def exp_to_value(e: Exp) -> Optional[Value]:
    """Convert a ground constructor expression to a Value"""
    done: List[Value] = []
    stack: List[Tuple[Exp, bool]] = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if not (isinstance(node, Call) and node.is_constructor):
            return None
        if node.args and not expanded:
            stack.append((node, True))
            stack.extend((a, False) for a in reversed(node.args))
            continue
        done.append(Value(node.name, _pop_args(done, len(node.args))))
    return done[0]


# ---------------------------------------------------------------------------
# Substitution, free variables, renaming


def substitute(e: Exp, s: Subst) -> Exp:
    """Simultaneously replace the free variables of `e` that are in `s`"""
    if not s:
        return e
    done: List[Exp] = []
    stack: List[Tuple[Exp, bool]] = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if isinstance(node, Var):
            done.append(s.get(node.name, node))
            continue
        assert isinstance(node, Call)
        if node.args and not expanded:
            stack.append((node, True))
            stack.extend((a, False) for a in reversed(node.args))
            continue
        done.append(Call(node.kind, node.name, _pop_args(done, len(node.args))))
    return done[0]


def rename(e: Exp, renaming: Mapping[str, str]) -> Exp:
    """Apply a variable-to-variable renaming"""
    return substitute(e, {k: Var(v) for k, v in renaming.items()})


def _iter_vars(e: Exp) -> Iterator[str]:
    stack: List[Exp] = [e]
    while stack:
        top = stack.pop()
        if isinstance(top, Var):
            yield top.name
        else:
            assert isinstance(top, Call)
            stack.extend(reversed(top.args))


def free_vars(e: Exp) -> List[str]:
    """Variables of `e` in first-occurrence order, without repetition"""
    return list(dict.fromkeys(_iter_vars(e)))


def count_occurrences(e: Exp, name: str) -> int:
    return sum(1 for v in _iter_vars(e) if v == name)


def find_renaming(ancestor: Exp, current: Exp) -> Optional[Renaming]:
    """
    Find the injective renaming that turns `ancestor` into `current`

    Args:
        ancestor: The candidate fold target
        current: The configuration being folded

    Returns:
        Mapping from ancestor variables to current variables, or None when
        `current` is not a renaming of `ancestor`
    """
    forward: Renaming = {}
    backward: Dict[str, str] = {}
    stack: List[Tuple[Exp, Exp]] = [(ancestor, current)]
    while stack:
        a, c = stack.pop()
        if isinstance(a, Var):
            if not isinstance(c, Var):
                return None
            image = forward.get(a.name)
            if image is None:
                if backward.get(c.name, a.name) != a.name:
                    return None
                forward[a.name] = c.name
                backward[c.name] = a.name
            elif image != c.name:
                return None
        else:
            assert isinstance(a, Call)
            if (
                not isinstance(c, Call)
                or a.kind is not c.kind
                or a.name != c.name
                or len(a.args) != len(c.args)
            ):
                return None
            stack.extend(zip(a.args, c.args))
    return forward


def exp_vars(p: Program) -> Set[str]:
    """All variable names bound or used anywhere in the program"""
    names: Set[str] = set()
    for d in p.defs:
        if isinstance(d, OrdinaryDef):
            names.update(d.params)
            names.update(_iter_vars(d.body))
        else:
            for clause in d.clauses:
                names.update(clause.pattern.variables)
                names.update(clause.params)
                names.update(_iter_vars(clause.body))
    return names


def iter_calls(e: Exp) -> Iterator[Call]:
    stack: List[Exp] = [e]
    while stack:
        top = stack.pop()
        if isinstance(top, Call):
            yield top
            stack.extend(reversed(top.args))


# ---------------------------------------------------------------------------
# Printing


def _print_exp(e: Exp) -> str:
    parts: List[str] = []
    stack: List[Union[Exp, str]] = [e]
    while stack:
        top = stack.pop()
        if isinstance(top, str):
            parts.append(top)
        elif isinstance(top, Var):
            parts.append(top.name)
        else:
            assert isinstance(top, Call)
            parts.append(f"{top.name}(")
            stack.append(")")
            for i in range(len(top.args) - 1, -1, -1):
                stack.append(top.args[i])
                if i:
                    stack.append(", ")
    return "".join(parts)


def _print_def(d: Def) -> List[str]:
    if isinstance(d, OrdinaryDef):
        return [f"{d.name}({', '.join(d.params)}) = {_print_exp(d.body)};"]
    lines = []
    for clause in d.clauses:
        params = ", ".join([str(clause.pattern), *clause.params])
        lines.append(f"{d.name}({params}) = {_print_exp(clause.body)};")
    return lines


def print_program(p: Program, target: Optional[Exp] = None) -> str:
    """Render a program, followed by its `expression:` line when a target is given"""
    lines = [line for d in p.defs for line in _print_def(d)]
    if target is not None:
        lines.append(f"expression: {_print_exp(target)}")
    return "\n".join(lines) + ("\n" if lines else "")


def pretty_print(x: Union[Program, Exp]) -> str:
    if isinstance(x, Program):
        return print_program(x)
    return _print_exp(x)


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<newline>\n)
  | (?P<space>[ \t\r\f]+)
  | (?P<comment>--[^\n]*)
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<punct>[(),;=:])
    """,
    re.VERBOSE,
)


@dataclasses.dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"Unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        assert kind is not None
        if kind == "newline":
            line, line_start = line + 1, m.end()
        elif kind not in ("space", "comment"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclasses.dataclass(frozen=True)
class _RawClause:
    name: str
    pattern: Optional[Pattern]
    params: Tuple[str, ...]
    body: Exp
    token: _Token


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def lookahead(self, offset: int) -> _Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def error(self, message: str, token: Optional[_Token] = None) -> ParseError:
        token = token or self.peek
        found = token.text or "end of input"
        return ParseError(f"{message}, found {found!r}", token.line, token.column)

    def expect(self, text: str) -> _Token:
        if self.peek.text != text or self.peek.kind not in ("punct",):
            raise self.error(f"Expected {text!r}")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> _Token:
        if self.peek.kind != kind:
            raise self.error(f"Expected {what}")
        return self.advance()

    def at_directive(self) -> bool:
        return (
            self.peek.kind == "lower"
            and self.peek.text == "expression"
            and self.lookahead(1).text == ":"
        )

    def parse_program(self) -> Tuple[List[_RawClause], Optional[Exp]]:
        clauses: List[_RawClause] = []
        target: Optional[Exp] = None
        while self.peek.kind != "eof":
            if self.at_directive():
                self.advance()
                self.advance()
                target = self.parse_exp()
                if self.peek.text == ";":
                    self.advance()
                if self.peek.kind != "eof":
                    raise self.error("Expected end of input after expression directive")
                break
            clauses.append(self.parse_clause())
        return clauses, target

    def parse_clause(self) -> _RawClause:
        name_token = self.expect_kind("lower", "function name")
        self.expect("(")
        pattern: Optional[Pattern] = None
        params: List[str] = []
        index = 0
        if self.peek.text != ")":
            while True:
                if self.peek.kind == "upper":
                    if index != 0:
                        raise self.error(
                            "Patterns are only allowed in the first parameter position"
                        )
                    pattern = self.parse_pattern()
                else:
                    params.append(self.expect_kind("lower", "parameter name").text)
                index += 1
                if self.peek.text != ",":
                    break
                self.advance()
        self.expect(")")
        self.expect("=")
        body = self.parse_exp()
        self.expect(";")
        return _RawClause(name_token.text, pattern, tuple(params), body, name_token)

    def parse_pattern(self) -> Pattern:
        constructor = self.advance().text
        variables: List[str] = []
        if self.peek.text == "(":
            self.advance()
            if self.peek.text != ")":
                while True:
                    variables.append(self.expect_kind("lower", "pattern variable").text)
                    if self.peek.text != ",":
                        break
                    self.advance()
            self.expect(")")
        return Pattern(constructor, tuple(variables))

    def parse_args(self) -> Tuple[Exp, ...]:
        self.expect("(")
        args: List[Exp] = []
        if self.peek.text != ")":
            while True:
                args.append(self.parse_exp())
                if self.peek.text != ",":
                    break
                self.advance()
        self.expect(")")
        return tuple(args)

    def parse_exp(self) -> Exp:
        token = self.peek
        if token.kind == "upper":
            self.advance()
            args = self.parse_args() if self.peek.text == "(" else ()
            return Call(CallKind.CONSTRUCTOR, token.text, args)
        if token.kind == "lower":
            self.advance()
            if self.peek.text == "(":
                return Call(CallKind.FUNCTION, token.text, self.parse_args())
            return Var(token.text)
        raise self.error("Expected expression")


def _group_clauses(raw: Sequence[_RawClause]) -> Program:
    order: List[str] = []
    ordinary: Dict[str, OrdinaryDef] = {}
    matching: Dict[str, List[Clause]] = {}
    for rc in raw:
        if rc.name in ordinary or (rc.pattern is None and rc.name in matching):
            raise WellFormednessError(f"Duplicate definition of {rc.name}", name=rc.name)
        if rc.pattern is None:
            ordinary[rc.name] = OrdinaryDef(rc.name, rc.params, rc.body)
            order.append(rc.name)
        else:
            if rc.name not in matching:
                matching[rc.name] = []
                order.append(rc.name)
            matching[rc.name].append(Clause(rc.pattern, rc.params, rc.body))
    defs: List[Def] = []
    for name in order:
        if name in ordinary:
            defs.append(ordinary[name])
        else:
            defs.append(PatternDef(name, tuple(matching[name])))
    return Program(tuple(defs))


def parse_program(text: str) -> Tuple[Program, Optional[Exp]]:
    """
    Parse program text

    Args:
        text: Source in the concrete grammar

    Returns:
        The well-formed program and the `expression:` target, if present

    Raises:
        ParseError: On a syntax error
        WellFormednessError: On a well-formedness violation
    """
    raw, target = _Parser(text).parse_program()
    program = _group_clauses(raw)
    check_program(program, target)
    logger.debug(f"Parsed program with {len(program.defs)} definitions")
    return program, target


def parse_expression(text: str, program: Optional[Program] = None) -> Exp:
    """Parse a single expression, checking it against `program` when given"""
    parser = _Parser(text)
    e = parser.parse_exp()
    if parser.peek.kind != "eof":
        raise parser.error("Expected end of expression")
    if program is not None:
        _check_calls(program, e, _constructor_arities(program, [e]))
    return e


# ---------------------------------------------------------------------------
# Well-formedness


def _check_distinct(names: Iterable[str], where: str) -> None:
    seen: Set[str] = set()
    for name in names:
        if name in seen:
            raise WellFormednessError(f"Repeated variable {name} in {where}", name=name)
        seen.add(name)


def _check_names(e: Exp) -> None:
    for v in _iter_vars(e):
        if not VARIABLE_NAME_RE.match(v):
            raise WellFormednessError(f"Invalid variable name: {v}", name=v)
    for call in iter_calls(e):
        regex = CONSTRUCTOR_NAME_RE if call.is_constructor else VARIABLE_NAME_RE
        if not regex.match(call.name):
            raise WellFormednessError(f"Invalid {call.kind.value} name: {call.name}", name=call.name)


def _def_bodies(d: Def) -> Iterator[Tuple[Exp, Sequence[str]]]:
    if isinstance(d, OrdinaryDef):
        yield d.body, d.params
    else:
        for clause in d.clauses:
            yield clause.body, (*clause.pattern.variables, *clause.params)


def _constructor_arities(p: Program, extra: Sequence[Exp] = ()) -> Dict[str, int]:
    arities: Dict[str, int] = {}

    def note(name: str, arity: int) -> None:
        if arities.setdefault(name, arity) != arity:
            raise WellFormednessError(
                f"Constructor {name} used with arities {arities[name]} and {arity}",
                name=name,
            )

    for d in p.defs:
        if isinstance(d, PatternDef):
            for clause in d.clauses:
                note(clause.pattern.constructor, len(clause.pattern.variables))
        for body, _ in _def_bodies(d):
            for call in iter_calls(body):
                if call.is_constructor:
                    note(call.name, len(call.args))
    for e in extra:
        for call in iter_calls(e):
            if call.is_constructor:
                note(call.name, len(call.args))
    return arities


def _check_calls(p: Program, e: Exp, arities: Dict[str, int]) -> None:
    _check_names(e)
    for call in iter_calls(e):
        if call.is_constructor:
            continue
        d = p.get(call.name)
        if d is None:
            raise WellFormednessError(f"Undefined function: {call.name}", name=call.name)
        if d.arity != len(call.args):
            raise WellFormednessError(
                f"Function {call.name} expects {d.arity} arguments, got {len(call.args)}",
                name=call.name,
            )


def constructor_groups(p: Program) -> List[Set[str]]:
    """
    Partition the constructors matched on by the program into data groups

    Two constructors belong to the same group when some pattern-matching
    function has clauses for both.
    """
    parent: Dict[str, str] = {}

    def find(c: str) -> str:
        parent.setdefault(c, c)
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for d in p.defs:
        if isinstance(d, PatternDef):
            heads = [clause.pattern.constructor for clause in d.clauses]
            for c in heads:
                find(c)
            for c in heads[1:]:
                parent[find(c)] = find(heads[0])
    groups: Dict[str, Set[str]] = {}
    for c in parent:
        groups.setdefault(find(c), set()).add(c)
    return list(groups.values())


def check_program(p: Program, target: Optional[Exp] = None) -> None:
    """
    Check the well-formedness rules of the object language

    Raises:
        WellFormednessError: Naming the offending function, constructor or variable
    """
    names: Set[str] = set()
    for d in p.defs:
        if d.name in names:
            raise WellFormednessError(f"Duplicate definition of {d.name}", name=d.name)
        names.add(d.name)
        if not VARIABLE_NAME_RE.match(d.name):
            raise WellFormednessError(f"Invalid function name: {d.name}", name=d.name)
        if isinstance(d, PatternDef):
            if not d.clauses:
                raise WellFormednessError(f"Function {d.name} has no clauses", name=d.name)
            seen: Set[str] = set()
            for clause in d.clauses:
                if len(clause.params) != len(d.clauses[0].params):
                    raise WellFormednessError(
                        f"Clauses of {d.name} differ in parameter count", name=d.name
                    )
                if clause.pattern.constructor in seen:
                    raise WellFormednessError(
                        f"Overlapping clauses for {clause.pattern.constructor} in {d.name}",
                        name=d.name,
                    )
                seen.add(clause.pattern.constructor)
        for body, bound in _def_bodies(d):
            _check_distinct(bound, d.name)
            unbound = [v for v in free_vars(body) if v not in bound]
            if unbound:
                raise WellFormednessError(
                    f"Unbound variable {unbound[0]} in {d.name}", name=unbound[0]
                )

    arities = _constructor_arities(p, [target] if target is not None else [])
    for d in p.defs:
        for body, _ in _def_bodies(d):
            _check_calls(p, body, arities)
    if target is not None:
        _check_calls(p, target, arities)

    groups = constructor_groups(p)
    for d in p.defs:
        if isinstance(d, PatternDef):
            heads = {clause.pattern.constructor for clause in d.clauses}
            group = next(g for g in groups if heads <= g)
            if heads != group:
                missing = sorted(group - heads)
                raise WellFormednessError(
                    f"Non-exhaustive clauses in {d.name}: missing {', '.join(missing)}",
                    name=d.name,
                )


# ---------------------------------------------------------------------------
# Call-by-name reference interpreter


@dataclasses.dataclass(frozen=True)
class Evaluated:
    value: Value
    steps: int


@dataclasses.dataclass(frozen=True)
class OutOfFuel:
    steps: int


@dataclasses.dataclass(frozen=True)
class Stuck:
    reason: str
    steps: int


EvalResult = Union[Evaluated, OutOfFuel, Stuck]


class _Halt(Exception):
    def __init__(self, reason: Optional[str] = None):
        super().__init__(reason)
        self.reason = reason


class _Interpreter:
    def __init__(self, program: Program, fuel: int):
        self.program = program
        self.fuel = fuel
        self.steps = 0

    def tick(self) -> None:
        if self.steps >= self.fuel:
            raise _Halt()
        self.steps += 1

    def whnf(self, e: Exp) -> Call:
        # Pattern-matching calls waiting for their scrutinee, innermost last
        waiting: List[Tuple[Call, PatternDef]] = []
        while True:
            if isinstance(e, Var):
                raise _Halt(f"free variable {e.name}")
            assert isinstance(e, Call)
            if e.is_constructor:
                if not waiting:
                    return e
                call, matcher = waiting.pop()
                clause = matcher.clause_for(e.name)
                if clause is None:
                    raise _Halt(f"no clause of {matcher.name} for {e.name}")
                self.tick()
                s: Dict[str, Exp] = dict(zip(clause.pattern.variables, e.args))
                s.update(zip(clause.params, call.args[1:]))
                e = substitute(clause.body, s)
                continue
            d = self.program.get(e.name)
            if d is None:
                raise _Halt(f"undefined function {e.name}")
            if isinstance(d, OrdinaryDef):
                self.tick()
                e = substitute(d.body, dict(zip(d.params, e.args)))
                continue
            waiting.append((e, d))
            e = e.args[0]

    def normalize(self, e: Exp) -> Value:
        done: List[Value] = []
        stack: List[Tuple[Exp, Optional[Call]]] = [(e, None)]
        while stack:
            node, head = stack.pop()
            if head is None:
                head = self.whnf(node)
                stack.append((node, head))
                stack.extend((a, None) for a in reversed(head.args))
                continue
            done.append(Value(head.name, _pop_args(done, len(head.args))))
        return done[0]


def eval_cbn(
    program: Program,
    e: Exp,
    env: Optional[Mapping[str, Value]] = None,
    fuel: int = 100_000,
) -> EvalResult:
    """
    Evaluate `e` to a ground value with call-by-name semantics

    One fuel unit is consumed per function unfolding or clause selection;
    building constructors is free. A zero budget evaluates nothing.

    Args:
        program: Function definitions
        e: Expression to evaluate
        env: Ground values for the free variables of `e`
        fuel: Step budget

    Returns:
        Evaluated with the value and steps used, OutOfFuel, or Stuck
    """
    if fuel <= 0:
        return OutOfFuel(0)
    env = env or {}
    interpreter = _Interpreter(program, fuel)
    closed = substitute(e, {name: value.to_exp() for name, value in env.items()})
    try:
        value = interpreter.normalize(closed)
    except _Halt as halt:
        if halt.reason is None:
            return OutOfFuel(interpreter.steps)
        return Stuck(halt.reason, interpreter.steps)
    return Evaluated(value, interpreter.steps)
