"""
Random ground values for the free variables of a target expression.

The object language is untyped, so each argument position ("slot") is
assigned the set of constructors that can flow into it by unifying slots
through variable occurrences and call results.
"""

import random
from typing import Dict, Hashable, List, Optional, Set, Tuple

from .config import get_config
from .lang import Call, Exp, OrdinaryDef, Program, Value, Var
from .logging_config import get_logger

logger = get_logger(__name__)

DEFAULT_CONSTRUCTOR = "Unit"

Slot = Tuple[Hashable, ...]


class _SlotUnion:
    def __init__(self) -> None:
        self.parent: Dict[Slot, Slot] = {}
        self.members: Dict[Slot, Set[str]] = {}

    def find(self, slot: Slot) -> Slot:
        if slot not in self.parent:
            self.parent[slot] = slot
            self.members[slot] = set()
        root = slot
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[slot] != root:
            self.parent[slot], slot = root, self.parent[slot]
        return root

    def union(self, a: Slot, b: Slot) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            self.members[ra] |= self.members.pop(rb)

    def add(self, slot: Slot, constructors: Set[str]) -> None:
        self.members[self.find(slot)] |= constructors

    def constructors(self, slot: Slot) -> Set[str]:
        return self.members[self.find(slot)]


def _arg_slot(call: Call, i: int) -> Slot:
    return ("con" if call.is_constructor else "fn", call.name, i)


class SlotInference:
    """Infers which constructors may appear in each variable position"""

    def __init__(self, program: Program):
        self.program = program
        self.slots = _SlotUnion()
        self.arities: Dict[str, int] = {}
        for d in program.defs:
            if isinstance(d, OrdinaryDef):
                scope = {v: ("fn", d.name, i) for i, v in enumerate(d.params)}
                self._flow(d.body, ("ret", d.name), scope)
                continue
            heads = set()
            for clause in d.clauses:
                pattern = clause.pattern
                heads.add(pattern.constructor)
                self.arities[pattern.constructor] = len(pattern.variables)
                scope = {v: ("con", pattern.constructor, k) for k, v in enumerate(pattern.variables)}
                scope.update({v: ("fn", d.name, i + 1) for i, v in enumerate(clause.params)})
                self._flow(clause.body, ("ret", d.name), scope)
            self.slots.add(("fn", d.name, 0), heads)

    def _flow(self, e: Exp, into: Slot, scope: Dict[str, Slot]) -> None:
        if isinstance(e, Var):
            self.slots.union(into, scope.get(e.name, ("var", e.name)))
            return
        assert isinstance(e, Call)
        if e.is_constructor:
            self.arities[e.name] = len(e.args)
            self.slots.add(into, {e.name})
        else:
            self.slots.union(into, ("ret", e.name))
        for i, arg in enumerate(e.args):
            self._flow(arg, _arg_slot(e, i), scope)

    def target_slots(self, target: Exp) -> Dict[str, Slot]:
        """Slot of each free variable of the target expression"""
        scope: Dict[str, Slot] = {}

        def visit(e: Exp) -> None:
            if isinstance(e, Call):
                for i, arg in enumerate(e.args):
                    if isinstance(arg, Var):
                        slot = _arg_slot(e, i)
                        if arg.name in scope:
                            self.slots.union(scope[arg.name], slot)
                        scope[arg.name] = slot
                    else:
                        visit(arg)
                if e.is_constructor:
                    self.arities[e.name] = len(e.args)

        if isinstance(target, Var):
            scope[target.name] = ("var", target.name)
        visit(target)
        return scope

    def constructors(self, slot: Slot) -> List[str]:
        return sorted(self.slots.constructors(slot))


class ValueSampler:
    """
    Draws random ground values for the free variables of an expression

    Constructors are chosen uniformly within a slot's constructor set. A value
    is at most `max_depth` constructors deep: on the last level only nullary
    constructors are drawn, falling back to a nullary constructor of the
    program when the slot has none.
    """

    def __init__(
        self,
        program: Program,
        target: Exp,
        seed: Optional[int] = None,
        max_depth: Optional[int] = None,
    ):
        config = get_config()
        self.seed = config.seed if seed is None else seed
        self.max_depth = max_depth or config.value_depth
        self.rng = random.Random(self.seed)
        self.inference = SlotInference(program)
        self.variables = self.inference.target_slots(target)
        nullary = sorted(c for c, n in self.inference.arities.items() if n == 0)
        self.default = nullary[0] if nullary else DEFAULT_CONSTRUCTOR

    def _value(self, slot: Slot, depth: int) -> Value:
        candidates = self.inference.constructors(slot)
        if depth + 1 >= self.max_depth:
            candidates = [c for c in candidates if self.inference.arities.get(c, 0) == 0]
        if not candidates:
            return Value(self.default)
        constructor = self.rng.choice(candidates)
        arity = self.inference.arities.get(constructor, 0)
        return Value(
            constructor,
            tuple(self._value(("con", constructor, k), depth + 1) for k in range(arity)),
        )

    def sample_env(self) -> Dict[str, Value]:
        return {name: self._value(slot, 0) for name, slot in self.variables.items()}

    def value_for(self, slot: Slot) -> Value:
        return self._value(slot, 0)
