"""
Unit tests for the object language
"""

import pytest

from mrsc_optsize.exceptions import ParseError, WellFormednessError
from mrsc_optsize.lang import (
    Call,
    CallKind,
    Evaluated,
    OrdinaryDef,
    OutOfFuel,
    PatternDef,
    Stuck,
    Value,
    Var,
    con,
    eval_cbn,
    exp_to_value,
    find_renaming,
    free_vars,
    fun,
    parse_expression,
    parse_program,
    print_program,
    substitute,
)

from conftest import APPEND_SOURCE


def value(text):
    v = exp_to_value(parse_expression(text))
    assert v is not None
    return v


class TestParsing:
    """Test suite for program parsing"""

    def test_parse_pattern_definition(self, append_program):
        """Test clauses are grouped into one pattern-matching definition"""
        d = append_program.lookup("append")

        assert isinstance(d, PatternDef)
        assert d.arity == 2
        assert [c.pattern.constructor for c in d.clauses] == ["Nil", "Cons"]
        assert d.clause_for("Cons").pattern.variables == ("x", "xs")

    def test_parse_ordinary_definition(self, exp_growth_program):
        """Test an ordinary definition"""
        d = exp_growth_program.lookup("f")

        assert isinstance(d, OrdinaryDef)
        assert d.params == ("w",)
        assert d.body == con("B", Var("w"), Var("w"))

    def test_parse_expression_directive(self):
        """Test the target expression follows the definitions"""
        program, target = parse_program(APPEND_SOURCE + "expression: append(xs, Nil);")

        assert "append" in program
        assert target == fun("append", Var("xs"), con("Nil"))

    def test_comments_are_ignored(self):
        """Test line comments"""
        program, target = parse_program("-- identity\nid(x) = x; -- trailing\n")

        assert target is None
        assert program.lookup("id").body == Var("x")

    def test_nullary_constructor_parentheses_optional(self):
        """Test Nil and Nil() denote the same constructor"""
        assert parse_expression("Nil") == parse_expression("Nil()")

    def test_parse_expression_kinds(self):
        """Test uppercase names are constructors and lowercase calls are functions"""
        e = parse_expression("f(x, C(y))")

        assert isinstance(e, Call)
        assert e.kind is CallKind.FUNCTION
        assert e.args[1].kind is CallKind.CONSTRUCTOR

    def test_missing_semicolon_position(self):
        """Test syntax errors report line and column"""
        with pytest.raises(ParseError) as exc_info:
            parse_program("f(x) = x")

        assert exc_info.value.line == 1
        assert exc_info.value.column == 9

    def test_error_on_second_line(self):
        """Test line numbers advance with newlines"""
        with pytest.raises(ParseError) as exc_info:
            parse_program("f(x) = x;\ng(x) = ;")

        assert exc_info.value.line == 2
        assert exc_info.value.column == 8

    def test_unexpected_character(self):
        """Test characters outside the grammar"""
        with pytest.raises(ParseError):
            parse_program("f(x) = x + x;")

    def test_pattern_outside_first_position(self):
        """Test patterns are only allowed first"""
        with pytest.raises(ParseError):
            parse_program("f(x, Nil) = x;")

    def test_text_after_expression_directive(self):
        """Test the directive ends the program"""
        with pytest.raises(ParseError):
            parse_program("id(x) = x;\nexpression: id(y)\nid2(x) = x;")


class TestWellFormedness:
    """Test suite for well-formedness checks"""

    @pytest.mark.parametrize(
        "source,name",
        [
            ("f(x) = x; f(y) = y;", "f"),
            ("f(x) = g(x);", "g"),
            ("f(x) = y;", "y"),
            ("f(x, x) = x;", "x"),
            ("f(A) = A; f(A) = A;", "f"),
            ("f(A, x) = x; f(B) = B;", "f"),
            ("f(x) = A(x); g(x) = A;", "A"),
            ("f(x) = f(x, x);", "f"),
            ("f(A) = A; g(A) = A; g(B) = B;", "f"),
        ],
    )
    def test_violation_names_offender(self, source, name):
        """Test each violation names the offending entity"""
        with pytest.raises(WellFormednessError) as exc_info:
            parse_program(source)

        assert exc_info.value.name == name

    def test_undefined_function_in_target(self):
        """Test the target expression is checked too"""
        with pytest.raises(WellFormednessError):
            parse_program("id(x) = x;\nexpression: nope(y)")

    def test_lookup_unknown_function(self, append_program):
        """Test lookup of an undefined function"""
        with pytest.raises(WellFormednessError):
            append_program.lookup("reverse")

    def test_exhaustive_program_accepted(self, corpus):
        """Test every bundled example is well formed"""
        assert len(corpus) == 8


class TestVariables:
    """Test suite for substitution, free variables and renaming"""

    def test_free_vars_first_occurrence_order(self):
        """Test free variables are listed once, in order"""
        assert free_vars(parse_expression("f(y, g(x, y), z)")) == ["y", "x", "z"]

    def test_substitute_is_simultaneous(self):
        """Test substitution does not rewrite its own output"""
        e = parse_expression("f(x, y)")

        result = substitute(e, {"x": Var("y"), "y": Var("x")})

        assert result == parse_expression("f(y, x)")

    def test_find_renaming(self):
        """Test a renaming between two configurations"""
        renaming = find_renaming(parse_expression("f(x, g(y))"), parse_expression("f(a, g(b))"))

        assert renaming == {"x": "a", "y": "b"}

    @pytest.mark.parametrize(
        "ancestor,current",
        [
            ("f(x, x)", "f(a, b)"),
            ("f(x, y)", "f(a, a)"),
            ("f(x)", "f(A)"),
            ("f(x)", "g(x)"),
            ("C(x)", "c(x)"),
        ],
    )
    def test_no_renaming(self, ancestor, current):
        """Test non-renamings are rejected, including non-injective ones"""
        assert find_renaming(parse_expression(ancestor), parse_expression(current)) is None


class TestPrinting:
    """Test suite for printing"""

    def test_print_expression(self):
        """Test expressions print in source syntax"""
        assert str(parse_expression("Cons(x, append(xs, Nil))")) == "Cons(x, append(xs, Nil()))"

    def test_print_program_reparses(self, append_program):
        """Test printed programs parse back to the same definitions"""
        target = parse_expression("append(xs, ys)")
        text = print_program(append_program, target)

        program, parsed_target = parse_program(text)

        assert program.defs == append_program.defs
        assert parsed_target == target
        assert text.endswith("expression: append(xs, ys)\n")


class TestEvalCBN:
    """Test suite for the call-by-name interpreter"""

    def test_evaluate_append(self, append_program):
        """Test evaluation with an environment and step counting"""
        result = eval_cbn(
            append_program,
            parse_expression("append(xs, ys)"),
            {"xs": value("Cons(A, Nil)"), "ys": value("Cons(B, Nil)")},
        )

        assert result == Evaluated(value("Cons(A, Cons(B, Nil))"), 2)

    def test_out_of_fuel(self, append_program):
        """Test the budget bounds the number of steps"""
        result = eval_cbn(
            append_program,
            parse_expression("append(Cons(A, Nil), Nil)"),
            fuel=1,
        )

        assert result == OutOfFuel(1)

    def test_zero_fuel(self, append_program):
        """Test a zero budget evaluates nothing"""
        assert eval_cbn(append_program, con("A"), fuel=0) == OutOfFuel(0)

    def test_constructors_are_free(self, append_program):
        """Test building values takes no steps"""
        assert eval_cbn(append_program, parse_expression("C(A, B)")) == Evaluated(
            value("C(A, B)"), 0
        )

    def test_call_by_name(self):
        """Test unused arguments are never evaluated"""
        program, _ = parse_program("const(x, y) = x;\nloop(x) = loop(x);")

        result = eval_cbn(program, parse_expression("const(A, loop(B))"), fuel=50)

        assert result == Evaluated(Value("A"), 1)

    def test_stuck_on_free_variable(self, append_program):
        """Test an unbound variable blocks evaluation"""
        result = eval_cbn(append_program, parse_expression("append(xs, Nil)"))

        assert isinstance(result, Stuck)
        assert "xs" in result.reason

    def test_long_input(self, append_program):
        """Test inputs far deeper than the interpreter stack evaluate normally"""
        xs = Value("Nil")
        for _ in range(6000):
            xs = Value("Cons", (Value("A"), xs))

        result = eval_cbn(append_program, parse_expression("append(xs, Nil)"), {"xs": xs})

        assert isinstance(result, Evaluated)
        assert result.steps == 6001
        length, cell = 0, result.value
        while cell.constructor == "Cons":
            length, cell = length + 1, cell.args[1]
        assert (length, cell.constructor) == (6000, "Nil")
        assert str(result.value).count("Cons(A(), ") == 6000

    def test_deeply_nested_scrutinee(self):
        """Test a long chain of pattern-matching calls on call results"""
        program, _ = parse_program("pred(Z) = Z;\npred(S(n)) = n;")
        e = con("Z")
        for _ in range(5000):
            e = fun("pred", e)

        assert eval_cbn(program, e) == Evaluated(Value("Z"), 5000)

    def test_exp_to_value(self):
        """Test only ground constructor terms are values"""
        assert exp_to_value(parse_expression("S(Z)")) == Value("S", (Value("Z"),))
        assert exp_to_value(parse_expression("S(n)")) is None
