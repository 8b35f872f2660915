"""
Unit tests for multi-result supercompilation
"""

import pytest

from mrsc_optsize.drive import MConf, MDSRCases, MDSRLeaf
from mrsc_optsize.engine import MultiResultSupercompiler, embeds, mr_scp
from mrsc_optsize.exceptions import GraphSetBudgetError
from mrsc_optsize.graphset import (
    Alternative,
    CGCases,
    CGCon,
    CGFold,
    CGLeaf,
    GSBuild,
    GSNone,
    count_graphs,
    first_graph,
)
from mrsc_optsize.lang import (
    Pattern,
    Var,
    find_renaming,
    parse_expression,
    parse_program,
)
from mrsc_optsize.performance import get_performance_stats


def exp(text):
    return parse_expression(text)


class TestEmbedding:
    """Test suite for homeomorphic embedding"""

    @pytest.mark.parametrize(
        "a,b",
        [
            ("x", "y"),
            ("f(x)", "f(g(x))"),
            ("A", "B(A)"),
            ("f(x, y)", "f(S(x), S(S(y)))"),
            ("C(x)", "C(x)"),
        ],
    )
    def test_embeds(self, a, b):
        """Test diving and coupling"""
        assert embeds(exp(a), exp(b))

    @pytest.mark.parametrize(
        "a,b",
        [
            ("f(x)", "g(x)"),
            ("B(A)", "A"),
            ("S(x)", "x"),
            ("f(x, x)", "f(x)"),
            ("C(x)", "c(x)"),
        ],
    )
    def test_does_not_embed(self, a, b):
        """Test differing symbols and shrinking terms"""
        assert not embeds(exp(a), exp(b))

    def test_repeated_variables_do_not_fold(self):
        """Test a call repeating its arguments is whistled rather than folded"""
        ancestor = exp("match(pp1, ss2, op1, os1)")
        current = exp("match(op1, ss3, op1, ss3)")

        assert find_renaming(ancestor, current) is None
        assert embeds(ancestor, current)


class TestMultiResultSupercompiler:
    """Test suite for graph-set construction"""

    def test_variable(self, append_program):
        """Test a variable configuration gives a single leaf"""
        gs = mr_scp(append_program, Var("x"))

        assert gs == GSBuild(Var("x"), (Alternative(MConf(MDSRLeaf(Var("x")), Var("x")), ()),))
        assert first_graph(gs) == CGLeaf(Var("x"), Var("x"))

    def test_fold_to_root(self, append_program):
        """Test the recursive call folds back to the root configuration"""
        gs = mr_scp(append_program, exp("append(xs, ys)"))

        assert count_graphs(gs) == 1
        graph = first_graph(gs)
        assert isinstance(graph, CGCases)
        assert graph.var == "xs"
        nil_pattern, nil_branch = graph.branches[0]
        assert nil_pattern == Pattern("Nil")
        assert nil_branch == CGLeaf(Var("ys"), Var("ys"))
        cons_pattern, cons_branch = graph.branches[1]
        assert cons_pattern == Pattern("Cons", ("x0", "xs0"))
        assert cons_branch == CGCon(
            exp("Cons(x0, append(xs0, ys))"),
            "Cons",
            (
                CGLeaf(Var("x0"), Var("x0")),
                CGFold(exp("append(xs0, ys)"), 2, {"xs": "xs0", "ys": "ys"}),
            ),
        )

    def test_case_step_recorded(self, append_program):
        """Test the root alternative is the case analysis"""
        gs = mr_scp(append_program, exp("append(xs, ys)"))

        assert isinstance(gs, GSBuild)
        assert len(gs.alternatives) == 1
        assert isinstance(gs.alternatives[0].conf.step, MDSRCases)

    def test_whistle_prunes_growing_configurations(self):
        """Test growing calls are cut off by the whistle"""
        program, _ = parse_program("grow(x) = grow(S(x));")

        gs = mr_scp(program, exp("grow(z)"))

        assert isinstance(gs, GSBuild)
        let_alternative, unfold_alternative = gs.alternatives
        assert isinstance(let_alternative.children[0], GSNone)
        assert isinstance(unfold_alternative.children[0], GSNone)
        assert count_graphs(gs) == 0
        assert first_graph(gs) is None

    def test_node_budget(self, append_program):
        """Test the safety valve stops construction"""
        with pytest.raises(GraphSetBudgetError) as exc_info:
            mr_scp(append_program, exp("append(xs, ys)"), max_graphset_nodes=2)

        assert exc_info.value.details == {"limit": 2}

    def test_node_count_and_metrics(self, append_program):
        """Test the run reports its node count"""
        supercompiler = MultiResultSupercompiler(append_program)
        supercompiler.run(exp("append(xs, ys)"))

        assert supercompiler.nodes == 5
        stats = get_performance_stats()
        assert stats["mrscp.nodes"]["latest"] == 5
        assert stats["counters"]["mrscp.success"] == 1

    def test_runs_are_independent(self, append_program):
        """Test fresh names restart with every run"""
        supercompiler = MultiResultSupercompiler(append_program)

        assert supercompiler.run(exp("append(xs, ys)")) == supercompiler.run(
            exp("append(xs, ys)")
        )
