"""
Tests for the command-line interface
"""

import io
import logging

import pytest
from pydantic import ValidationError as PydanticValidationError

from mrsc_optsize import __version__, cli
from mrsc_optsize.cli import (
    EXIT_EMPTY,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_USAGE,
    StatsRow,
    build_parser,
    corpus_files,
    example_name,
    format_stats_table,
    load_source,
    main,
    run_check,
    run_stats,
    write_stats_csv,
)
from mrsc_optsize.exceptions import ValidationError
from mrsc_optsize.lang import (
    Evaluated,
    Program,
    Value,
    con,
    eval_cbn,
    parse_expression,
    parse_program,
)

from conftest import APPEND_SOURCE

APPEND_FILE = "-- name: append\n" + APPEND_SOURCE + "expression: append(xs, ys)\n"


@pytest.fixture
def append_file(tmp_path):
    path = tmp_path / "append.scp"
    path.write_text(APPEND_FILE)
    return path


@pytest.fixture
def growing_file(tmp_path):
    path = tmp_path / "grow.scp"
    path.write_text("grow(x) = grow(S(x));\nexpression: grow(z)\n")
    return path


class TestLoading:
    """Test suite for source loading"""

    def test_load_source(self, append_file):
        """Test a file with a header and an expression line"""
        program, target, name = load_source(append_file)

        assert "append" in program
        assert str(target) == "append(xs, ys)"
        assert name == "append"

    def test_expression_override(self, append_file):
        """Test -e replaces the file's target"""
        _, target, _ = load_source(append_file, "append(ys, xs)")

        assert str(target) == "append(ys, xs)"

    def test_missing_target(self, tmp_path):
        """Test a file without a target needs -e"""
        path = tmp_path / "lib.scp"
        path.write_text(APPEND_SOURCE)

        with pytest.raises(ValidationError) as exc_info:
            load_source(path)

        assert exc_info.value.error_code == "TARGET"

    def test_missing_file(self, tmp_path):
        """Test unreadable files"""
        with pytest.raises(ValidationError) as exc_info:
            load_source(tmp_path / "nope.scp")

        assert exc_info.value.error_code == "IO"

    def test_example_name_falls_back_to_stem(self, tmp_path):
        """Test files without a name header are named after the file"""
        assert example_name(tmp_path / "05-evenodd.scp", "f(x) = x;") == "05-evenodd"

    def test_corpus_files_sorted(self, corpus_dir):
        """Test the bundled examples keep their numbered order"""
        names = [p.name for p in corpus_files(corpus_dir)]

        assert names[0] == "01-doubleapp.scp"
        assert names[-1] == "08-lenintersperse.scp"
        assert len(names) == 8


class TestRunCommand:
    """Test suite for `mrsc run`"""

    def test_run_prints_residual_program(self, append_file, capsys):
        """Test the residual program is printed in source syntax"""
        assert main(["run", str(append_file), "--query", "first"]) == EXIT_OK

        out = capsys.readouterr().out
        assert out.startswith("-- 1 graphs in the graph-set\n")
        assert "-- result 1 (first): graph size all-nodes 5, skip-unfold 5\n" in out
        assert out.rstrip().endswith("expression: f_(xs, ys)")

    def test_residual_output_is_a_program(self, append_file, capsys):
        """Test printed residual programs parse back and compute append"""
        main(["run", str(append_file)])

        residual, target = parse_program(capsys.readouterr().out)
        env = {
            "xs": Value("Cons", (Value("A"), Value("Nil"))),
            "ys": Value("Cons", (Value("B"), Value("Nil"))),
        }
        result = eval_cbn(residual, target, env)

        assert isinstance(result, Evaluated)
        assert str(result.value) == "Cons(A(), Cons(B(), Nil()))"

    def test_enumerate(self, append_file, capsys):
        """Test enumeration stops at the graph count"""
        assert main(["run", str(append_file), "--query", "enumerate:5"]) == EXIT_OK

        assert capsys.readouterr().out.count("-- result ") == 1

    def test_empty_result(self, growing_file, capsys):
        """Test an empty graph-set exits with code 2"""
        assert main(["run", str(growing_file)]) == EXIT_EMPTY

        assert "No configuration graph" in capsys.readouterr().err

    def test_invalid_query(self, append_file, capsys):
        """Test an unknown query is a usage error"""
        assert main(["run", str(append_file), "--query", "best"]) == EXIT_USAGE

        assert "Unknown query" in capsys.readouterr().err

    def test_parse_error(self, tmp_path, capsys):
        """Test syntax errors are reported with their position"""
        path = tmp_path / "bad.scp"
        path.write_text("f(x) = x\n")

        assert main(["run", str(path)]) == EXIT_USAGE
        assert "line 2, column 1" in capsys.readouterr().err

    def test_dot_export(self, append_file, tmp_path, capsys):
        """Test the graph-set is written as DOT"""
        dot = tmp_path / "out.dot"

        assert main(["run", str(append_file), "--dot", str(dot)]) == EXIT_OK
        assert dot.read_text().startswith("digraph graphset {")

    def test_dot_graph_export(self, append_file, tmp_path, capsys):
        """Test the selected graph is written as DOT"""
        dot = tmp_path / "out.dot"

        main(["run", str(append_file), "--dot", str(dot), "--dot-graph"])

        assert dot.read_text().startswith("digraph confgraph {")


class TestEvalCommand:
    """Test suite for `mrsc eval`"""

    def test_eval(self, append_file, capsys):
        """Test the value and the steps used are printed"""
        code = main(
            ["eval", str(append_file), "--env", "xs=Cons(A, Nil)", "ys=Nil"]
        )

        assert code == EXIT_OK
        assert capsys.readouterr().out == "value: Cons(A(), Nil())\nsteps: 2\n"

    def test_out_of_fuel(self, append_file, capsys):
        """Test running out of fuel fails"""
        code = main(
            ["eval", str(append_file), "--fuel", "1", "--env", "xs=Cons(A, Nil)", "ys=Nil"]
        )

        assert code == EXIT_USAGE
        assert "out of fuel after 1 steps" in capsys.readouterr().err

    def test_stuck(self, append_file, capsys):
        """Test an unbound variable is reported"""
        assert main(["eval", str(append_file)]) == EXIT_USAGE

        assert "free variable xs" in capsys.readouterr().err

    def test_bad_binding(self, append_file, capsys):
        """Test a non-ground binding is a usage error"""
        assert main(["eval", str(append_file), "--env", "xs=Cons(y, Nil)"]) == EXIT_USAGE


class TestCheckCommand:
    """Test suite for `mrsc check`"""

    def test_check_passes(self, append_file, capsys):
        """Test every query's residual agrees with the original"""
        assert main(["check", str(append_file), "--samples", "20", "--seed", "4"]) == EXIT_OK

        out = capsys.readouterr().out
        for query in ("first", "last", "min", "min-skip-unfold"):
            assert f"{query}: 20 trials, 0 mismatches, 0 skipped" in out
        assert out.endswith("seed: 4\n")

    def test_zero_samples(self, append_file, capsys):
        """Test zero trials pass vacuously"""
        assert main(["check", str(append_file), "--samples", "0"]) == EXIT_OK

        assert "check passes vacuously" in capsys.readouterr().out

    def test_negative_samples(self, append_file, capsys):
        """Test negative counts are rejected"""
        assert main(["check", str(append_file), "--samples", "-1"]) == EXIT_USAGE

    def test_mismatch(self, append_file, capsys, monkeypatch):
        """Test a wrong residual program exits with code 3"""
        monkeypatch.setattr(cli, "residual_program", lambda g: (Program(()), con("Nil")))

        assert main(["check", str(append_file), "--samples", "20"]) == EXIT_MISMATCH

        assert "mismatch in first" in capsys.readouterr().out

    def test_check_is_logged(self, append_program, caplog):
        """Test a check run logs its duration and outcome"""
        target = parse_expression("append(xs, ys)", append_program)

        with caplog.at_level(logging.INFO, logger="mrsc_optsize"):
            run_check(append_program, target, samples=2, fuel=1000, seed=0, out=io.StringIO())

        record = [r for r in caplog.records if r.getMessage() == "check completed"][-1]
        assert record.operation == "check"
        assert record.status == "success"
        assert record.duration >= 0


class TestStatsCommand:
    """Test suite for `mrsc stats`"""

    def test_stats_rows(self, append_file, tmp_path):
        """Test one row per file, continuing after failures"""
        (tmp_path / "broken.scp").write_text("f(x) = ;\n")
        err = io.StringIO()

        rows = run_stats(tmp_path, err)

        assert [(r.example, r.first, r.last, r.min, r.max, r.count) for r in rows] == [
            ("append", 5, 5, 5, 5, 1)
        ]
        assert "broken.scp" in err.getvalue()

    def test_stats_is_logged(self, append_file, tmp_path, caplog):
        """Test a stats run logs its duration and outcome"""
        with caplog.at_level(logging.INFO, logger="mrsc_optsize"):
            run_stats(tmp_path, io.StringIO())

        record = [r for r in caplog.records if r.getMessage() == "stats completed"][-1]
        assert record.operation == "stats"
        assert record.status == "success"

    def test_csv(self, append_file, tmp_path, capsys):
        """Test machine-readable output"""
        assert main(["stats", str(tmp_path), "--csv"]) == EXIT_OK

        assert capsys.readouterr().out == "example,first,last,min,max,count\nappend,5,5,5,5,1\n"

    def test_table(self):
        """Test the aligned table layout"""
        rows = [
            StatsRow(example="double append", first=12, last=10, min=10, max=19, count=3),
            StatsRow(example="KMP test", first=203, last=39, min=38, max=1055),
        ]

        lines = format_stats_table(rows).splitlines()

        assert lines[0].split() == ["Example", "First", "Last", "Min", "Max", "Count", "Time(s)"]
        assert lines[1].split() == ["double", "append", "12", "10", "10", "19", "3"]
        assert lines[2].split() == ["KMP", "test", "203", "39", "38", "1055"]

    def test_write_csv(self):
        """Test CSV rows"""
        out = io.StringIO()

        write_stats_csv([StatsRow(example="idNat idempotent", first=9, last=6, min=6, max=12)], out)

        assert out.getvalue().splitlines()[1] == "idNat idempotent,9,6,6,12,"

    def test_row_ordering_enforced(self):
        """Test rows with out-of-order sizes are rejected"""
        with pytest.raises(PydanticValidationError):
            StatsRow(example="bad", first=1, last=5, min=2, max=4)

    def test_not_a_directory(self, append_file, capsys):
        """Test stats needs a directory"""
        assert main(["stats", str(append_file)]) == EXIT_USAGE


class TestArgumentHandling:
    """Test suite for argument parsing"""

    def test_missing_command(self, capsys):
        """Test a subcommand is required"""
        assert main([]) == EXIT_USAGE

    def test_unknown_command(self, capsys):
        """Test unknown subcommands are usage errors"""
        assert main(["optimize"]) == EXIT_USAGE

    def test_version(self, capsys):
        """Test --version"""
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])

        assert exc_info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_defaults_from_config(self, monkeypatch):
        """Test option defaults come from the configuration"""
        monkeypatch.setenv("MRSC_CHECK_SAMPLES", "7")

        args = build_parser().parse_args(["check", "f.scp"])

        assert args.samples == 7
