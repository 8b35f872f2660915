"""
Pytest configuration and shared fixtures
"""

import logging
import os
from pathlib import Path
from typing import Dict, Tuple

import pytest

from mrsc_optsize.config import reset_config
from mrsc_optsize.engine import ensure_recursion_limit
from mrsc_optsize.lang import Exp, Program, parse_program
from mrsc_optsize.performance import reset_performance_stats

# Configure logging for tests
logging.basicConfig(level=logging.WARNING)

ensure_recursion_limit()

CORPUS_DIR = Path(__file__).parent.parent / "mrsc_optsize" / "corpus"

CORPUS_FILES = {
    "doubleapp": "01-doubleapp.scp",
    "kmp": "02-kmp.scp",
    "eqboolsym": "03-eqboolsym.scp",
    "expgrowth": "04-expgrowth.scp",
    "evenodd": "05-evenodd.scp",
    "idnat": "06-idnat.scp",
    "takelength": "07-takelength.scp",
    "lenintersperse": "08-lenintersperse.scp",
}

APPEND_SOURCE = """
append(Nil, ys) = ys;
append(Cons(x, xs), ys) = Cons(x, append(xs, ys));
"""

EXP_GROWTH_SOURCE = """
g(Nil, y) = y;
g(Cons(x, xs), y) = f(g(xs, y));
f(w) = B(w, w);
"""


def load_corpus(key: str) -> Tuple[Program, Exp]:
    program, target = parse_program((CORPUS_DIR / CORPUS_FILES[key]).read_text())
    assert target is not None
    return program, target


@pytest.fixture
def corpus_dir() -> Path:
    """Directory of the bundled example programs"""
    return CORPUS_DIR


@pytest.fixture
def corpus() -> Dict[str, Tuple[Program, Exp]]:
    """Every bundled example, parsed"""
    return {key: load_corpus(key) for key in CORPUS_FILES}


@pytest.fixture
def append_program() -> Program:
    """The list append program"""
    return parse_program(APPEND_SOURCE)[0]


@pytest.fixture
def exp_growth_program() -> Program:
    """The exponential growth program"""
    return parse_program(EXP_GROWTH_SOURCE)[0]


@pytest.fixture
def temp_log_file(tmp_path):
    """Temporary log file for testing"""
    log_file = tmp_path / "test.log"
    return str(log_file)


@pytest.fixture
def env_vars():
    """Environment variables for testing"""
    return {
        "MRSC_LOG_LEVEL": "DEBUG",
        "MRSC_LOG_FORMAT": "structured",
        "MRSC_MAX_GRAPHSET_NODES": "5000",
        "MRSC_SEED": "7",
    }


@pytest.fixture(autouse=True)
def cleanup_logging():
    """Cleanup logging configuration after each test"""
    yield

    # Clear handlers from our loggers
    for logger_name in ["mrsc_optsize", "mrsc_optsize.test"]:
        logger = logging.getLogger(logger_name)
        logger.handlers.clear()
        logger.setLevel(logging.NOTSET)


@pytest.fixture(autouse=True)
def reset_environment():
    """Reset environment variables and cached settings after each test"""
    original_env = os.environ.copy()
    yield

    # Restore original environment
    os.environ.clear()
    os.environ.update(original_env)
    reset_config()
    reset_performance_stats()


# Pytest markers for different test types
def pytest_configure(config):
    """Configure pytest markers"""
    config.addinivalue_line("markers", "unit: mark test as a unit test")
    config.addinivalue_line("markers", "integration: mark test as an integration test")
    config.addinivalue_line("markers", "property: mark test as a property-based test")
    config.addinivalue_line("markers", "slow: mark test as slow running")


# Pytest collection modifiers
def pytest_collection_modifyitems(config, items):
    """Modify test collection"""
    # Add markers based on test file names
    for item in items:
        if "test_corpus" in item.nodeid or "test_cli" in item.nodeid:
            item.add_marker(pytest.mark.integration)
        else:
            item.add_marker(pytest.mark.unit)

        if "test_properties" in item.nodeid:
            item.add_marker(pytest.mark.property)

        if item.get_closest_marker("slow"):
            item.add_marker(pytest.mark.slow)
