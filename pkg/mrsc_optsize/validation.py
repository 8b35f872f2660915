"""
Input validation for the command-line surface
"""

import re
from typing import Any, Tuple

from pydantic import ValidationError as PydanticValidationError

from .exceptions import ParseError, ValidationError
from .graphset import QueryKind, QuerySpec, SizeMeasure
from .lang import Value, exp_to_value, free_vars, parse_expression
from .logging_config import get_logger

logger = get_logger(__name__)


class InputValidator:
    """Validators for user-supplied options, raising ValidationError"""

    QUERY_PATTERN = re.compile(r"^(first|last|min|max)(-skip-unfold)?$|^enumerate:(\S+)$")
    ENV_BINDING_PATTERN = re.compile(r"^\s*([a-z][A-Za-z0-9_]*)\s*=(.*)$", re.DOTALL)

    @staticmethod
    def parse_query_spec(text: str) -> QuerySpec:
        """
        Parse a query option

        Args:
            text: One of first, last, min, max, min-skip-unfold,
                max-skip-unfold or enumerate:N

        Returns:
            The query

        Raises:
            ValidationError: If the text names no query or N is not a positive integer
        """
        if not isinstance(text, str):
            raise ValidationError("Query must be a string")
        m = InputValidator.QUERY_PATTERN.match(text.strip())
        if m is None:
            raise ValidationError(
                f"Unknown query: {text!r}",
                error_code="QUERY",
                details={"query": text},
            )
        base, skip, limit = m.groups()
        if limit is not None:
            if not limit.isdigit() or int(limit) < 1:
                raise ValidationError(
                    f"Enumeration limit must be a positive integer, got {limit!r}",
                    error_code="QUERY",
                    details={"query": text},
                )
            return QuerySpec(kind=QueryKind.ENUMERATE, limit=int(limit))
        if skip and base in ("first", "last"):
            raise ValidationError(
                f"{base} does not take a size measure", error_code="QUERY", details={"query": text}
            )
        measure = SizeMeasure.SKIP_UNFOLD if skip else SizeMeasure.ALL_NODES
        try:
            return QuerySpec(kind=QueryKind(base), measure=measure)
        except PydanticValidationError as e:
            raise ValidationError(str(e), error_code="QUERY") from e

    @staticmethod
    def validate_env_binding(text: str) -> Tuple[str, Value]:
        """
        Parse a VAR=VALUE binding whose value is a ground constructor term

        Raises:
            ValidationError: If the binding is malformed or the value is not ground
        """
        m = InputValidator.ENV_BINDING_PATTERN.match(text)
        if m is None:
            raise ValidationError(
                f"Expected VAR=VALUE, got {text!r}", error_code="ENV", details={"binding": text}
            )
        name, raw = m.group(1), m.group(2)
        try:
            e = parse_expression(raw.strip())
        except ParseError as err:
            raise ValidationError(
                f"Invalid value for {name}: {err.message}",
                error_code="ENV",
                details={"binding": text},
            ) from err
        value = exp_to_value(e)
        if value is None:
            raise ValidationError(
                f"Value for {name} must be a ground constructor term, "
                f"found {', '.join(free_vars(e)) or 'a function call'}",
                error_code="ENV",
                details={"binding": text},
            )
        return name, value

    @staticmethod
    def validate_non_negative(name: str, value: Any) -> int:
        """Check that a count option is a non-negative integer"""
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{name} must be an integer", error_code="RANGE")
        if value < 0:
            raise ValidationError(
                f"{name} must be non-negative, got {value}",
                error_code="RANGE",
                details={name: value},
            )
        return value


parse_query_spec = InputValidator.parse_query_spec
validate_env_binding = InputValidator.validate_env_binding
validate_non_negative = InputValidator.validate_non_negative
