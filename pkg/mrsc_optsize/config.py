"""
Run configuration for mrsc-optsize

Settings are read from MRSC_* environment variables and validated with pydantic.
"""

import os
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from .exceptions import ConfigurationError
from .logging_config import get_logger

logger = get_logger(__name__)

ENV_PREFIX = "MRSC_"


class SupercompilerConfig(BaseModel):
    """Tunable limits and defaults of a supercompilation run"""

    model_config = ConfigDict(frozen=True)

    max_graphset_nodes: int = Field(default=10_000_000, ge=1)
    default_fuel: int = Field(default=100_000, ge=0)
    check_samples: int = Field(default=100, ge=0)
    value_depth: int = Field(default=8, ge=1)
    seed: int = 0

    @classmethod
    def from_env(cls, environ: Optional[Dict[str, str]] = None) -> "SupercompilerConfig":
        """
        Build a configuration from MRSC_* environment variables

        Args:
            environ: Mapping to read instead of os.environ

        Returns:
            Validated configuration

        Raises:
            ConfigurationError: If a variable is malformed or out of range
        """
        environ = os.environ if environ is None else environ
        values: Dict[str, Any] = {}
        for field_name in cls.model_fields:
            key = ENV_PREFIX + field_name.upper()
            if key in environ:
                values[field_name] = environ[key]
        try:
            return cls(**values)
        except PydanticValidationError as e:
            raise ConfigurationError(
                "Invalid supercompiler configuration",
                error_code="CONFIG",
                details={"errors": e.errors(include_url=False)},
            ) from e


_config: Optional[SupercompilerConfig] = None


def get_config() -> SupercompilerConfig:
    """Get the active configuration, reading the environment on first use"""
    global _config
    if _config is None:
        _config = SupercompilerConfig.from_env()
    return _config


def configure(config: Optional[SupercompilerConfig] = None, **overrides: Any) -> SupercompilerConfig:
    """Replace the active configuration"""
    global _config
    base = config or get_config()
    try:
        _config = SupercompilerConfig(**{**base.model_dump(), **overrides})
    except PydanticValidationError as e:
        raise ConfigurationError(
            "Invalid supercompiler configuration", error_code="CONFIG"
        ) from e
    logger.info(f"Supercompiler configured: {_config.model_dump()}")
    return _config


def reset_config() -> None:
    """Forget the active configuration so the environment is read again"""
    global _config
    _config = None
