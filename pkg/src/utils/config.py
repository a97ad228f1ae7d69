"""
Settings loading.

Values are layered: defaults, then a TOML file of ``key = value`` lines,
then ``FORGE_*`` environment variables, then explicit overrides coming
from the command line.
"""
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Mapping, Optional

from aws_lambda_powertools import Logger
from pydantic import ValidationError

from src.models.config import ForgeSettings
from src.services.exceptions import StructureError

logger = Logger()

ENV_OVERRIDES = {
    "FORGE_SEED": "seed",
    "FORGE_ORACLE_CAP": "oracle_cap",
    "FORGE_ENUMERATION_CAP": "enumeration_cap",
    "FORGE_MATERIALIZE_CAP": "materialize_cap",
}


def load_settings(
    path: Optional[Path] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ForgeSettings:
    """
    Build the effective settings of a run.

    Args:
        path: Optional TOML file with caps and seed
        env: Environment to read overrides from (defaults to os.environ)
        overrides: Values set explicitly by the caller; None entries are skipped

    Returns:
        Validated ForgeSettings

    Raises:
        StructureError: If the file cannot be parsed or a value is invalid
    """
    env = os.environ if env is None else env
    values: dict[str, Any] = {}

    if path is not None:
        try:
            with open(path, "rb") as handle:
                values.update(tomllib.load(handle))
        except (OSError, tomllib.TOMLDecodeError) as e:
            raise StructureError(f"Cannot read settings file {path}: {e}") from e

    for variable, key in ENV_OVERRIDES.items():
        if variable in env:
            try:
                values[key] = int(env[variable])
            except ValueError as e:
                raise StructureError(f"{variable} must be an integer, got {env[variable]!r}") from e

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    try:
        settings = ForgeSettings(**values)
    except ValidationError as e:
        raise StructureError(f"Invalid settings: {e}") from e

    logger.debug("Settings loaded", extra={"settings": settings.model_dump()})
    return settings
