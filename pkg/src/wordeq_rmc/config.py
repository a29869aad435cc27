"""
Solver settings, with defaults taken from the environment.
"""
import logging
import os
from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field

try:
    from .errors import InputError
except ImportError:
    from errors import InputError

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    """RMC solving modes."""
    QUADRATIC = "quadratic"
    CUBIC = "cubic"
    COMPLETE = "complete"

    @classmethod
    def _missing_(cls, value):
        """Accept common spellings of the mode names."""
        if not isinstance(value, str):
            return None
        aliases = {
            "quad": "quadratic",
            "cubic-cut": "cubic",
            "cubiccut": "cubic",
            "cut": "cubic",
        }
        lowered = value.strip().lower()
        lowered = aliases.get(lowered, lowered)
        for member in cls:
            if member.value == lowered:
                return member
        return None


ENV_PREFIX = "WORDEQ_RMC_"


class SolverSettings(BaseModel):
    """Budgets and switches for one solver run."""
    mode: Optional[Mode] = Field(None, description="Solving mode; None selects automatically")
    max_iterations: int = Field(1000, ge=1, description="RMC iteration budget")
    timeout_s: float = Field(20.0, gt=0, description="Wall-clock budget in seconds")
    cnf_cap: int = Field(4096, ge=1, description="Maximum number of CNF clauses")
    oracle_node_limit: int = Field(2_000_000, ge=1, description="Brute-force assignment limit")
    trace_dir: Optional[Path] = Field(None, description="Directory for per-iteration dumps")

    @classmethod
    def from_env(cls, **overrides) -> "SolverSettings":
        """Build settings from ``WORDEQ_RMC_*`` variables; non-None overrides win."""
        env_names = {
            "mode": "MODE",
            "max_iterations": "MAX_ITERS",
            "timeout_s": "TIMEOUT",
            "cnf_cap": "CNF_CAP",
            "oracle_node_limit": "ORACLE_NODES",
            "trace_dir": "TRACE_DIR",
        }
        values = {}
        for field, suffix in env_names.items():
            raw = os.getenv(ENV_PREFIX + suffix)
            if not raw or overrides.get(field) is not None:
                continue
            if field == "mode":
                try:
                    raw = Mode(raw)
                except ValueError:
                    logger.error(f"Unknown mode in {ENV_PREFIX}{suffix}: {raw}")
                    raise InputError(f"{ENV_PREFIX}{suffix}: unknown mode '{raw}'") from None
            values[field] = raw
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
