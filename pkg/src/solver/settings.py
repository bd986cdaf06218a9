# src/solver/settings.py
import os

from dotenv import load_dotenv
from pydantic import BaseModel, Field

ENV_PREFIX = "NASH_"


class Settings(BaseModel):
    workers: int = Field(default=1, ge=1)
    oracle_budget: int = Field(default=1_000_000, ge=1)
    sat_bound: int = Field(default=20, ge=1)
    db_path: str = "data/census.db"
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, dotenv_path=None) -> "Settings":
        """Read NASH_* variables (a .env file is honoured if present)."""
        load_dotenv(dotenv_path)
        values = {}
        for name in cls.model_fields:
            raw = os.getenv(ENV_PREFIX + name.upper())
            if raw is not None and raw != "":
                values[name] = raw
        return cls(**values)
