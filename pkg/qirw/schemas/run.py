from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator

from qirw.core.config import settings


class RunConfig(BaseModel):
    command: Literal["synthesize", "certify", "generate", "measure"]
    g: Optional[Path] = None
    h: Optional[Path] = None
    bags: Optional[Path] = None
    phi: Optional[Path] = None
    instance: Optional[Path] = None
    report: Optional[Path] = None
    weights: Optional[Path] = None
    out: Optional[Path] = None
    profile: str = Field(default_factory=lambda: settings.PROFILE)
    seed: int = 0
    format: Literal["json", "dot", "csv", "materialized"] = "json"
    generator: Optional[str] = None
    n: int = 10
    p: int = 2
    q: float = 0.0
    k: int = 2
    m: int = 3

    @field_validator("profile")
    @classmethod
    def known_profile(cls, profile: str) -> str:
        if profile not in ("checked", "fast"):
            raise ValueError(f"profile must be 'checked' or 'fast', got {profile!r}")
        return profile

    @field_validator("seed")
    @classmethod
    def seed_fits_64_bits(cls, seed: int) -> int:
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        return seed
