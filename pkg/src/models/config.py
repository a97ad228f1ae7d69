"""
Runtime settings for construction and verification runs.
"""
from pydantic import BaseModel, ConfigDict, Field

from src.services.constants import (
    DEFAULT_ELL,
    DEFAULT_ENUMERATION_CAP,
    DEFAULT_MATERIALIZE_CAP,
    DEFAULT_MAX_PATH_LENGTH,
    DEFAULT_ORACLE_CAP,
    DEFAULT_SAMPLE_PATHS,
)


class ForgeSettings(BaseModel):
    """
    Size guards, sampling parameters and the PRNG seed.

    Attributes:
        materialize_cap: Largest flag count a construction may materialize
        enumeration_cap: Largest group or coset that may be enumerated
        oracle_cap: Largest flag count the face-poset oracle accepts
        seed: Seed of every sampler, recorded in reports
        sample_paths: Number of random paths drawn by property suites
        max_path_length: Upper bound on sampled path lengths
        ell: Half the order of the cyclic coordinate s acts on
        jobs: Worker threads for per-tuple checks (0 means available cores)
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    materialize_cap: int = Field(DEFAULT_MATERIALIZE_CAP, ge=1)
    enumeration_cap: int = Field(DEFAULT_ENUMERATION_CAP, ge=1)
    oracle_cap: int = Field(DEFAULT_ORACLE_CAP, ge=1)
    seed: int = Field(0, ge=0)
    sample_paths: int = Field(DEFAULT_SAMPLE_PATHS, ge=0)
    max_path_length: int = Field(DEFAULT_MAX_PATH_LENGTH, ge=0)
    ell: int = Field(DEFAULT_ELL, ge=1)
    jobs: int = Field(0, ge=0)
