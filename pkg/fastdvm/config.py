"""
Configuration settings for the solver and the experiment harness
"""
from typing import Optional

from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load .env file explicitly
load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="FASTDVM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Logging
    LOG_LEVEL: str = "INFO"

    # Output locations
    OUTPUT_DIR: str = "./results"
    CACHE_DIR: str = "./cache"

    # Execution
    THREADS: int = 1
    DETERMINISTIC: bool = True
    BUDGET_SECONDS: Optional[float] = None

    # Numerics
    IMAG_RESIDUE_TOL: float = 1e-8
    DIRECTION_BATCH: int = 32  # directions per batched inverse FFT in the fast operator

    # Benchmarks
    BENCH_REPEATS: int = 5
    BENCH_WARMUP: int = 1

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        """Accept lower-case level names from the environment"""
        return str(v).upper() if v else "INFO"

    @field_validator("THREADS", "DIRECTION_BATCH", "BENCH_REPEATS")
    @classmethod
    def positive_int(cls, v):
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    def fft_workers(self) -> int:
        """Worker count handed to scipy.fft; deterministic mode pins it to 1"""
        return 1 if self.DETERMINISTIC else self.THREADS


settings = Settings()
