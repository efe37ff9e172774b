"""Configuration management for the inexact inertial ADMM package."""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Process-wide defaults, overridable through INERTIAL_ADMM_* variables."""

    model_config = SettingsConfigDict(
        env_prefix="INERTIAL_ADMM_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Algorithm parameters (numerical-experiments defaults)
    alpha: float = Field(default=0.33, ge=0.0, lt=1.0)
    sigma: float = Field(default=0.99, ge=0.0, lt=1.0)
    tau: float = Field(default=0.999, gt=0.0, le=1.0)
    gamma: float = Field(default=1.0, gt=0.0)
    theta: float = Field(default=0.99, gt=0.0, lt=1.0)
    k0: int = Field(default=1, ge=1)
    rule: str = Field(default="summability")

    # Stopping and iteration caps
    tol: float = Field(default=1e-6, gt=0.0)
    max_outer: int = Field(default=20000, ge=1)
    max_inner: int = Field(default=1000, ge=1)

    # LASSO preprocessing
    nu_fraction: float = Field(default=0.1, gt=0.0)

    # Oracle and reporting
    oracle_tol: float = Field(default=1e-10, gt=0.0)
    output_dir: str = Field(default="results")
    bench_workers: int = Field(default=4, ge=1, le=32)
    log_level: str = Field(default="INFO")

    @property
    def log_level_value(self) -> str:
        """Normalized logging level name."""
        return self.log_level.upper()


# Global settings instance
settings = Settings()
