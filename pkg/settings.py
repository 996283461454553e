"""
Runtime configuration for gridhodge.

Values come from the environment (prefix GRIDHODGE_) or a local .env file.
Library modules read them through get_settings(); nothing here touches
numerics.
"""

import logging
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="GRIDHODGE_",
        env_file=".env",
        extra="ignore",
    )

    # ======================== SOLVERS ========================
    threads: int = Field(1, ge=1, description="Worker threads for convergence sweeps")
    eig_tol: float = Field(1e-9, gt=0, description="Relative residual bound for eigenpairs")
    dense_limit: int = Field(2000, ge=1, description="Largest system solved on the dense path")
    zero_tol: float = Field(1e-6, gt=0, lt=1, description="Relative threshold for kernel eigenvalues")
    cg_tol: float = Field(1e-10, gt=0, description="Relative residual for decomposition solves")

    # ======================== DISCRETIZATION ========================
    eps_ratio: float = Field(1e-4, gt=0, lt=1, description="Default epsilon as a fraction of l_g")
    default_m: int = Field(40, ge=0)

    # ======================== HTTP ========================
    http_max_vertices: int = Field(500_000, ge=1, description="Largest grid an HTTP request may sample")

    # ======================== LOGGING ========================
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Forget the cached settings so the next call re-reads the environment."""
    global _settings
    _settings = None


def configure_logging(level: Optional[str] = None) -> None:
    """Attach one stream handler to the gridhodge logger tree."""
    root = logging.getLogger("gridhodge")
    root.setLevel(level or get_settings().log_level)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)
