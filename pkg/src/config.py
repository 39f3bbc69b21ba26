import logging
from functools import lru_cache

import structlog
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from structlog.stdlib import get_logger

LOG = get_logger()


class Settings(BaseSettings):
    HOST: str = Field("0.0.0.0", alias="SADDLE_HOST")
    PORT: int = Field(8080, alias="SADDLE_PORT")

    # inner prox solver
    INNER_TOL_SCALE: float = Field(1e-10, alias="SADDLE_INNER_TOL_SCALE")
    INNER_MAX_ITER: int = Field(10_000, alias="SADDLE_INNER_MAX_ITER")
    INIT_MAX_EVALS: int = Field(50_000, alias="SADDLE_INIT_MAX_EVALS")

    # outer run loop
    GRAD_TOL_SCALE: float = Field(1e-8, alias="SADDLE_GRAD_TOL_SCALE")
    DIVERGE_SCALE: float = Field(1e8, alias="SADDLE_DIVERGE_SCALE")
    MAX_ITER: int = Field(10_000, alias="SADDLE_MAX_ITER")

    # regime classification
    BURN_IN: int = Field(500, alias="SADDLE_BURN_IN")
    WINDOW: int = Field(400, alias="SADDLE_WINDOW")

    WORKERS: int = Field(1, alias="SADDLE_WORKERS")
    OUTPUT_DIR: str = Field("runs", alias="SADDLE_OUTPUT_DIR")
    LOG_LEVEL: str = Field("INFO", alias="SADDLE_LOG_LEVEL")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        populate_by_name=True,
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    return Settings()


def configure_logging(level: str | None = None) -> None:
    """Route structlog through a level filter and the console renderer."""
    name = (level or get_settings().LOG_LEVEL).upper()
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelName(name)
        ),
        cache_logger_on_first_use=False,
    )
