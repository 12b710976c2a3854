import os
from pathlib import Path
from typing import Any

import dotenv
from loguru import logger
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

dotenv.load_dotenv()


LOG_DIR_NAME = "logs"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_ignore_empty=True, extra="ignore")

    ATLAS_LAB_THREADS: int = Field(
        default=0,
        description="Worker threads for replica batches. 0 or negative means one per CPU. "
        "Used when --threads is not given on the command line.",
    )

    ATLAS_LAB_MAX_STEPS: int = Field(
        default=2_000_000,
        description="Step budget per replica. A run whose t_end/dt exceeds it is refused.",
    )

    ATLAS_LAB_BATCH_SIZE: int = Field(
        default=64,
        description="Replicas advanced together in one vectorised batch. "
        "Does not influence results, only memory and throughput.",
    )

    ATLAS_LAB_RNG_BLOCK_STEPS: int = Field(
        default=64,
        description="Number of time steps of Gaussian increments drawn per counter block.",
    )

    ATLAS_LAB_FACTORIZATION_LIMIT: int = Field(
        default=4096, description="Largest covariance matrix the gaussian module will factorize."
    )

    ATLAS_LAB_OUT_DIR: Path = Field(
        default=Path("runs"), description="Default output directory for CSV, manifest and logs."
    )

    LOG_LEVEL: str = Field(default="INFO", description="Log level of the stdout sink.")

    def model_post_init(self, context: Any, /) -> None:
        if self.ATLAS_LAB_THREADS <= 0:
            self.ATLAS_LAB_THREADS = os.cpu_count() or 1

        if self.ATLAS_LAB_BATCH_SIZE < 1:
            logger.warning(
                f"ATLAS_LAB_BATCH_SIZE={self.ATLAS_LAB_BATCH_SIZE} is not usable, falling back to 64"
            )
            self.ATLAS_LAB_BATCH_SIZE = 64

        if self.ATLAS_LAB_RNG_BLOCK_STEPS < 1:
            logger.warning(
                f"ATLAS_LAB_RNG_BLOCK_STEPS={self.ATLAS_LAB_RNG_BLOCK_STEPS} is not usable, falling back to 64"
            )
            self.ATLAS_LAB_RNG_BLOCK_STEPS = 64

        self.ATLAS_LAB_OUT_DIR = self.ATLAS_LAB_OUT_DIR.expanduser().absolute()
        self.LOG_LEVEL = self.LOG_LEVEL.upper()


settings = Settings()  # type: ignore
