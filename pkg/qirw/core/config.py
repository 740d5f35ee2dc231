# qirw/core/config.py

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Every field can be overridden from the environment with the QIRW_ prefix
    # (QIRW_THREADS, QIRW_PROFILE, ...) or from a local .env file.
    model_config = SettingsConfigDict(env_file=".env", env_prefix="QIRW_", extra="ignore")

    # Parallelism cap for per-source distance sweeps
    THREADS: int = 1

    # "checked" asserts every postcondition, "fast" samples them
    PROFILE: str = "checked"
    FAST_SAMPLE_PAIRS: int = 2000

    # exact_pathwidth refuses graphs above this many vertices
    PATHWIDTH_VERTEX_CAP: int = 16

    # Rerun the anchor stage with C = 4 when a C in {2, 3} postcondition fails
    RETRY_WITH_C4: bool = True

    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = True

    CORPUS_DIR: str = "instances"


settings = Settings()
