from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings with environment variable support.

    Only logging is configurable from the environment; numerical settings
    come from the problem file and command line flags.
    """

    model_config = SettingsConfigDict(
        env_prefix="RCOM_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging Configuration
    log_level: str = "WARNING"
    log_dir: Optional[str] = None


def get_settings() -> Settings:
    """Get application settings instance."""
    return Settings()
