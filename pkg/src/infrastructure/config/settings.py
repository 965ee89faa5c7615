# src/infrastructure/config/settings.py
import os
from dotenv import load_dotenv

# Variáveis do .env; nada aqui altera os artefatos gerados
load_dotenv()

DEFAULT_LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


class Settings:
    """Configurações do processo: ambiente e logging."""

    ENVIRONMENT = os.getenv("ENVIRONMENT", "development")
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    LOG_FORMAT = os.getenv("LOG_FORMAT", DEFAULT_LOG_FORMAT)

    PROJECT_NAME = os.getenv("PROJECT_NAME", "jump-diffusion-spectrograms")
