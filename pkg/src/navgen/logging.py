import os
import sys
from dataclasses import dataclass

from loguru import logger


@dataclass
class Logger:
    """
    Configure the loguru logger shared by every navgen module.
    """

    level: str = os.environ.get("NAVGEN_LOG_LEVEL", "INFO")

    def __post_init__(self):
        self.log_format = (
            "<level>{level: <8}</level> | "
            "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
            "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
            "<level>{message}</level>"
        )
        self.logger = logger
        self.setup_logger()

    def setup_logger(self):
        self.logger.remove()
        self.logger.add(sys.stdout, format=self.log_format, level=self.level.upper())

    def set_level(self, level: str):
        self.level = level
        self.setup_logger()

    def get_logger(self):
        return self.logger
