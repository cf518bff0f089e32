from dataclasses import dataclass
from typing import Optional

from navgen.core.config import get_settings
from navgen.errors import ConfigError


AVAILABLE_HARDWARE = {
    "local": "loky",
    "local-threads": "threading",
    "local-serial": "sequential",
}


@dataclass
class BaseBackend:
    jobs: Optional[int] = None
    backend: str = "local"

    def __post_init__(self):
        if self.backend not in AVAILABLE_HARDWARE:
            raise ConfigError(f"Invalid backend: {self.backend}")
        if self.jobs is None:
            self.jobs = get_settings().jobs
        if self.jobs == 0 or self.jobs < -1:
            raise ConfigError(f"jobs must be positive or -1, got {self.jobs}")
        self.joblib_backend = AVAILABLE_HARDWARE[self.backend]
