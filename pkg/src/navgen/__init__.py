# coding=utf-8
# Lint as: python3
import os
import sys
import warnings
from pathlib import Path

_src_dir = Path(__file__).resolve().parent.parent
if str(_src_dir) not in sys.path:
    sys.path.insert(0, str(_src_dir))


os.environ.setdefault("MPLBACKEND", "Agg")

from .logging import Logger


warnings.filterwarnings("ignore", category=UserWarning, module="matplotlib")
warnings.filterwarnings("ignore", category=FutureWarning, module="pandas")

log_config = Logger()
logger = log_config.get_logger()
__version__ = "0.3.0"
