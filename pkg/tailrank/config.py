import os
import logging
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

try:
    from pythonjsonlogger.json import JsonFormatter
except ImportError:  # python-json-logger < 3
    from pythonjsonlogger.jsonlogger import JsonFormatter

logger = logging.getLogger(__name__)

# Solver defaults, echoed into every report header
DEFAULT_GAMMA = 1.1
DEFAULT_MAX_ITERS = 500
DEFAULT_REL_TOL = 1e-6
DEFAULT_C = 1.0
T_CAP_FACTOR = 1e12

# Random generator used for every seeded draw
GENERATOR_NAME = "PCG64"

PROJECT_DIR = Path(__file__).parent.parent

_dotenv_loaded = False


def _ensure_dotenv():
    global _dotenv_loaded
    if not _dotenv_loaded:
        load_dotenv(PROJECT_DIR / ".env", override=False)
        _dotenv_loaded = True


def get_log_level() -> str:
    """Get log level name from environment."""
    _ensure_dotenv()
    return os.getenv('TAILRANK_LOG_LEVEL', 'INFO').upper()


def get_log_format() -> str:
    """Get log format ('text' or 'json') from environment."""
    _ensure_dotenv()
    fmt = os.getenv('TAILRANK_LOG_FORMAT', 'text').lower()
    if fmt not in ('text', 'json'):
        logger.warning(f"Unknown TAILRANK_LOG_FORMAT {fmt!r}, using text")
        return 'text'
    return fmt


def get_data_dir() -> Path:
    """Get directory searched for benchmark datasets (yeast ARFF files)."""
    _ensure_dotenv()
    return Path(os.getenv('TAILRANK_DATA_DIR', str(PROJECT_DIR / 'data')))


def configure_logging(level: Optional[str] = None) -> logging.Handler:
    """Install a single stderr handler on the tailrank logger tree.

    Args:
        level: Overrides TAILRANK_LOG_LEVEL when given

    Returns:
        The installed handler
    """
    root = logging.getLogger('tailrank')
    for handler in list(root.handlers):
        root.removeHandler(handler)

    handler = logging.StreamHandler()
    if get_log_format() == 'json':
        handler.setFormatter(JsonFormatter('%(asctime)s %(levelname)s %(name)s %(message)s'))
    else:
        handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))

    root.addHandler(handler)
    root.setLevel(level.upper() if level else get_log_level())
    root.propagate = False
    return handler
