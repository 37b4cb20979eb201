# slicekit/config.py
import os
import logging
from dotenv import load_dotenv

# Load .env file variables into environment (project root, one level above the package)
basedir = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
load_dotenv(os.path.join(basedir, '.env'))


def _level_from_env(default):
    """Maps SLICEKIT_LOG_LEVEL (a level name) to a logging constant."""
    name = os.environ.get('SLICEKIT_LOG_LEVEL')
    if not name:
        return default
    level = logging.getLevelName(name.upper())
    # getLevelName returns "Level X" strings for unknown names
    return level if isinstance(level, int) else default


class Config:
    """Base configuration."""
    LOGGING_LEVEL = _level_from_env(logging.INFO)
    LOGGING_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

    # Concurrent (method, seed) sub-runs
    WORKERS = int(os.environ.get('SLICEKIT_WORKERS', 1))

    # Reference-value cache (approx-error ground truth)
    CACHE_DIR = os.environ.get('SLICEKIT_CACHE_DIR', os.path.join(basedir, '.slicekit-cache'))
    REDIS_URL = os.environ.get('SLICEKIT_REDIS_URL')  # Optional mirror, disk cache is authoritative

    # High-budget MC reference for approx-error
    REFERENCE_SLICES = int(os.environ.get('SLICEKIT_REFERENCE_SLICES', 100_000))
    REFERENCE_SEED = 20_240_101

    # Evaluation
    EXACT_W2_MAX_POINTS = 4096
    SW_EVAL_SLICES = 10_000
    SW_EVAL_SEED = 7
    SW_CHUNK_SLICES = 2048


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True
    LOGGING_LEVEL = _level_from_env(logging.DEBUG)


class TestingConfig(Config):
    """Configuration used by the test-suite."""
    TESTING = True
    WORKERS = 1
    REDIS_URL = None
    REFERENCE_SLICES = 20_000


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False


# Dictionary to easily access configs by name
config_by_name = dict(
    dev=DevelopmentConfig,
    test=TestingConfig,
    prod=ProductionConfig,
    default=ProductionConfig
)
