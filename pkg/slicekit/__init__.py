# slicekit/__init__.py
import os
import logging

__version__ = "1.1.0"


# --- Runner Factory ---
def create_runner(config_name=None):
    """Creates and configures an ExperimentRunner (settings, logging, reference cache)."""
    from .cache import ReferenceCache, connect_redis
    from .config import config_by_name
    from .errors import InvalidArgumentError
    from .experiments import ExperimentRunner

    if config_name is None:
        # Use environment variable or default to 'default' (ProductionConfig)
        config_name = os.getenv('SLICEKIT_CONFIG', 'default')
    if config_name not in config_by_name:
        raise InvalidArgumentError(f"unknown configuration {config_name!r}; expected one of {sorted(config_by_name)}")
    settings = config_by_name[config_name]

    logging.basicConfig(level=settings.LOGGING_LEVEL, format=settings.LOGGING_FORMAT)

    # Redis mirror is optional; the disk cache works without it
    redis_client = connect_redis(settings.REDIS_URL)
    cache = ReferenceCache(settings.CACHE_DIR, redis_client)
    logging.getLogger(__name__).debug(f"Runner created with configuration {config_name!r}")
    return ExperimentRunner(settings, cache)
