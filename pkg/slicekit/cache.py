# slicekit/cache.py
"""Reference-value cache keyed by content hash.

JSON files on disk are the authoritative store; an optional Redis connection
mirrors them so several machines can share ground-truth values.
"""
import hashlib
import json
import logging
import os
import threading

import numpy as np
import redis

logger = logging.getLogger(__name__)

REDIS_PREFIX = "slicekit:reference:"


def content_key(*arrays, **params):
    """sha256 over array bytes (with shapes) and sorted scalar parameters."""
    digest = hashlib.sha256()
    for arr in arrays:
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        digest.update(str(arr.shape).encode())
        digest.update(arr.tobytes())
    digest.update(json.dumps(params, sort_keys=True).encode())
    return digest.hexdigest()


def connect_redis(url):
    """Returns a connected client, or None (logged) when Redis is unavailable."""
    if not url:
        return None
    try:
        client = redis.Redis.from_url(url, decode_responses=True, socket_connect_timeout=2)
        client.ping()  # Check connection
        logger.info(f"Connected to reference-cache Redis ({url}) successfully!")
        return client
    except redis.exceptions.ConnectionError as e:
        logger.error(f"Could not connect to reference-cache Redis: {e}")
    except Exception as e:  # Catch other potential redis init errors
        logger.error(f"Error initializing reference-cache Redis client: {e}")
    return None


class ReferenceCache:
    """get/put of float values under content-hash keys."""

    def __init__(self, directory, redis_client=None):
        self.directory = directory
        self.redis_client = redis_client

    def _path(self, key):
        return os.path.join(self.directory, f"{key}.json")

    def get(self, key):
        path = self._path(key)
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                value = float(json.load(fh)["value"])
            logger.info(f"Reference cache hit (disk) for {key[:12]}")
            return value
        if self.redis_client:
            try:
                raw = self.redis_client.get(REDIS_PREFIX + key)
            except Exception as e:
                logger.error(f"Redis error reading reference {key[:12]}: {e}")
                raw = None
            if raw is not None:
                value = float(raw)
                self._write_disk(key, value)
                logger.info(f"Reference cache hit (redis) for {key[:12]}")
                return value
        return None

    def put(self, key, value):
        self._write_disk(key, value)
        if self.redis_client:
            try:
                self.redis_client.set(REDIS_PREFIX + key, repr(float(value)))
            except Exception as e:
                logger.error(f"Redis error storing reference {key[:12]}: {e}")

    def _write_disk(self, key, value):
        os.makedirs(self.directory, exist_ok=True)
        tmp = f"{self._path(key)}.{threading.get_ident()}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"value": float(value)}, fh)
        os.replace(tmp, self._path(key))
