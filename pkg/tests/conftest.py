# tests/conftest.py
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from slicekit.cache import ReferenceCache
from slicekit.config import TestingConfig
from slicekit.experiments import ExperimentRunner, gaussian_pair

# --- Hypothesis profiles (select with HYPOTHESIS_PROFILE=dev) ---
settings.register_profile("ci", max_examples=200, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=25, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def flow_clouds():
    """Unit Gaussian source and shifted, shrunken Gaussian target (n=512, d=3)."""
    return gaussian_pair(np.random.default_rng(2024), n=512, d=3)


@pytest.fixture
def runner(tmp_path):
    return ExperimentRunner(TestingConfig, ReferenceCache(str(tmp_path / "cache")))
