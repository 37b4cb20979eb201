# slicekit/methods.py
"""Method registry: every selector name the CLI accepts, behind one interface.

Monte Carlo (``SW``) and randomized QSW sets are redrawn at every outer step;
deterministic QSW sets are built once; BO selectors follow their own refresh
rules (see selectors.select_for_step).
"""
from __future__ import annotations

import logging

import numpy as np

from .errors import InvalidArgumentError
from .qsw import QswKind, RandomizeMode, make_qsw
from .selectors import AnnealingClock, SelectorConfig, SelectorKind, SliceOracle, select_for_step
from .sphere import DirectionSet, as_direction_set, sample_uniform

logger = logging.getLogger(__name__)

# name -> (kind, randomization)
QSW_METHODS = {
    "GQSW": (QswKind.GAUSSIAN_SOBOL, RandomizeMode.NONE),
    "EQSW": (QswKind.EQUAL_AREA_SOBOL, RandomizeMode.NONE),
    "SQSW": (QswKind.SPIRAL, RandomizeMode.NONE),
    "DQSW": (QswKind.DISTANCE_OPTIMIZED, RandomizeMode.NONE),
    "CQSW": (QswKind.COULOMB_OPTIMIZED, RandomizeMode.NONE),
    "RGQSW": (QswKind.GAUSSIAN_SOBOL, RandomizeMode.SCRAMBLE),
    "RRGQSW": (QswKind.GAUSSIAN_SOBOL, RandomizeMode.ROTATE),
    "REQSW": (QswKind.EQUAL_AREA_SOBOL, RandomizeMode.SCRAMBLE),
    "RREQSW": (QswKind.EQUAL_AREA_SOBOL, RandomizeMode.ROTATE),
    "RSQSW": (QswKind.SPIRAL, RandomizeMode.ROTATE),
    "RDQSW": (QswKind.DISTANCE_OPTIMIZED, RandomizeMode.ROTATE),
    "RCQSW": (QswKind.COULOMB_OPTIMIZED, RandomizeMode.ROTATE),
}
BO_METHODS = {kind.value: kind for kind in SelectorKind}
MC_METHOD = "SW"


def list_methods() -> list[str]:
    """All method names in a stable display order."""
    return [MC_METHOD, *QSW_METHODS, *BO_METHODS]


def is_deterministic(name: str) -> bool:
    """True for methods whose direction set does not depend on the seed."""
    return name in QSW_METHODS and QSW_METHODS[name][1] is RandomizeMode.NONE


class DirectionSelector:
    """Supplies the direction set for each outer step of a run."""
    name = "selector"

    def __init__(self):
        self.evaluations = 0

    def select(self, t: int, oracle: SliceOracle | None, rng: np.random.Generator) -> DirectionSet:
        raise NotImplementedError


class FixedSelector(DirectionSelector):
    """Always the same, user-supplied set."""
    name = "FIXED"

    def __init__(self, dirs: DirectionSet):
        super().__init__()
        self.dirs = as_direction_set(dirs)

    def select(self, t, oracle, rng):
        return self.dirs


class MonteCarloSelector(DirectionSelector):
    """Fresh uniform directions at every step."""
    name = MC_METHOD

    def __init__(self, L: int, d: int):
        super().__init__()
        self.L, self.d = L, d

    def select(self, t, oracle, rng):
        return sample_uniform(rng, self.d, self.L)


class QswSelector(DirectionSelector):
    """Deterministic sets are built once; randomized sets are redrawn every step."""

    def __init__(self, name: str, L: int, d: int, scramble_method: str = "owen"):
        super().__init__()
        self.name = name
        self.kind, self.mode = QSW_METHODS[name]
        self.L, self.d = L, d
        self.scramble_method = scramble_method
        self._fixed: DirectionSet | None = None

    def select(self, t, oracle, rng):
        if self.mode is RandomizeMode.NONE:
            if self._fixed is None:
                self._fixed = make_qsw(self.kind, self.L, self.mode, rng, d=self.d,
                                       scramble_method=self.scramble_method)
            return self._fixed
        return make_qsw(self.kind, self.L, self.mode, rng, d=self.d, scramble_method=self.scramble_method)


class BoSelector(DirectionSelector):
    """BOSW / RBOSW / ABOSW / ARBOSW with their refresh rules."""

    def __init__(self, kind: SelectorKind, cfg: SelectorConfig):
        super().__init__()
        self.kind = kind
        self.name = kind.value
        self.cfg = cfg
        self.prev: DirectionSet | None = None
        # Annealing t keeps counting across refreshes
        self.clock = AnnealingClock()

    def select(self, t, oracle, rng):
        if oracle is None:
            raise InvalidArgumentError(f"{self.name} needs a slice oracle")
        before = oracle.evaluations
        self.prev = select_for_step(self.kind, t, self.prev, oracle, self.cfg, rng, self.clock)
        self.evaluations += oracle.evaluations - before
        return self.prev


def make_selector(name: str, scfg: SelectorConfig, d: int, scramble_method: str = "owen") -> DirectionSelector:
    """Selector instance for a registered method name (case-insensitive)."""
    key = name.upper()
    if key == MC_METHOD:
        return MonteCarloSelector(scfg.L, d)
    if key in QSW_METHODS:
        return QswSelector(key, scfg.L, d, scramble_method)
    if key in BO_METHODS:
        return BoSelector(BO_METHODS[key], scfg)
    raise InvalidArgumentError(f"unknown method {name!r}; known methods: {', '.join(list_methods())}")
