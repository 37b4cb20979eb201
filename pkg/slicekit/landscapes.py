# slicekit/landscapes.py
"""Synthetic fitness landscapes on S^2 and the budgeted projection-selection benchmark.

Landscape constants live in the versioned ``data/landscapes.json``; every
vector in it is normalized on load. Higher fitness is better.
"""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from importlib import resources

import numpy as np
import numpy.typing as npt

from .errors import InvalidArgumentError, SlicekitInternalError
from .methods import BO_METHODS, MC_METHOD, QSW_METHODS
from .qsw import make_qsw
from .selectors import SelectorConfig, SelectorKind, SliceOracle, bosw
from .sphere import Direction, DirectionSet, normalize, sample_uniform

logger = logging.getLogger(__name__)

LANDSCAPE_FILE = "landscapes.json"


class LandscapeKind(enum.Enum):
    PEAKS = "peaks"
    RIDGE = "ridge"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class Landscape:
    kind: LandscapeKind
    params: dict

    def evaluate_many(self, dirs: DirectionSet) -> npt.NDArray[np.float64]:
        dirs = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
        if dirs.shape[1] != 3:
            raise InvalidArgumentError(f"landscapes are defined on S^2, got d={dirs.shape[1]}")
        if self.kind is LandscapeKind.PEAKS:
            total = np.zeros(dirs.shape[0])
            for bump in self.params["bumps"]:
                total += bump["weight"] * np.exp(bump["kappa"] * (dirs @ np.asarray(bump["center"]) - 1.0))
            return total
        if self.kind is LandscapeKind.RIDGE:
            align = dirs @ np.asarray(self.params["direction"])
            return self.params["amplitude"] * np.exp(self.params["kappa"] * (align - 1.0))
        align = dirs @ np.asarray(self.params["target"])
        return self.params["scale"] * align ** 2


def _normalized_params(kind: LandscapeKind, raw: dict) -> dict:
    params = dict(raw)
    params.pop("description", None)
    if kind is LandscapeKind.PEAKS:
        params["bumps"] = [dict(b, center=normalize(b["center"]).tolist()) for b in raw["bumps"]]
    elif kind is LandscapeKind.RIDGE:
        params["direction"] = normalize(raw["direction"]).tolist()
    else:
        params["target"] = normalize(raw["target"]).tolist()
    return params


def load_landscapes(path: str | None = None) -> dict[LandscapeKind, Landscape]:
    """Reads the frozen landscape constants (package data unless ``path`` is given)."""
    if path is None:
        text = resources.files("slicekit.data").joinpath(LANDSCAPE_FILE).read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    raw = json.loads(text)
    return {kind: Landscape(kind, _normalized_params(kind, raw[kind.value])) for kind in LandscapeKind}


def landscape_constants(landscapes: dict[LandscapeKind, Landscape]) -> dict:
    """Resolved constants, as written into config.lock."""
    return {kind.value: landscape.params for kind, landscape in landscapes.items()}


def evaluate(landscape: Landscape, theta: Direction) -> float:
    """Fitness of one direction."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (3,):
        raise InvalidArgumentError(f"landscapes are defined on S^2, got a direction of shape {theta.shape}")
    return float(landscape.evaluate_many(theta[None, :])[0])


def budgeted_search(method: str, landscape: Landscape, L: int, rng: np.random.Generator,
                    scfg: SelectorConfig | None = None) -> float:
    """Best fitness among exactly L evaluated directions proposed by ``method``."""
    if L < 1:
        raise InvalidArgumentError(f"budget must be >= 1, got {L}")
    oracle = SliceOracle(landscape.evaluate_many, 3)
    key = method.upper()
    if key == MC_METHOD:
        values = oracle.evaluate_many(sample_uniform(rng, 3, L))
    elif key in QSW_METHODS:
        kind, mode = QSW_METHODS[key]
        values = oracle.evaluate_many(make_qsw(kind, L, mode, rng, d=3))
    elif key in BO_METHODS and BO_METHODS[key] is SelectorKind.BOSW:
        cfg = (scfg or SelectorConfig()).for_budget(L)
        dirs = bosw(oracle, cfg, rng)
        # bosw has already evaluated every direction; re-score without touching the counter
        values = landscape.evaluate_many(dirs)
    else:
        raise InvalidArgumentError(f"{method!r} cannot run the landscape benchmark (use SW, a QSW name or BOSW)")
    if oracle.evaluations != L:
        raise SlicekitInternalError(f"{method} used {oracle.evaluations} evaluations for a budget of {L}")
    return float(np.max(values))
