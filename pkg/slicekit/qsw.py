# slicekit/qsw.py
"""Quasi-Monte Carlo direction sets (QSW) and their randomized versions (RQSW).

Sobol points come from ``scipy.stats.qmc.Sobol``, which ships the Joe–Kuo
"new-joe-kuo-6.21201" direction numbers. Two scramblings are offered:
``owen`` (scipy's linear matrix scramble followed by a random digital shift,
the default) and ``xor`` (random digital shift only).
"""
from __future__ import annotations

import enum
import logging
import warnings
from functools import lru_cache
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy.stats import norm, qmc

from .errors import InvalidArgumentError, SlicekitInternalError
from .sphere import DirectionSet, normalize, random_rotation, rotate

logger = logging.getLogger(__name__)

MIN_SOBOL_DIM = 2
MAX_SOBOL_DIM = 21
SOBOL_BITS = 30
GAUSS_EPS = 1e-12
COINCIDENT_TOL = 1e-12

EnergyKind = Literal["coulomb", "distance"]
ScrambleMethod = Literal["owen", "xor"]

# Energy-design defaults: spiral init, 1000 projected-gradient iterations
ENERGY_ITERS = 1000
ENERGY_STEP = 0.01
MAX_HALVINGS = 40


class QswKind(enum.Enum):
    EQUAL_AREA_SOBOL = "E"
    GAUSSIAN_SOBOL = "G"
    SPIRAL = "S"
    DISTANCE_OPTIMIZED = "D"
    COULOMB_OPTIMIZED = "C"

    @property
    def sobol_based(self) -> bool:
        return self in (QswKind.EQUAL_AREA_SOBOL, QswKind.GAUSSIAN_SOBOL)

    @property
    def sphere_only(self) -> bool:
        """Kinds defined on S^2 only."""
        return self is not QswKind.GAUSSIAN_SOBOL


class RandomizeMode(enum.Enum):
    NONE = "none"
    SCRAMBLE = "scramble"
    ROTATE = "rotate"


# === Sobol points ===

def sobol(n: int, dim: int, scramble: int | None = None, method: ScrambleMethod = "owen") -> npt.NDArray[np.float64]:
    """First ``n`` points of a (optionally scrambled) Sobol sequence in [0, 1)^dim."""
    if not MIN_SOBOL_DIM <= dim <= MAX_SOBOL_DIM:
        raise InvalidArgumentError(f"Sobol dimension must be in [{MIN_SOBOL_DIM}, {MAX_SOBOL_DIM}], got {dim}")
    if n < 1:
        raise InvalidArgumentError(f"need at least one Sobol point, got n={n}")
    if method not in ("owen", "xor"):
        raise InvalidArgumentError(f"unknown scramble method {method!r}")

    owen = scramble is not None and method == "owen"
    engine = qmc.Sobol(d=dim, scramble=owen, bits=SOBOL_BITS, seed=scramble if owen else None)
    with warnings.catch_warnings():
        # scipy warns when n is not a power of two; prefixes are what we want here
        warnings.simplefilter("ignore", category=UserWarning)
        points = engine.random(n)

    if scramble is not None and method == "xor":
        scale = float(2 ** SOBOL_BITS)
        shift = np.random.default_rng(scramble).integers(0, 2 ** SOBOL_BITS, size=dim, dtype=np.uint64)
        ints = np.floor(points * scale).astype(np.uint64)
        points = (ints ^ shift).astype(np.float64) / scale
    return points


# === Maps to the sphere ===

def equal_area_map(u: npt.ArrayLike) -> DirectionSet:
    """Lambert cylindrical equal-area map [0,1)^2 -> S^2 (single point or rows)."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape[-1] != 2:
        raise InvalidArgumentError(f"equal-area map takes 2-D points, got shape {u.shape}")
    z = 2.0 * u[..., 1] - 1.0
    phi = 2.0 * np.pi * u[..., 0]
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def gaussian_map(u: npt.ArrayLike) -> DirectionSet:
    """Componentwise inverse normal CDF followed by normalization (single point or rows).

    Inputs are clamped to [eps, 1 - eps]. The centre point (0.5, ..., 0.5) maps to the
    zero vector; such rows are nudged by +eps before inversion, which lands them on
    the diagonal direction (1, ..., 1)/sqrt(d).
    """
    u = np.clip(np.asarray(u, dtype=np.float64), GAUSS_EPS, 1.0 - GAUSS_EPS)
    g = norm.ppf(u)
    norms = np.linalg.norm(g, axis=-1, keepdims=True)
    zero = norms[..., 0] == 0.0
    if np.any(zero):
        g = np.array(g, copy=True)
        g[zero] = norm.ppf(np.clip(u[zero] + GAUSS_EPS, GAUSS_EPS, 1.0 - GAUSS_EPS))
        norms = np.linalg.norm(g, axis=-1, keepdims=True)
        if np.any(norms == 0.0):
            raise SlicekitInternalError("Gaussian map produced a zero vector after perturbation")
    return g / norms


# === Structured S^2 designs ===

def spiral(n: int) -> DirectionSet:
    """Generalized spiral points with golden-angle longitude increments."""
    if n < 1:
        raise InvalidArgumentError(f"need at least one spiral point, got n={n}")
    ell = np.arange(1, n + 1, dtype=np.float64)
    z = 1.0 - (2.0 * ell - 1.0) / n
    phi = ell * np.pi * (3.0 - np.sqrt(5.0))
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def energy(points: DirectionSet, kind: EnergyKind) -> float:
    """Coulomb energy sum 1/r_ij, or the negated sum of chordal distances."""
    diff = points[:, None, :] - points[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    iu = np.triu_indices(points.shape[0], k=1)
    r = dist[iu]
    if kind == "coulomb":
        return float(np.sum(1.0 / r))
    return float(-np.sum(r))


def _energy_gradient(points: DirectionSet, kind: EnergyKind) -> npt.NDArray[np.float64]:
    diff = points[:, None, :] - points[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    np.fill_diagonal(dist, np.inf)
    power = 3 if kind == "coulomb" else 1
    return -np.sum(diff / dist[..., None] ** power, axis=1)


def _separate_coincident(points: DirectionSet) -> DirectionSet:
    dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    np.fill_diagonal(dist, np.inf)
    if np.min(dist) > COINCIDENT_TOL:
        return points
    logger.warning("Coincident directions in energy-optimization init; perturbing by 1e-8")
    jitter = np.random.default_rng(0).standard_normal(points.shape) * 1e-8
    return normalize(points + jitter)


def optimize_energy_trace(init: DirectionSet, kind: EnergyKind = "coulomb", iters: int = ENERGY_ITERS,
                          step: float = ENERGY_STEP) -> tuple[DirectionSet, list[float]]:
    """Projected gradient descent on a pairwise energy, with backtracking.

    ``step`` is the largest per-point move in radians; a step that raises the
    energy is halved until it does not. Returns the set and the energy after
    every accepted step (starting with the initial energy).
    """
    if kind not in ("coulomb", "distance"):
        raise InvalidArgumentError(f"unknown energy kind {kind!r}")
    points = np.array(init, dtype=np.float64, copy=True)
    if points.ndim != 2 or points.shape[1] != 3:
        raise InvalidArgumentError(f"energy designs live on S^2, got shape {points.shape}")
    if iters < 0 or step <= 0:
        raise InvalidArgumentError("iters must be >= 0 and step > 0")
    if iters == 0 or points.shape[0] < 2:
        return points, [energy(points, kind)] if points.shape[0] >= 2 else [0.0]

    points = _separate_coincident(points)
    current = energy(points, kind)
    trace = [current]
    rate = step
    for _ in range(iters):
        grad = _energy_gradient(points, kind)
        tangent = grad - np.sum(grad * points, axis=1, keepdims=True) * points
        scale = np.max(np.linalg.norm(tangent, axis=1))
        if scale == 0.0:
            break
        direction = tangent / scale
        for _ in range(MAX_HALVINGS):
            candidate = normalize(points - rate * direction)
            value = energy(candidate, kind)
            if value <= current:
                break
            rate *= 0.5
        else:
            break  # no decreasing step at machine resolution
        points, current = candidate, value
        trace.append(current)
        rate = min(rate * 1.1, step)
    return points, trace


def optimize_energy(init: DirectionSet, kind: EnergyKind = "coulomb", iters: int = ENERGY_ITERS,
                    step: float = ENERGY_STEP) -> DirectionSet:
    """Energy-optimized design started from ``init`` (see optimize_energy_trace)."""
    points, trace = optimize_energy_trace(init, kind, iters, step)
    logger.debug(f"{kind} energy {trace[0]:.6g} -> {trace[-1]:.6g} in {len(trace) - 1} accepted steps")
    return points


@lru_cache(maxsize=64)
def _energy_design(kind: EnergyKind, L: int, iters: int, step: float) -> DirectionSet:
    design = optimize_energy(spiral(L), kind, iters, step)
    design.setflags(write=False)
    return design


# === Entry point ===

def make_qsw(kind: QswKind, L: int, randomize: RandomizeMode = RandomizeMode.NONE,
             rng: np.random.Generator | None = None, d: int = 3,
             scramble_method: ScrambleMethod = "owen") -> DirectionSet:
    """Builds an L-direction QSW set, optionally scrambled or randomly rotated."""
    if L < 1:
        raise InvalidArgumentError(f"need L >= 1, got {L}")
    if kind.sphere_only and d != 3:
        raise InvalidArgumentError(f"{kind.name} is only defined for d = 3, got d={d}")
    if randomize is RandomizeMode.SCRAMBLE and not kind.sobol_based:
        raise InvalidArgumentError(f"scrambling applies only to Sobol-based kinds, not {kind.name}")
    if randomize is not RandomizeMode.NONE and rng is None:
        raise InvalidArgumentError("randomized QSW needs a generator")

    scramble = None
    if randomize is RandomizeMode.SCRAMBLE:
        scramble = int(rng.integers(0, 2 ** 63 - 1))

    if kind is QswKind.EQUAL_AREA_SOBOL:
        base = equal_area_map(sobol(L, 2, scramble, scramble_method))
    elif kind is QswKind.GAUSSIAN_SOBOL:
        base = gaussian_map(sobol(L, d, scramble, scramble_method))
    elif kind is QswKind.SPIRAL:
        base = spiral(L)
    elif kind is QswKind.DISTANCE_OPTIMIZED:
        base = np.array(_energy_design("distance", L, ENERGY_ITERS, ENERGY_STEP))
    else:
        base = np.array(_energy_design("coulomb", L, ENERGY_ITERS, ENERGY_STEP))

    if randomize is RandomizeMode.ROTATE:
        base = rotate(base, random_rotation(rng, d))
    return base
