# slicekit/gp.py
"""Gaussian-process surrogate on the sphere with the angular RBF kernel.

The kernel is a Gaussian of the chordal distance scaled by pi/2, so it agrees
with arc length at 0 and pi. A Gaussian of the geodesic distance itself is not
positive definite on the sphere once the lengthscale nears pi/2.

The GP is zero-mean on de-meaned targets with unit prior variance; the only
hyperparameter is the lengthscale, taken from the median pairwise geodesic
distance of the training directions. Observations are treated as noise-free
apart from a small diagonal jitter, escalated until the factorization succeeds.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import linalg
from scipy.special import erfcx, ndtr

from .errors import IllConditionedError, InvalidArgumentError
from .sphere import Direction, DirectionSet, cosine_matrix, pairwise_geodesic

logger = logging.getLogger(__name__)

FALLBACK_LENGTHSCALE = math.pi / 4
MIN_MEDIAN = 1e-6
JITTER_LADDER = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_SQRT_PI_OVER_2 = 0.5 * math.log(math.pi / 2.0)
_INV_SQRT_EPS = 1.0 / math.sqrt(np.finfo(np.float64).eps)
# Chord length 2 maps to arc length pi
_ARC_SCALE_SQ = (math.pi / 2.0) ** 2


class AcquisitionKind(enum.Enum):
    UCB = "ucb"
    EI = "ei"
    LOG_EI = "logei"
    THOMPSON = "thompson"


@dataclass(frozen=True)
class GpState:
    """Fitted surrogate: training data, lengthscale, jitter and the Cholesky solve."""
    train_dirs: DirectionSet
    train_vals: npt.NDArray[np.float64]
    mean_offset: float
    lengthscale: float
    jitter: float
    chol: npt.NDArray[np.float64]
    alpha: npt.NDArray[np.float64]

    @property
    def size(self) -> int:
        return int(self.train_vals.shape[0])

    @property
    def best(self) -> float:
        return float(np.max(self.train_vals))


# === Kernel ===

def _check_lengthscale(lengthscale: float) -> None:
    if not (lengthscale > 0 and math.isfinite(lengthscale)):
        raise InvalidArgumentError(f"lengthscale must be positive and finite, got {lengthscale}")


def angular_rbf(a: Direction, b: Direction, lengthscale: float) -> float:
    """exp(-0.5 * (pi/2 * |a - b| / lengthscale)^2)."""
    _check_lengthscale(lengthscale)
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return math.exp(-0.5 * _ARC_SCALE_SQ * float(diff @ diff) / lengthscale ** 2)


def kernel_matrix(a: DirectionSet, b: DirectionSet, lengthscale: float) -> npt.NDArray[np.float64]:
    """Angular RBF between every row of ``a`` and every row of ``b``."""
    _check_lengthscale(lengthscale)
    chord_sq = 2.0 - 2.0 * cosine_matrix(a, b)
    return np.exp(-0.5 * _ARC_SCALE_SQ * chord_sq / lengthscale ** 2)


def median_lengthscale(dirs: DirectionSet) -> float:
    """Median pairwise geodesic distance, or pi/4 when all directions nearly coincide."""
    dirs = np.atleast_2d(dirs)
    if dirs.shape[0] < 2:
        raise InvalidArgumentError("the median heuristic needs at least two directions")
    median = float(np.median(pairwise_geodesic(dirs)))
    if median < MIN_MEDIAN:
        return FALLBACK_LENGTHSCALE
    return median


# === Fit and posterior ===

def fit(dirs: DirectionSet, vals: npt.ArrayLike, lengthscale: float | None = None) -> GpState:
    """Fits the zero-mean GP on de-meaned values."""
    dirs = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
    vals = np.asarray(vals, dtype=np.float64).ravel()
    if dirs.shape[0] < 1 or dirs.shape[0] != vals.shape[0]:
        raise InvalidArgumentError(f"need matching nonempty training data, got {dirs.shape[0]} dirs and {vals.shape[0]} values")
    if not np.all(np.isfinite(vals)):
        raise InvalidArgumentError("training values must be finite")

    if lengthscale is None:
        lengthscale = median_lengthscale(dirs) if dirs.shape[0] >= 2 else FALLBACK_LENGTHSCALE
    _check_lengthscale(lengthscale)

    offset = float(np.mean(vals))
    centered = vals - offset
    K = kernel_matrix(dirs, dirs, lengthscale)
    eye = np.eye(K.shape[0])
    for jitter in JITTER_LADDER:
        try:
            chol = linalg.cholesky(K + jitter * eye, lower=True)
        except linalg.LinAlgError:
            continue
        alpha = linalg.cho_solve((chol, True), centered)
        logger.debug(f"GP fit: n={vals.size}, lengthscale={lengthscale:.4f}, jitter={jitter:g}")
        return GpState(dirs, vals, offset, float(lengthscale), jitter, chol, alpha)
    raise IllConditionedError(f"kernel matrix of {vals.size} directions is not factorizable at jitter {JITTER_LADDER[-1]:g}")


def posterior_batch(state: GpState, queries: DirectionSet) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Posterior means and standard deviations at every query row."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.shape[1] != state.train_dirs.shape[1]:
        raise InvalidArgumentError(f"query dimension {queries.shape[1]} does not match training dimension {state.train_dirs.shape[1]}")
    k_star = kernel_matrix(state.train_dirs, queries, state.lengthscale)
    mean = k_star.T @ state.alpha + state.mean_offset
    v = linalg.solve_triangular(state.chol, k_star, lower=True)
    var = np.clip(1.0 - np.sum(v * v, axis=0), 0.0, None)
    return mean, np.sqrt(var)


def posterior(state: GpState, query: Direction) -> tuple[float, float]:
    """Posterior (mean, std) at a single direction."""
    mean, std = posterior_batch(state, np.asarray(query, dtype=np.float64)[None, :])
    return float(mean[0]), float(std[0])


# === Acquisition ===

def _log1mexp(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """log(1 - exp(x)) for x < 0."""
    return np.where(x > -math.log(2.0), np.log(-np.expm1(x)), np.log1p(-np.exp(x)))


def _log_h(z: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """log(phi(z) + z * Phi(z)), stable for very negative z."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    upper = z > -1.0
    zu = z[upper]
    out[upper] = np.log(np.exp(-0.5 * zu * zu - _LOG_SQRT_2PI) + zu * ndtr(zu))
    middle = (~upper) & (z > -_INV_SQRT_EPS)
    zm = z[middle]
    out[middle] = (-0.5 * zm * zm - _LOG_SQRT_2PI
                   + _log1mexp(np.log(erfcx(-zm / math.sqrt(2.0)) * np.abs(zm)) + _LOG_SQRT_PI_OVER_2))
    lower = ~(upper | middle)
    zl = z[lower]
    out[lower] = -0.5 * zl * zl - _LOG_SQRT_2PI - 2.0 * np.log(np.abs(zl))
    return out


def acquisition_scores(state: GpState, queries: DirectionSet, kind: AcquisitionKind, best_so_far: float,
                       rng: np.random.Generator, beta: float = 0.7) -> npt.NDArray[np.float64]:
    """Acquisition value of every query row (larger is better)."""
    if beta < 0:
        raise InvalidArgumentError(f"UCB weight must be >= 0, got {beta}")
    mean, std = posterior_batch(state, queries)
    if kind is AcquisitionKind.UCB:
        return mean + beta * std
    if kind is AcquisitionKind.THOMPSON:
        # Independent pointwise draws, not a joint sample over the pool
        return mean + std * rng.standard_normal(mean.shape)

    improvement = mean - best_so_far
    positive = std > 0
    safe_std = np.where(positive, std, 1.0)
    z = improvement / safe_std
    if kind is AcquisitionKind.EI:
        ei = improvement * ndtr(z) + safe_std * np.exp(-0.5 * z * z - _LOG_SQRT_2PI)
        return np.where(positive, ei, np.maximum(improvement, 0.0))
    with np.errstate(divide="ignore"):
        degenerate = np.log(np.maximum(improvement, 0.0))
    return np.where(positive, _log_h(z) + np.log(safe_std), degenerate)


def acquisition(state: GpState, query: Direction, kind: AcquisitionKind, best_so_far: float,
                rng: np.random.Generator, beta: float = 0.7) -> float:
    """Acquisition score at a single direction."""
    scores = acquisition_scores(state, np.asarray(query, dtype=np.float64)[None, :], kind, best_so_far, rng, beta)
    return float(scores[0])


def annealed_choice(scores: npt.NDArray[np.float64], t: int, gamma: float, rng: np.random.Generator) -> int:
    """Index of the argmax with probability t^-gamma, else a uniform index."""
    if t < 1:
        raise InvalidArgumentError(f"annealing step must be >= 1, got {t}")
    if not 0 < gamma < 1:
        raise InvalidArgumentError(f"annealing exponent must be in (0, 1), got {gamma}")
    if scores.size == 0:
        raise InvalidArgumentError("cannot choose from an empty pool")
    epsilon = t ** (-gamma)
    if rng.random() < epsilon:
        return int(np.argmax(scores))
    return int(rng.integers(scores.size))


def annealed_select(state: GpState, pool: DirectionSet, t: int, gamma: float, kind: AcquisitionKind,
                    rng: np.random.Generator, beta: float = 0.7) -> Direction:
    """Acquisition argmax over the pool with probability t^-gamma, else a uniform pool element."""
    pool = np.atleast_2d(pool)
    if pool.shape[0] == 0:
        raise InvalidArgumentError("cannot select from an empty pool")
    scores = acquisition_scores(state, pool, kind, state.best, rng, beta)
    return pool[annealed_choice(scores, t, gamma, rng)]
