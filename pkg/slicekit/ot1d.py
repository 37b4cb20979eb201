# slicekit/ot1d.py
"""Exact 1-D Wasserstein costs, the finite-slice SW estimator and its gradient.

All clouds are equal-weight empirical measures of the same size ``n``; the 1-D
optimal plan is then the monotone rearrangement (sorted values matched by rank).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt

from .errors import DegenerateGradientError, InvalidArgumentError
from .sphere import Direction, DirectionSet

logger = logging.getLogger(__name__)

PointCloud = npt.NDArray[np.float64]
GradientMode = Literal["sw2", "sw2-squared"]
GRADIENT_MODES = ("sw2", "sw2-squared")

DEGENERATE_SW = 1e-12
DEFAULT_CHUNK = 2048


@dataclass(frozen=True)
class SwValue:
    """Finite-slice estimate of SW_p^p."""
    value: float
    p: float
    L: int

    @property
    def distance(self) -> float:
        """SW_p itself, i.e. value ** (1/p)."""
        return self.value ** (1.0 / self.p)


# === Validation ===

def as_point_cloud(points: npt.ArrayLike) -> PointCloud:
    """Validates and returns a cloud as a float (n, d) array."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidArgumentError(f"point cloud must be a nonempty (n, d) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("point cloud contains NaN or Inf")
    return arr


def _check_pair(mu: PointCloud, nu: PointCloud) -> None:
    if mu.shape[1] != nu.shape[1]:
        raise InvalidArgumentError(f"dimension mismatch: {mu.shape[1]} vs {nu.shape[1]}")
    if mu.shape[0] != nu.shape[0]:
        raise InvalidArgumentError(f"clouds must have equal sizes, got {mu.shape[0]} and {nu.shape[0]}")


def _check_order(p: float) -> None:
    if p < 1:
        raise InvalidArgumentError(f"order p must be >= 1, got {p}")


def _check_directions(dirs: DirectionSet, d: int) -> DirectionSet:
    dirs = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
    if dirs.shape[0] == 0:
        raise InvalidArgumentError("direction set is empty")
    if dirs.shape[1] != d:
        raise InvalidArgumentError(f"directions live in R^{dirs.shape[1]} but clouds in R^{d}")
    return dirs


# === 1-D transport ===

def project(cloud: PointCloud, theta: Direction) -> npt.NDArray[np.float64]:
    """Pushforward of the cloud by x -> <theta, x>."""
    cloud = np.asarray(cloud, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if cloud.ndim != 2 or theta.shape != (cloud.shape[1],):
        raise InvalidArgumentError(f"cannot project cloud {cloud.shape} onto direction {theta.shape}")
    return cloud @ theta


def wasserstein_1d(xs: npt.ArrayLike, ys: npt.ArrayLike, p: float = 2.0) -> float:
    """W_p^p between two equal-size 1-D empirical measures."""
    _check_order(p)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size == 0:
        raise InvalidArgumentError(f"need two nonempty vectors of equal length, got {xs.shape} and {ys.shape}")
    # np.sort returns copies; the inputs stay untouched
    return float(np.mean(np.abs(np.sort(xs) - np.sort(ys)) ** p))


def slice_costs(mu: PointCloud, nu: PointCloud, dirs: DirectionSet, p: float = 2.0,
                chunk: int = DEFAULT_CHUNK) -> npt.NDArray[np.float64]:
    """Per-slice W_p^p of the projected clouds, in slice order."""
    _check_order(p)
    mu = as_point_cloud(mu)
    nu = as_point_cloud(nu)
    _check_pair(mu, nu)
    dirs = _check_directions(dirs, mu.shape[1])
    costs = np.empty(dirs.shape[0], dtype=np.float64)
    for start in range(0, dirs.shape[0], chunk):
        block = dirs[start:start + chunk]
        px = np.sort(mu @ block.T, axis=0)
        py = np.sort(nu @ block.T, axis=0)
        costs[start:start + chunk] = np.mean(np.abs(px - py) ** p, axis=0)
    return costs


def sw_estimate(mu: PointCloud, nu: PointCloud, dirs: DirectionSet, p: float = 2.0,
                chunk: int = DEFAULT_CHUNK) -> SwValue:
    """Finite-slice estimate of SW_p^p: the mean of the slice costs."""
    costs = slice_costs(mu, nu, dirs, p, chunk=chunk)
    # Plain sequential sum in slice order keeps the value independent of chunking
    total = 0.0
    for c in costs:
        total += float(c)
    return SwValue(value=total / costs.size, p=float(p), L=int(costs.size))


# === Gradient ===

def _matched_residuals(Z: PointCloud, Y: PointCloud, dirs: DirectionSet) -> npt.NDArray[np.float64]:
    """theta^T z_i minus the rank-matched target value, as an (n, L) array."""
    pz = Z @ dirs.T
    py = np.sort(Y @ dirs.T, axis=0)
    # Stable argsort: ties are matched in original index order
    order = np.argsort(pz, axis=0, kind="stable")
    matched = np.empty_like(pz)
    np.put_along_axis(matched, order, py, axis=0)
    return pz - matched


def sw_gradient(Z: PointCloud, Y: PointCloud, dirs: DirectionSet,
                mode: GradientMode = "sw2") -> npt.NDArray[np.float64]:
    """Gradient of SW_2^2 (``sw2-squared``) or SW_2 (``sw2``) with respect to Z."""
    if mode not in GRADIENT_MODES:
        raise InvalidArgumentError(f"unknown gradient mode {mode!r}; expected one of {GRADIENT_MODES}")
    Z = as_point_cloud(Z)
    Y = as_point_cloud(Y)
    _check_pair(Z, Y)
    dirs = _check_directions(dirs, Z.shape[1])
    n, L = Z.shape[0], dirs.shape[0]

    residuals = _matched_residuals(Z, Y, dirs)
    grad_sq = (2.0 / (n * L)) * (residuals @ dirs)
    if mode == "sw2-squared":
        return grad_sq

    sw2 = float(np.sqrt(np.sum(residuals ** 2) / (n * L)))
    if sw2 < DEGENERATE_SW:
        raise DegenerateGradientError(f"SW_2 = {sw2:.3g} is below {DEGENERATE_SW:g}; the SW_2 gradient is undefined")
    return grad_sq / (2.0 * sw2)
