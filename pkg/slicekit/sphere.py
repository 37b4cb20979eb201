# slicekit/sphere.py
"""Unit-sphere geometry: uniform sampling, geodesic distances and rotations.

Directions are plain ``numpy`` arrays: a single direction has shape ``(d,)`` and a
direction set has shape ``(L, d)`` with unit-norm rows. Row order is meaningful
(selectors replace directions by index) and is never changed by these helpers.
Every random routine takes an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import numpy as np
import numpy.typing as npt
from scipy.stats import special_ortho_group

from .errors import InvalidArgumentError

Direction = npt.NDArray[np.float64]
DirectionSet = npt.NDArray[np.float64]

UNIT_TOL = 1e-9


def _check_dim(d: int) -> None:
    if d < 2:
        raise InvalidArgumentError(f"sphere dimension must be >= 2, got d={d}")


def normalize(vectors: npt.ArrayLike) -> DirectionSet:
    """Scales every row (or a single vector) to unit length."""
    arr = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(arr, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise InvalidArgumentError("cannot normalize a zero vector")
    return arr / norms


def as_direction_set(directions: npt.ArrayLike) -> DirectionSet:
    """Validates and returns a direction set as a float (L, d) array."""
    arr = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InvalidArgumentError(f"direction set must be a nonempty (L, d) array, got shape {arr.shape}")
    _check_dim(arr.shape[1])
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("direction set contains non-finite values")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise InvalidArgumentError(f"directions must be unit vectors (max norm error {np.max(np.abs(norms - 1.0)):.3g})")
    return arr


def sample_uniform(rng: np.random.Generator, d: int, n: int) -> DirectionSet:
    """Draws ``n`` i.i.d. uniform directions on S^(d-1) as normalized Gaussians."""
    _check_dim(d)
    if n < 1:
        raise InvalidArgumentError(f"need at least one direction, got n={n}")
    return normalize(rng.standard_normal((n, d)))


def cosine_matrix(a: DirectionSet, b: DirectionSet) -> npt.NDArray[np.float64]:
    """Inner products of unit vectors, clamped to [-1, 1]."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape[1] != b.shape[1]:
        raise InvalidArgumentError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return np.clip(a @ b.T, -1.0, 1.0)


def geodesic_distance(a: Direction, b: Direction) -> float:
    """Great-circle distance in radians, in [0, pi]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.arccos(np.clip(np.dot(a, b), -1.0, 1.0)))


def geodesic_matrix(a: DirectionSet, b: DirectionSet) -> npt.NDArray[np.float64]:
    """All pairwise geodesic distances between the rows of ``a`` and ``b``."""
    return np.arccos(cosine_matrix(a, b))


def pairwise_geodesic(dirs: DirectionSet) -> npt.NDArray[np.float64]:
    """Condensed vector of the C(n, 2) geodesic distances within one set."""
    dist = geodesic_matrix(dirs, dirs)
    iu = np.triu_indices(dist.shape[0], k=1)
    return dist[iu]


def random_rotation(rng: np.random.Generator, d: int) -> npt.NDArray[np.float64]:
    """Haar-distributed rotation matrix in SO(d)."""
    _check_dim(d)
    return np.asarray(special_ortho_group.rvs(dim=d, random_state=rng), dtype=np.float64).reshape(d, d)


def rotate(dirs: DirectionSet, rotation: npt.NDArray[np.float64]) -> DirectionSet:
    """Applies ``rotation`` to every direction; re-normalizes away roundoff."""
    dirs = np.atleast_2d(dirs)
    if rotation.shape != (dirs.shape[1], dirs.shape[1]):
        raise InvalidArgumentError(f"rotation of shape {rotation.shape} does not act on d={dirs.shape[1]}")
    return normalize(dirs @ rotation.T)
