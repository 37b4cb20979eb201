# slicekit/dataio.py
"""Point-cloud (whitespace XYZ text) and image (binary PPM) readers and writers.

Other image formats convert to P6 with Pillow::

    from PIL import Image
    Image.open("photo.png").convert("RGB").save("photo.ppm")
"""
from __future__ import annotations

import logging
import os
import warnings
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from PIL import Image as PILImage, UnidentifiedImageError

from .errors import FormatError
from .sphere import DirectionSet, normalize

logger = logging.getLogger(__name__)

PPM_MAGIC = b"P6"


@dataclass(frozen=True)
class Image:
    """RGB image as an (n, 3) cloud of channel values in [0, 255], row-major."""
    width: int
    height: int
    pixels: npt.NDArray[np.float64]


# === Point clouds ===

def load_point_cloud(path: str | os.PathLike) -> npt.NDArray[np.float64]:
    """Reads one point per line; the dimension is taken from the first row."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=UserWarning)  # empty-file warning
            points = np.loadtxt(path, dtype=np.float64, ndmin=2, comments="#")
    except ValueError as exc:
        # numpy names the offending row, e.g. "... changed from 3 to 2 at row 2"
        raise FormatError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise FormatError(f"{path}: cannot read point cloud ({exc})") from exc
    if points.size == 0:
        raise FormatError(f"{path}: empty point cloud")
    if not np.all(np.isfinite(points)):
        raise FormatError(f"{path}: point cloud contains NaN or Inf")
    logger.debug(f"Loaded {points.shape[0]} points in R^{points.shape[1]} from {path}")
    return points


def save_point_cloud(path: str | os.PathLike, points: npt.ArrayLike) -> None:
    """Writes 17 significant digits so a reload is exact."""
    np.savetxt(path, np.atleast_2d(points), fmt="%.17g")


def load_directions(path: str | os.PathLike) -> DirectionSet:
    """Reads a direction set in XYZ format; rows are normalized."""
    points = load_point_cloud(path)
    try:
        return normalize(points)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# === Images ===

def load_image(path: str | os.PathLike) -> Image:
    """Decodes a binary PPM (P6, maxval 255)."""
    try:
        with open(path, "rb") as fh:
            magic = fh.read(2)
    except OSError as exc:
        raise FormatError(f"{path}: cannot read image ({exc})") from exc
    if magic != PPM_MAGIC:
        raise FormatError(f"{path}: expected a binary PPM (P6), found magic {magic!r}")
    try:
        with PILImage.open(path) as img:
            img.load()
            if img.mode != "RGB":
                raise FormatError(f"{path}: unsupported PPM mode {img.mode} (need 8-bit RGB)")
            width, height = img.size
            pixels = np.asarray(img, dtype=np.uint8).reshape(-1, 3).astype(np.float64)
    except (OSError, ValueError, SyntaxError, UnidentifiedImageError) as exc:
        raise FormatError(f"{path}: corrupt or truncated PPM ({exc})") from exc
    return Image(width, height, pixels)


def save_image(path: str | os.PathLike, image: Image) -> None:
    """Encodes as binary PPM; values are rounded and clipped to 0..255."""
    data = np.clip(np.rint(image.pixels), 0, 255).astype(np.uint8).reshape(image.height, image.width, 3)
    PILImage.fromarray(data).save(path, format="PPM")
