# tests/test_dataio.py
import numpy as np
import pytest

from slicekit.dataio import Image, load_directions, load_image, load_point_cloud, save_image, save_point_cloud
from slicekit.errors import FormatError

RED_PIXEL = b"P6\n1 1\n255\n" + bytes([255, 0, 0])


def test_load_point_cloud(tmp_path):
    path = tmp_path / "cloud.xyz"
    path.write_text("0 0 0\n1 0 0\n")
    cloud = load_point_cloud(path)
    assert cloud.shape == (2, 3)
    np.testing.assert_array_equal(cloud[1], [1.0, 0.0, 0.0])


def test_ragged_row_names_the_line(tmp_path):
    path = tmp_path / "ragged.xyz"
    path.write_text("0 0 0\n1 0\n")
    with pytest.raises(FormatError, match="row 2"):
        load_point_cloud(path)


@pytest.mark.parametrize("text", ["", "# only a comment\n"])
def test_empty_cloud(tmp_path, text):
    path = tmp_path / "empty.xyz"
    path.write_text(text)
    with pytest.raises(FormatError):
        load_point_cloud(path)


def test_non_numeric_and_missing_files(tmp_path):
    path = tmp_path / "words.xyz"
    path.write_text("a b c\n")
    with pytest.raises(FormatError):
        load_point_cloud(path)
    with pytest.raises(FormatError):
        load_point_cloud(tmp_path / "missing.xyz")


def test_point_cloud_round_trip(tmp_path, rng):
    cloud = rng.standard_normal((30, 3)) * 1e3
    path = tmp_path / "cloud.xyz"
    save_point_cloud(path, cloud)
    np.testing.assert_allclose(load_point_cloud(path), cloud, rtol=0, atol=1e-12)


def test_load_directions_normalizes(tmp_path):
    path = tmp_path / "dirs.xyz"
    path.write_text("2 0 0\n0 0 -3\n")
    np.testing.assert_allclose(load_directions(path), [[1, 0, 0], [0, 0, -1]])


def test_load_single_pixel(tmp_path):
    path = tmp_path / "red.ppm"
    path.write_bytes(RED_PIXEL)
    image = load_image(path)
    assert (image.width, image.height) == (1, 1)
    np.testing.assert_array_equal(image.pixels, [[255.0, 0.0, 0.0]])


def test_truncated_payload(tmp_path):
    path = tmp_path / "short.ppm"
    path.write_bytes(b"P6\n2 2\n255\n" + bytes(5))
    with pytest.raises(FormatError):
        load_image(path)


def test_wrong_magic(tmp_path):
    path = tmp_path / "ascii.ppm"
    path.write_bytes(b"P3\n1 1\n255\n255 0 0\n")
    with pytest.raises(FormatError, match="P6"):
        load_image(path)


def test_image_round_trip_is_byte_identical(tmp_path, rng):
    pixels = rng.integers(0, 256, size=(6 * 4, 3)).astype(np.float64)
    first, second = tmp_path / "a.ppm", tmp_path / "b.ppm"
    save_image(first, Image(6, 4, pixels))
    image = load_image(first)
    np.testing.assert_array_equal(image.pixels, pixels)
    save_image(second, image)
    assert first.read_bytes() == second.read_bytes()


def test_save_image_rounds_and_clips(tmp_path):
    path = tmp_path / "clip.ppm"
    save_image(path, Image(2, 1, np.array([[-4.0, 12.4, 300.0], [254.6, 0.5, 1.5]])))
    np.testing.assert_array_equal(load_image(path).pixels, [[0, 12, 255], [255, 0, 2]])
