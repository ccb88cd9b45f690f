import numpy as np
import pytest

from oracles import bilinear_reference
from texfusion.errors import EmptyImageError
from texfusion.imageops import sample_bilinear, to_float, to_uint8


def test_round_trip_uint8_float():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(7, 9, 3), dtype=np.uint8)
    again = to_uint8(to_float(img))
    np.testing.assert_array_equal(again, img)


def test_to_uint8_clamps():
    arr = np.array([[[-0.2, 0.5, 1.7]]])
    np.testing.assert_array_equal(to_uint8(arr), [[[0, 128, 255]]])


def test_sample_bilinear_matches_scalar_reference():
    rng = np.random.default_rng(1)
    img64 = rng.random((11, 13, 3))
    img32 = img64.astype(np.float32)
    xs = rng.uniform(-1.0, 14.0, 50)  # includes out-of-range (clamped)
    ys = rng.uniform(-1.0, 12.0, 50)
    fast = sample_bilinear(img32, xs, ys)   # float32 rgb kernel path
    slow = sample_bilinear(img64, xs, ys)   # generic numpy path
    for k in range(50):
        ref = bilinear_reference(img64, xs[k], ys[k])
        np.testing.assert_allclose(fast[k], ref, atol=1e-6)
        np.testing.assert_allclose(slow[k], ref, atol=1e-12)


def test_sample_bilinear_2d_image():
    img = np.arange(12, dtype=np.float64).reshape(3, 4)
    assert sample_bilinear(img, np.array([1.5]), np.array([0.5]))[0] == pytest.approx(3.5)


def test_sample_bilinear_empty_raises():
    with pytest.raises(EmptyImageError):
        sample_bilinear(np.zeros((0, 4, 3), np.float32), np.array([0.0]), np.array([0.0]))


def test_sample_bilinear_integer_coords_exact():
    rng = np.random.default_rng(2)
    img = rng.random((6, 6, 3)).astype(np.float32)
    out = sample_bilinear(img, np.array([2.0, 5.0]), np.array([3.0, 0.0]))
    np.testing.assert_array_equal(out[0], img[3, 2])
    np.testing.assert_array_equal(out[1], img[0, 5])
