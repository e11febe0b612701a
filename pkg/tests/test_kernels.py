"""Compiled kernels against the numpy fallback, plus sampling semantics."""

import subprocess
import sys

import numpy as np
import pytest

from sphereflow import kernels
from sphereflow.geometry import Rotation3


def _have_compiled() -> bool:
    try:
        kernels.backend_module("compiled")
        return True
    except ImportError:
        return False


needs_compiled = pytest.mark.skipif(not _have_compiled(), reason="compiled backend not built")


def test_backend_name_is_known():
    assert kernels.BACKEND in ("compiled", "numpy")
    assert kernels.get_backend() == kernels.BACKEND


def test_env_override_forces_numpy_backend():
    code = "import sphereflow.kernels as k; print(k.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"SPHEREFLOW_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"},
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


# --- sampling semantics (hold for whichever backend is active) ---


def test_bilinear_at_integer_coords_is_exact():
    rng = np.random.default_rng(0)
    img = rng.normal(size=(8, 16, 3))
    cols, rows = np.meshgrid(np.arange(16, dtype=float), np.arange(8, dtype=float))
    out = kernels.sample_bilinear(img, cols, rows)
    np.testing.assert_array_equal(out, img)


def test_bilinear_midpoint_is_average():
    img = np.zeros((2, 4))
    img[0] = [0.0, 2.0, 4.0, 6.0]
    img[1] = img[0]
    out = kernels.sample_bilinear(img, np.array([0.5, 1.5]), np.array([0.0, 1.0]))
    np.testing.assert_allclose(out, [1.0, 3.0], atol=1e-15)


def test_horizontal_wrap_and_vertical_clamp():
    img = np.arange(12, dtype=float).reshape(3, 4)
    # col -1 is the last column; row 99 clamps to the bottom row
    out = kernels.sample_nearest(img, np.array([-1.0, 4.0]), np.array([0.0, 99.0]))
    assert out[0] == img[0, 3]
    assert out[1] == img[2, 0]
    bi = kernels.sample_bilinear(img, np.array([-0.5]), np.array([0.0]))
    assert bi[0] == pytest.approx(0.5 * (img[0, 3] + img[0, 0]), abs=1e-15)


def test_nearest_preserves_dtype():
    img8 = np.arange(12, dtype=np.uint8).reshape(3, 4)
    out = kernels.sample_nearest(img8, np.array([1.2]), np.array([0.9]))
    assert out.dtype == np.uint8
    assert out[0] == img8[1, 1]
    img32 = img8.astype(np.float32)
    assert kernels.sample_nearest(img32, np.array([1.2]), np.array([0.9])).dtype == np.float32


def test_rotate_pixel_coords_identity_matrix():
    cols, rows = np.meshgrid(np.arange(32, dtype=float), np.arange(16, dtype=float))
    oc, orow = kernels.rotate_pixel_coords(np.eye(3), cols, rows, 32, 16)
    np.testing.assert_allclose(oc, cols, atol=1e-9)
    np.testing.assert_allclose(orow, rows, atol=1e-9)


def test_rotate_pixel_coords_output_ranges():
    rng = np.random.default_rng(1)
    m = Rotation3.from_euler(0.4, -1.1, 2.3).matrix
    cols = rng.uniform(-0.5, 63.5, 500)
    rows = rng.uniform(-0.5, 31.5, 500)
    oc, orow = kernels.rotate_pixel_coords(m, cols, rows, 64, 32)
    assert oc.min() > -0.5 - 1e-9 and oc.max() <= 63.5 + 1e-9
    assert orow.min() >= -0.5 - 1e-9 and orow.max() <= 31.5 + 1e-9


# --- backend parity ---


@needs_compiled
def test_rotation_grids_match_between_backends():
    rng = np.random.default_rng(2)
    m = Rotation3.from_euler(0.3, -0.2, 0.9).matrix
    cols = rng.uniform(-5, 133, size=(64, 128))
    rows = rng.uniform(-5, 69, size=(64, 128))
    c1, r1 = kernels.rotate_pixel_coords(m, cols, rows, 128, 64, backend="compiled")
    c2, r2 = kernels.rotate_pixel_coords(m, cols, rows, 128, 64, backend="numpy")
    assert np.abs(c1 - c2).max() < 1e-9
    assert np.abs(r1 - r2).max() < 1e-9


@needs_compiled
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_bilinear_matches_between_backends(dtype):
    rng = np.random.default_rng(3)
    img = rng.normal(size=(32, 64, 2)).astype(dtype)
    cols = rng.uniform(-3, 67, size=700)
    rows = rng.uniform(-3, 35, size=700)
    b1 = kernels.sample_bilinear(img, cols, rows, backend="compiled")
    b2 = kernels.sample_bilinear(img, cols, rows, backend="numpy")
    assert np.abs(b1 - b2).max() < 1e-12


@needs_compiled
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_nearest_is_bit_identical_between_backends(dtype):
    rng = np.random.default_rng(4)
    img = rng.normal(size=(32, 64, 3)).astype(dtype)
    cols = rng.uniform(-3, 67, size=700)
    rows = rng.uniform(-3, 35, size=700)
    n1 = kernels.sample_nearest(img, cols, rows, backend="compiled")
    n2 = kernels.sample_nearest(img, cols, rows, backend="numpy")
    np.testing.assert_array_equal(n1, n2)
