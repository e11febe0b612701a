"""Hot per-pixel kernels with a compiled core and a pure-numpy fallback.

The compiled extension (``_core``, Cython) is preferred when importable;
``SPHEREFLOW_PURE_PYTHON=1`` forces the numpy fallback. Both backends share
the contracts documented in :mod:`sphereflow.kernels.fallback`; they agree to
~1e-9 (last-ulp trig differences aside) and every test tolerance in the suite
covers both. ``BACKEND`` names the active one.

Shapes: these wrappers accept coordinate arrays of any shape and images of
shape (H, W) or (H, W, C); the backends see flat contiguous buffers.
"""

import os

import numpy as np

from . import fallback as _fallback

if os.environ.get("SPHEREFLOW_PURE_PYTHON", "") == "1":
    _impl = _fallback
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _fallback

BACKEND: str = _impl.BACKEND_NAME

__all__ = [
    "BACKEND",
    "rotate_pixel_coords",
    "sample_bilinear",
    "sample_nearest",
    "get_backend",
    "backend_module",
]


def get_backend() -> str:
    return BACKEND


def backend_module(name: str | None = None):
    """Return a backend module by name ("compiled"/"numpy"); default active."""
    if name is None:
        return _impl
    if name == "numpy":
        return _fallback
    if name == "compiled":
        from . import _core  # noqa: F811

        return _core
    raise ValueError(f"unknown backend {name!r}")


def _as_flat_f64(a):
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64).ravel())


def _as_image3d(img, dtypes=(np.float32, np.float64)):
    img = np.asarray(img)
    if img.ndim == 2:
        img3 = img[:, :, None]
        squeeze = True
    elif img.ndim == 3:
        img3 = img
        squeeze = False
    else:
        raise ValueError(f"image must be 2-D or 3-D, got shape {img.shape}")
    if img3.dtype not in [np.dtype(d) for d in dtypes]:
        img3 = img3.astype(np.float64)
    return np.ascontiguousarray(img3), squeeze


def rotate_pixel_coords(matrix, col, row, width: int, height: int, backend=None):
    """Rotate continuous pixel coordinates on the sphere; see fallback docs."""
    impl = backend_module(backend) if backend else _impl
    col = np.asarray(col, dtype=np.float64)
    shape = col.shape
    m = np.ascontiguousarray(np.asarray(matrix, dtype=np.float64))
    oc, orow = impl.rotate_pixel_coords(
        m, _as_flat_f64(col), _as_flat_f64(row), int(width), int(height)
    )
    return np.asarray(oc).reshape(shape), np.asarray(orow).reshape(shape)


def sample_bilinear(img, col, row, backend=None):
    """Bilinear sample with horizontal wrap / vertical clamp; float64 result."""
    impl = backend_module(backend) if backend else _impl
    img3, squeeze = _as_image3d(img)
    col = np.asarray(col, dtype=np.float64)
    shape = col.shape
    out = np.asarray(impl.sample_bilinear(img3, _as_flat_f64(col), _as_flat_f64(row)))
    out = out.reshape(shape + (img3.shape[2],))
    return out[..., 0] if squeeze else out


def sample_nearest(img, col, row, backend=None):
    """Nearest-neighbor sample; pure gather, input dtype preserved."""
    img_in = np.asarray(img)
    col = np.asarray(col, dtype=np.float64)
    shape = col.shape
    if img_in.dtype in (np.dtype(np.float32), np.dtype(np.float64)):
        impl = backend_module(backend) if backend else _impl
    else:
        # a gather is dtype-generic and backend-invariant
        impl = _fallback
    img3 = img_in[:, :, None] if img_in.ndim == 2 else img_in
    if img3.ndim != 3:
        raise ValueError(f"image must be 2-D or 3-D, got shape {img_in.shape}")
    img3 = np.ascontiguousarray(img3)
    out = np.asarray(impl.sample_nearest(img3, _as_flat_f64(col), _as_flat_f64(row)))
    out = out.reshape(shape + (img3.shape[2],))
    return out[..., 0] if img_in.ndim == 2 else out
