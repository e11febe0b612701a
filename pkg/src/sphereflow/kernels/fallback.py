"""Pure-numpy implementations of the hot per-pixel kernels.

Used when the compiled extension ``sphereflow.kernels._core`` is unavailable
or disabled via ``SPHEREFLOW_PURE_PYTHON=1``. Semantics match the compiled
backend: horizontal indices wrap modulo width, vertical indices clamp at the
poles, all arithmetic is double precision.
"""

import math

import numpy as np

BACKEND_NAME = "numpy"


def rotate_pixel_coords(matrix, col, row, width, height):
    """Map continuous equirect pixel coords through a rotation of the sphere.

    Lifts each (col, row) to the unit sphere, applies ``matrix`` and projects
    back to pixel coordinates. Output columns lie in (-0.5, width - 0.5],
    rows in [-0.5, height - 0.5].
    """
    phi = (col + 0.5) * (2.0 * math.pi / width) - math.pi
    colat = (row + 0.5) * (math.pi / height)
    st = np.sin(colat)
    x = st * np.cos(phi)
    y = st * np.sin(phi)
    z = np.cos(colat)
    m = matrix
    x2 = m[0, 0] * x + m[0, 1] * y + m[0, 2] * z
    y2 = m[1, 0] * x + m[1, 1] * y + m[1, 2] * z
    z2 = m[2, 0] * x + m[2, 1] * y + m[2, 2] * z
    colat2 = np.arccos(np.clip(z2, -1.0, 1.0))
    phi2 = np.arctan2(y2, x2)
    out_col = (phi2 + math.pi) * (width / (2.0 * math.pi)) - 0.5
    out_row = colat2 * (height / math.pi) - 0.5
    return out_col, out_row


def sample_bilinear(img, col, row):
    """Bilinear lookup into (H, W, C) ``img`` at continuous (col, row).

    Columns wrap modulo W, rows clamp to [0, H-1]. Accumulation is double
    precision; the caller casts back to the payload dtype.
    """
    height, width = img.shape[0], img.shape[1]
    c0 = np.floor(col)
    r0 = np.floor(row)
    dc = col - c0
    dr = row - r0
    c0i = c0.astype(np.int64) % width
    c1i = (c0i + 1) % width
    r0i = np.clip(r0.astype(np.int64), 0, height - 1)
    r1i = np.clip(r0.astype(np.int64) + 1, 0, height - 1)
    v00 = img[r0i, c0i].astype(np.float64)
    v01 = img[r0i, c1i].astype(np.float64)
    v10 = img[r1i, c0i].astype(np.float64)
    v11 = img[r1i, c1i].astype(np.float64)
    w00 = ((1.0 - dr) * (1.0 - dc))[..., None]
    w01 = ((1.0 - dr) * dc)[..., None]
    w10 = (dr * (1.0 - dc))[..., None]
    w11 = (dr * dc)[..., None]
    return w00 * v00 + w01 * v01 + w10 * v10 + w11 * v11


def sample_nearest(img, col, row):
    """Nearest-neighbor lookup; exact gather, dtype preserved."""
    height, width = img.shape[0], img.shape[1]
    ci = np.floor(col + 0.5).astype(np.int64) % width
    ri = np.clip(np.floor(row + 0.5).astype(np.int64), 0, height - 1)
    return img[ri, ci]
