"""Color encodings for flow fields, planar and spherical.

RGB rendering uses the 55-entry Middlebury color wheel (segment sizes
RY=15, YG=6, GC=4, CB=11, BM=13, MR=6). Hue encodes direction, whiteness
encodes magnitude: zero flow is pure white, magnitudes at or above the
clip value reach the fully saturated wheel color. Values past the clip
are clamped rather than darkened.

Sphere-motion rendering maps the (x, y) components of the 3-D chord
displacement through the same wheel and writes the z component into the
alpha channel, affinely stretched from [-max|z|, +max|z|] to [0, 255].
Both normalizations are per image; callers that need comparable frames
should pass an explicit scale.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .geometry import angles_to_sphere, check_equirect_shape, pixel_to_angles

__all__ = [
    "DEFAULT_CLIP",
    "make_color_wheel",
    "flow_to_sphere_motion",
    "encode_flow_rgb",
    "encode_sphere_rgba",
]

DEFAULT_CLIP = 40.0

_WHEEL_SEGMENTS = (("RY", 15), ("YG", 6), ("GC", 4), ("CB", 11), ("BM", 13), ("MR", 6))


def make_color_wheel() -> np.ndarray:
    """The 55x3 uint8 Middlebury wheel, red at index 0, back to red at the end."""
    total = sum(n for _, n in _WHEEL_SEGMENTS)
    wheel = np.zeros((total, 3), dtype=np.uint8)
    col = 0
    for name, n in _WHEEL_SEGMENTS:
        ramp = np.floor(255.0 * np.arange(n) / n).astype(np.uint8)
        if name == "RY":
            wheel[col : col + n, 0] = 255
            wheel[col : col + n, 1] = ramp
        elif name == "YG":
            wheel[col : col + n, 0] = 255 - ramp
            wheel[col : col + n, 1] = 255
        elif name == "GC":
            wheel[col : col + n, 1] = 255
            wheel[col : col + n, 2] = ramp
        elif name == "CB":
            wheel[col : col + n, 1] = 255 - ramp
            wheel[col : col + n, 2] = 255
        elif name == "BM":
            wheel[col : col + n, 0] = ramp
            wheel[col : col + n, 2] = 255
        else:  # MR
            wheel[col : col + n, 0] = 255
            wheel[col : col + n, 2] = 255 - ramp
        col += n
    return wheel


def _check_flow(flow: np.ndarray) -> np.ndarray:
    flow = np.asarray(flow, dtype=np.float64)
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ShapeError(f"flow must have shape (H, W, 2), got {flow.shape}")
    return flow


def _wheel_encode(u: np.ndarray, v: np.ndarray, norm: np.ndarray) -> np.ndarray:
    """Core Middlebury mapping on pre-normalized components.

    norm is the per-pixel magnitude already divided by the clip scale and
    clamped to [0, 1]; u, v only supply the direction.
    """
    wheel = make_color_wheel().astype(np.float64) / 255.0
    ncols = wheel.shape[0]
    angle = np.arctan2(-v, -u) / np.pi  # in [-1, 1]
    fk = (angle + 1.0) / 2.0 * (ncols - 1)
    k0 = np.floor(fk).astype(np.int64)
    k0 = np.clip(k0, 0, ncols - 1)
    k1 = (k0 + 1) % ncols
    frac = fk - k0

    img = np.empty(u.shape + (3,), dtype=np.uint8)
    for c in range(3):
        col0 = wheel[k0, c]
        col1 = wheel[k1, c]
        col = (1.0 - frac) * col0 + frac * col1
        col = 1.0 - norm * (1.0 - col)  # fade to white as magnitude drops
        img[..., c] = np.floor(255.0 * col).astype(np.uint8)
    return img


def encode_flow_rgb(flow: np.ndarray, clip: float = DEFAULT_CLIP) -> np.ndarray:
    """Render a flow field as an (H, W, 3) uint8 image.

    Non-finite flow pixels render as black so the output stays total.
    """
    if not clip > 0:
        raise ValueError(f"clip must be positive, got {clip}")
    flow = _check_flow(flow)
    u = flow[..., 0].copy()
    v = flow[..., 1].copy()
    bad = ~(np.isfinite(u) & np.isfinite(v))
    u[bad] = 0.0
    v[bad] = 0.0
    mag = np.sqrt(u * u + v * v)
    norm = np.minimum(mag / float(clip), 1.0)
    img = _wheel_encode(u, v, norm)
    img[bad] = 0
    return img


def flow_to_sphere_motion(flow: np.ndarray) -> np.ndarray:
    """Chord displacement between lifted endpoints, shape (H, W, 3).

    Both endpoints are unit vectors, so every chord has length at most 2
    and relates to the great-circle angle d by |chord| = 2 sin(d / 2).
    """
    flow = _check_flow(flow)
    height, width = flow.shape[:2]
    check_equirect_shape(width, height)
    cols, rows = np.meshgrid(
        np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64)
    )
    theta0, phi0 = pixel_to_angles(cols, rows, width, height)
    theta1, phi1 = pixel_to_angles(cols + flow[..., 0], rows + flow[..., 1], width, height)
    x0, y0, z0 = angles_to_sphere(theta0, phi0)
    x1, y1, z1 = angles_to_sphere(theta1, phi1)
    return np.stack([x1 - x0, y1 - y0, z1 - z0], axis=-1)


def encode_sphere_rgba(motion: np.ndarray, scale: float | None = None) -> np.ndarray:
    """Render sphere motion as (H, W, 4) uint8: wheel RGB in-plane, alpha from z.

    RGB normalization uses the per-image max planar magnitude unless an
    explicit positive scale is given; alpha spans [-max|z|, +max|z|].
    Zero motion yields white RGB at mid alpha.
    """
    motion = np.asarray(motion, dtype=np.float64)
    if motion.ndim != 3 or motion.shape[-1] != 3:
        raise ShapeError(f"sphere motion must have shape (H, W, 3), got {motion.shape}")
    x = motion[..., 0]
    y = motion[..., 1]
    z = motion[..., 2]

    planar = np.sqrt(x * x + y * y)
    if scale is None:
        scale = float(planar.max())
    if scale <= 0:
        norm = np.zeros_like(planar)
    else:
        norm = np.minimum(planar / scale, 1.0)
    rgb = _wheel_encode(x, y, norm)

    zmax = float(np.abs(z).max())
    if zmax == 0:
        alpha = np.full(z.shape, 128, dtype=np.uint8)
    else:
        alpha = np.rint((z + zmax) / (2.0 * zmax) * 255.0).astype(np.uint8)

    out = np.empty(motion.shape[:2] + (4,), dtype=np.uint8)
    out[..., :3] = rgb
    out[..., 3] = alpha
    return out
