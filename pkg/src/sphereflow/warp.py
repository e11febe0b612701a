"""Rotational warping of equirectangular images and flow fields.

A :class:`WarpMap` stores, for every destination pixel, the continuous source
coordinate that a sphere rotation pulls it from. Images are resampled there;
flow fields are reprojected as vectors: both displacement endpoints are
lifted to the sphere, rotated, and mapped back to pixels, so the great-circle
length of every displacement is preserved.

Horizontal coordinates wrap around the seam; vertical coordinates clamp at
the poles (no cross-pole wrap).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ShapeError
from .geometry import Rotation3, check_equirect_shape

__all__ = [
    "WarpMap",
    "build_warp_map",
    "warp_image",
    "warp_flow",
    "inverse_warp",
    "rotate_pixels",
    "wrap_horizontal",
]


@dataclass(frozen=True)
class WarpMap:
    """Per-pixel continuous source coordinates realizing a rotation."""

    width: int
    height: int
    src_col: np.ndarray
    src_row: np.ndarray
    rotation: Rotation3

    def __post_init__(self):
        if self.src_col.shape != (self.height, self.width) or self.src_row.shape != (
            self.height,
            self.width,
        ):
            raise ShapeError("warp map grids must be (height, width)")


def rotate_pixels(rotation: Rotation3, col, row, width: int, height: int):
    """Move continuous pixel positions the way the rotation moves content."""
    return kernels.rotate_pixel_coords(rotation.matrix, col, row, width, height)


def _identity_grids(width: int, height: int):
    col = np.arange(width, dtype=np.float64)
    row = np.arange(height, dtype=np.float64)
    return np.meshgrid(col, row)


def build_warp_map(rotation: Rotation3, width: int, height: int) -> WarpMap:
    """Build the pull-back map for ``rotation``.

    Destination pixel p samples from ``rotate_pixels(rotation.inverse(), p)``.
    The identity rotation yields the identity map exactly (no trig round
    trip), which several bit-exactness contracts rely on.
    """
    check_equirect_shape(width, height)
    cols, rows = _identity_grids(width, height)
    if rotation.is_identity:
        return WarpMap(width, height, cols, rows, rotation)
    src_col, src_row = rotate_pixels(rotation.inverse(), cols, rows, width, height)
    return WarpMap(width, height, src_col, src_row, rotation)


def _check_payload(arr: np.ndarray, wmap: WarpMap, kind: str) -> None:
    if arr.shape[0] != wmap.height or arr.shape[1] != wmap.width:
        raise ShapeError(
            f"{kind} shape {arr.shape[:2]} does not match warp map "
            f"({wmap.height}, {wmap.width})"
        )


def warp_image(img, wmap: WarpMap, interp: str = "bilinear"):
    """Resample an image through a warp map. Output dtype matches the input."""
    img = np.asarray(img)
    _check_payload(img, wmap, "image")
    if interp == "nearest":
        return kernels.sample_nearest(img, wmap.src_col, wmap.src_row)
    if interp != "bilinear":
        raise ValueError(f"unknown interpolation {interp!r}")
    out = kernels.sample_bilinear(img, wmap.src_col, wmap.src_row)
    if np.issubdtype(img.dtype, np.integer):
        info = np.iinfo(img.dtype)
        return np.clip(np.rint(out), info.min, info.max).astype(img.dtype)
    return out.astype(img.dtype)


def wrap_horizontal(u, width: int):
    """Wrap horizontal displacements into (-width/2, width/2]."""
    half = width / 2.0
    wrapped = np.mod(np.asarray(u, dtype=np.float64) + half, width) - half
    return np.where(wrapped == -half, half, wrapped)


def warp_flow(flow, wmap: WarpMap, rotation: Rotation3 | None = None, interp: str = "bilinear"):
    """Warp a flow field: resample it and reproject every displacement vector.

    For destination pixel p with source q = src(p), the input displacement
    q -> q + f(q) is rotated endpoint-wise on the sphere and re-expressed in
    destination pixel coordinates, horizontal component wrapped into
    (-width/2, width/2]. This is vector reprojection, not channel resampling.
    """
    flow = np.asarray(flow)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ShapeError(f"flow must be (H, W, 2), got {flow.shape}")
    _check_payload(flow, wmap, "flow")
    rot = wmap.rotation if rotation is None else rotation
    if rot.is_identity and wmap.rotation.is_identity:
        return flow.copy()

    width, height = wmap.width, wmap.height
    if interp == "nearest":
        f_src = kernels.sample_nearest(flow.astype(np.float64, copy=False), wmap.src_col, wmap.src_row)
    elif interp == "bilinear":
        f_src = kernels.sample_bilinear(flow, wmap.src_col, wmap.src_row)
    else:
        raise ValueError(f"unknown interpolation {interp!r}")

    end_col = wmap.src_col + f_src[..., 0]
    end_row = wmap.src_row + f_src[..., 1]
    start_c, start_r = rotate_pixels(rot, wmap.src_col, wmap.src_row, width, height)
    end_c, end_r = rotate_pixels(rot, end_col, end_row, width, height)

    u = wrap_horizontal(end_c - start_c, width)
    v = end_r - start_r
    return np.stack([u, v], axis=-1).astype(flow.dtype)


def inverse_warp(wmap: WarpMap) -> WarpMap:
    """Warp map realizing the reverse rotation."""
    return build_warp_map(wmap.rotation.inverse(), wmap.width, wmap.height)
