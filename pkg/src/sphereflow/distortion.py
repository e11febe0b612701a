"""Distortion density over the equirectangular plane.

The map is assembled from a cube of six square density masks: the polar
faces (U, D) peak at their centers and fall off radially, the equatorial
faces (F, B, R, L) are zero at center and grow toward the corners. Each
equirect pixel is lifted to the unit sphere, assigned to the cube face of
its dominant axis, and sampled bilinearly in that face. The raw [0, 1]
density is then remapped affinely into [0.5, 1.0) so that 1/(1-d) weights
stay finite.

Face layout: +Z is U (north pole, top of the raster), -Z is D, +X is F
(azimuth 0), -X is B, +Y is R (azimuth +pi/2), -Y is L.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError, ShapeError
from .geometry import angles_to_sphere, check_equirect_shape, pixel_to_angles

__all__ = [
    "FACES",
    "build_face_density",
    "build_cube_density",
    "faces_to_equirect",
    "remap_density",
    "build_density_map",
    "density_bins",
    "density_to_uint16",
    "write_density_raw",
    "read_density_raw",
]

FACES = ("U", "D", "F", "B", "R", "L")
_POLAR = frozenset({"U", "D"})
_REMAP_EPS = 1e-6
_RAW_MAGIC_LEN = 8  # two little-endian int32: width, height


def build_face_density(face: str, size: int = 256) -> np.ndarray:
    """Density mask of one cube face on a [-1, 1]^2 grid.

    Radius r = sqrt(x^2 + y^2) normalized by its corner maximum sqrt(2);
    polar faces use 1 - r/max(r), equatorial faces r/max(r).
    """
    if face not in FACES:
        raise ValueError(f"unknown cube face {face!r}, expected one of {FACES}")
    if size < 2:
        raise ValueError("face size must be >= 2")
    coords = np.linspace(-1.0, 1.0, size)
    x, y = np.meshgrid(coords, coords)
    r = np.sqrt(x * x + y * y)
    r_norm = r / np.sqrt(2.0)
    return 1.0 - r_norm if face in _POLAR else r_norm


def build_cube_density(size: int = 256) -> dict[str, np.ndarray]:
    return {face: build_face_density(face, size) for face in FACES}


def _sample_face(grid: np.ndarray, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
    # clamped bilinear inside the owning face; no cross-face blending
    size = grid.shape[0]
    px = np.clip((fx + 1.0) * 0.5 * (size - 1), 0.0, size - 1.0)
    py = np.clip((fy + 1.0) * 0.5 * (size - 1), 0.0, size - 1.0)
    x0 = np.clip(np.floor(px).astype(np.int64), 0, size - 2)
    y0 = np.clip(np.floor(py).astype(np.int64), 0, size - 2)
    dx = px - x0
    dy = py - y0
    v00 = grid[y0, x0]
    v01 = grid[y0, x0 + 1]
    v10 = grid[y0 + 1, x0]
    v11 = grid[y0 + 1, x0 + 1]
    return (1 - dy) * ((1 - dx) * v00 + dx * v01) + dy * ((1 - dx) * v10 + dx * v11)


def faces_to_equirect(faces: dict[str, np.ndarray], width: int, height: int) -> np.ndarray:
    """Project six face masks onto the equirect grid; raw density in [0, 1]."""
    missing = [f for f in FACES if f not in faces]
    if missing:
        raise ValueError(f"missing cube faces: {missing}")
    sizes = {faces[f].shape for f in FACES}
    if len(sizes) != 1 or any(s[0] != s[1] for s in sizes):
        raise ShapeError(f"cube faces must share a square size, got {sizes}")
    check_equirect_shape(width, height)

    cols, rows = np.meshgrid(np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64))
    theta, phi = pixel_to_angles(cols, rows, width, height)
    x, y, z = angles_to_sphere(theta, phi)
    ax, ay, az = np.abs(x), np.abs(y), np.abs(z)

    out = np.empty((height, width), dtype=np.float64)
    # dominance priority Z, X, Y; ties give identical radii on either face
    z_dom = (az >= ax) & (az >= ay)
    x_dom = ~z_dom & (ax >= ay)
    y_dom = ~z_dom & ~x_dom

    for mask, axis_abs, face_pos, face_neg, sign, fu, fv in (
        (z_dom, az, "U", "D", z, x, y),
        (x_dom, ax, "F", "B", x, y, z),
        (y_dom, ay, "R", "L", y, x, z),
    ):
        if not np.any(mask):
            continue
        denom = axis_abs[mask]
        u = fu[mask] / denom
        v = fv[mask] / denom
        pos = sign[mask] >= 0
        vals = np.empty(denom.shape, dtype=np.float64)
        vals[pos] = _sample_face(faces[face_pos], u[pos], v[pos])
        vals[~pos] = _sample_face(faces[face_neg], u[~pos], v[~pos])
        out[mask] = vals
    return out


def remap_density(raw: np.ndarray) -> np.ndarray:
    """Affine, order-preserving remap of raw [0, 1] density into [0.5, 1.0)."""
    return 0.5 + 0.5 * np.asarray(raw, dtype=np.float64) * (1.0 - _REMAP_EPS)


def build_density_map(width: int, height: int, face_size: int = 256) -> np.ndarray:
    """Remapped equirect distortion density; values in [0.5, 1.0)."""
    return remap_density(faces_to_equirect(build_cube_density(face_size), width, height))


def density_bins(density: np.ndarray, edges) -> np.ndarray:
    """Assign each pixel to the half-open bin [edges[i], edges[i+1]) containing it."""
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be a strictly increasing 1-D sequence")
    d = np.asarray(density, dtype=np.float64)
    if d.min() < edges[0] or d.max() >= edges[-1]:
        raise ValueError(
            f"density values [{d.min()}, {d.max()}] fall outside bins "
            f"[{edges[0]}, {edges[-1]})"
        )
    return np.searchsorted(edges, d, side="right") - 1


def density_to_uint16(density: np.ndarray) -> np.ndarray:
    """Quantize density for the 16-bit grayscale artifact: round(d * 65535)."""
    return np.rint(np.asarray(density, dtype=np.float64) * 65535.0).astype(np.uint16)


def write_density_raw(density: np.ndarray, path) -> None:
    """Flat float32 grid with an 8-byte header (int32 LE width, height)."""
    d = np.asarray(density, dtype=np.float32)
    if d.ndim != 2:
        raise ShapeError(f"density must be 2-D, got shape {d.shape}")
    height, width = d.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<ii", width, height))
        fh.write(d.tobytes())


def read_density_raw(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_RAW_MAGIC_LEN)
        if len(header) != _RAW_MAGIC_LEN:
            raise FormatError(f"{path}: truncated density header")
        width, height = struct.unpack("<ii", header)
        if width <= 0 or height <= 0:
            raise FormatError(f"{path}: bad density dimensions {width}x{height}")
        payload = fh.read()
    expected = width * height * 4
    if len(payload) != expected:
        raise FormatError(f"{path}: expected {expected} payload bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype="<f4").reshape(height, width).copy()
