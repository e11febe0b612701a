"""Coordinate transforms between equirectangular pixels, angles, and the unit sphere.

Conventions used throughout the toolkit:

* ``theta`` is latitude in [-pi/2, pi/2], ``phi`` is azimuth in [-pi, pi).
  Internally the sphere lift uses the colatitude ``theta + pi/2`` in (0, pi)
  so the whole sphere is covered; row 0 of an equirect image (top) maps to
  colatitude ~0, i.e. the +Z pole.
* Pixel centers sit at half-integer offsets: column ``c`` covers azimuth
  ``(c + 0.5) / width * 2*pi - pi``. Equirect rasters are width = 2 * height.
* Rotations are parameterized by pitch (about X), roll (about Y) and yaw
  (about Z), composed as ``Rz(yaw) @ Rx(pitch) @ Ry(roll)`` acting on column
  vectors.

All functions accept scalars or numpy arrays and do their trigonometry in
double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError

__all__ = [
    "angles_to_sphere",
    "sphere_to_angles",
    "sphere_to_catadioptric",
    "catadioptric_from_angles",
    "pixel_to_angles",
    "angles_to_pixel",
    "Rotation3",
    "check_equirect_shape",
]

_HALF_PI = math.pi / 2.0


def check_equirect_shape(width: int, height: int) -> None:
    if width != 2 * height or height < 1:
        raise ShapeError(
            f"equirectangular raster requires width == 2*height, got {width}x{height}"
        )


def angles_to_sphere(theta, phi):
    """Lift latitude/azimuth angles to unit vectors (x, y, z).

    ``theta`` is latitude; the lift evaluates the colatitude form
    (sin t' cos phi, sin t' sin phi, cos t') with t' = theta + pi/2.
    """
    colat = np.asarray(theta, dtype=np.float64) + _HALF_PI
    phi = np.asarray(phi, dtype=np.float64)
    st = np.sin(colat)
    return st * np.cos(phi), st * np.sin(phi), np.cos(colat)


def sphere_to_angles(x, y, z):
    """Inverse of :func:`angles_to_sphere`.

    Returns (theta, phi) with theta latitude. At the poles (z = +-1) the
    azimuth is degenerate and comes out as 0 by the atan2(0, 0) convention.
    """
    z = np.clip(np.asarray(z, dtype=np.float64), -1.0, 1.0)
    colat = np.arccos(z)
    phi = np.arctan2(y, x)
    return colat - _HALF_PI, phi


def sphere_to_catadioptric(x, y, z):
    """Project a unit vector to the catadioptric plane (x/(1-z), y/(1-z)).

    Undefined at the projection pole z = 1.
    """
    z = np.asarray(z, dtype=np.float64)
    if np.any(np.isclose(z, 1.0, rtol=0.0, atol=1e-12)):
        raise ValueError("catadioptric projection is singular at z = 1")
    denom = 1.0 - z
    return np.asarray(x, dtype=np.float64) / denom, np.asarray(y, dtype=np.float64) / denom


def catadioptric_from_angles(theta, phi):
    """Cotangent form of the catadioptric projection, for cross-checking.

    Equals ``sphere_to_catadioptric(angles_to_sphere(theta, phi))`` away from
    the z = 1 pole: (cot(t'/2) cos phi, cot(t'/2) sin phi) with t' the
    colatitude.
    """
    colat = np.asarray(theta, dtype=np.float64) + _HALF_PI
    cot_half = 1.0 / np.tan(colat / 2.0)
    return cot_half * np.cos(phi), cot_half * np.sin(phi)


def pixel_to_angles(col, row, width: int, height: int):
    """Map continuous pixel coordinates to (theta, phi)."""
    check_equirect_shape(width, height)
    phi = (np.asarray(col, dtype=np.float64) + 0.5) * (2.0 * math.pi / width) - math.pi
    theta = (np.asarray(row, dtype=np.float64) + 0.5) * (math.pi / height) - _HALF_PI
    return theta, phi


def angles_to_pixel(theta, phi, width: int, height: int):
    """Map (theta, phi) to continuous pixel coordinates (col, row)."""
    check_equirect_shape(width, height)
    col = (np.asarray(phi, dtype=np.float64) + math.pi) * (width / (2.0 * math.pi)) - 0.5
    row = (np.asarray(theta, dtype=np.float64) + _HALF_PI) * (height / math.pi) - 0.5
    return col, row


def _euler_matrix(pitch: float, roll: float, yaw: float) -> np.ndarray:
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)
    cy, sy = math.cos(yaw), math.sin(yaw)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cp, -sp], [0.0, sp, cp]])
    ry = np.array([[cr, 0.0, sr], [0.0, 1.0, 0.0], [-sr, 0.0, cr]])
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    return rz @ rx @ ry


def _euler_from_matrix(m: np.ndarray) -> tuple[float, float, float]:
    # Inverts Rz(yaw) @ Rx(pitch) @ Ry(roll); at gimbal lock (|cos pitch| ~ 0)
    # roll is fixed to 0 and yaw absorbs the remaining turn.
    sp = float(np.clip(m[2, 1], -1.0, 1.0))
    pitch = math.asin(sp)
    if abs(sp) < 1.0 - 1e-12:
        roll = math.atan2(-m[2, 0], m[2, 2])
        yaw = math.atan2(-m[0, 1], m[1, 1])
    else:
        roll = 0.0
        yaw = math.atan2(m[1, 0], m[0, 0])
    return pitch, roll, yaw


@dataclass(frozen=True)
class Rotation3:
    """An SO(3) rotation with cached orthonormal matrix and Euler angles."""

    pitch: float
    roll: float
    yaw: float
    matrix: np.ndarray = field(repr=False)

    @classmethod
    def from_euler(cls, pitch: float, roll: float, yaw: float) -> "Rotation3":
        angles = (float(pitch), float(roll), float(yaw))
        if not all(math.isfinite(a) for a in angles):
            raise ValueError(f"rotation angles must be finite, got {angles}")
        return cls(*angles, matrix=_euler_matrix(*angles))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Rotation3":
        m = np.asarray(matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ShapeError(f"rotation matrix must be 3x3, got {m.shape}")
        if not np.allclose(m.T @ m, np.eye(3), atol=1e-9) or not math.isclose(
            float(np.linalg.det(m)), 1.0, abs_tol=1e-9
        ):
            raise ValueError("matrix is not a proper rotation")
        pitch, roll, yaw = _euler_from_matrix(m)
        return cls(pitch, roll, yaw, matrix=m.copy())

    @classmethod
    def identity(cls) -> "Rotation3":
        return cls.from_euler(0.0, 0.0, 0.0)

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(3)))

    def inverse(self) -> "Rotation3":
        # Transpose is bit-exact, so inverse().inverse() reproduces the
        # original matrix verbatim.
        m = np.ascontiguousarray(self.matrix.T)
        pitch, roll, yaw = _euler_from_matrix(m)
        return Rotation3(pitch, roll, yaw, matrix=m)

    def compose(self, other: "Rotation3") -> "Rotation3":
        """Rotation equivalent to applying ``other`` first, then ``self``."""
        return Rotation3.from_matrix(self.matrix @ other.matrix)

    def apply(self, x, y, z):
        """Rotate vectors given as three same-shaped coordinate arrays."""
        m = self.matrix
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        return (
            m[0, 0] * x + m[0, 1] * y + m[0, 2] * z,
            m[1, 0] * x + m[1, 1] * y + m[1, 2] * z,
            m[2, 0] * x + m[2, 1] * y + m[2, 2] * z,
        )

    def angles(self) -> tuple[float, float, float]:
        return (self.pitch, self.roll, self.yaw)
