"""Rotation-pair sampling for the two siamese training strategies.

Both strategies rotate exactly one side of the pair:

  * v1 keeps the left stream unrotated for the whole run and draws a
    fresh rotation for the right stream each sample;
  * v2 draws which side stays unrotated uniformly per sample.

Non-identity rotations draw pitch, roll, yaw independently from
[-pi, pi) and reject draws whose largest angle magnitude is below
0.05 rad, so the rotating side is never accidentally the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import Rotation3

__all__ = ["STRATEGIES", "MIN_ROTATION_ANGLE", "AugmentationPair", "sample_augmentation", "sample_augmentations"]

STRATEGIES = ("v1", "v2")
MIN_ROTATION_ANGLE = 0.05


@dataclass(frozen=True)
class AugmentationPair:
    rotation_left: Rotation3
    rotation_right: Rotation3
    strategy: str

    @property
    def identity_side(self) -> str:
        return "left" if self.rotation_left.is_identity else "right"

    def angles(self) -> dict:
        return {
            "left": list(self.rotation_left.angles()),
            "right": list(self.rotation_right.angles()),
        }


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _draw_rotation(rng: np.random.Generator) -> Rotation3:
    while True:
        pitch, roll, yaw = rng.uniform(-np.pi, np.pi, size=3)
        if max(abs(pitch), abs(roll), abs(yaw)) >= MIN_ROTATION_ANGLE:
            return Rotation3.from_euler(pitch, roll, yaw)


def sample_augmentation(strategy: str, seed) -> AugmentationPair:
    """Draw one rotation pair; deterministic for a given strategy and seed.

    seed may be anything numpy's default_rng accepts, or an existing
    Generator for stream-style use.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
    rng = _as_rng(seed)
    if strategy == "v1":
        identity_left = True
    else:
        identity_left = bool(rng.integers(0, 2))
    rotation = _draw_rotation(rng)
    if identity_left:
        return AugmentationPair(Rotation3.identity(), rotation, strategy)
    return AugmentationPair(rotation, Rotation3.identity(), strategy)


def sample_augmentations(strategy: str, seed, count: int) -> list:
    """A deterministic sequence of pairs from one seeded stream."""
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = _as_rng(seed)
    return [sample_augmentation(strategy, rng) for _ in range(count)]
