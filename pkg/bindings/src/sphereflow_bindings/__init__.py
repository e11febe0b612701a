"""In-process array bindings over sphereflow for training loops.

Every operation here is a thin shim: inputs pass a strict buffer contract
and are then handed to the sphereflow public API unchanged, so outputs are
bit for bit what the library itself produces on the same arrays. The
contract is the part a training loop actually wants pinned down:

  * arrays must be C-contiguous float32 ndarrays (the layout deep-learning
    frameworks hand over); anything else raises :class:`ContractError`
    instead of being cast or copied behind the caller's back,
  * no call mutates its input buffers, and validated inputs are passed
    through by reference (zero copy), so the caller keeps ownership and
    lifetime of every buffer,
  * shape checks run before any sampling kernel, surfacing the library's
    own exception types and messages.

The heavy loops run inside numpy and, when the compiled kernel core is
built, inside Cython blocks that release the GIL. Dataset statistics,
file I/O, and the command line are deliberately not re-exposed; call
sphereflow directly for those.
"""

from __future__ import annotations

import numpy as np

import sphereflow
from sphereflow import Rotation3, build_warp_map, evaluate_flow, warp_flow, warp_image
from sphereflow.errors import ShapeError
from sphereflow.siamese.augment import sample_augmentations

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ContractError",
    "check_view",
    "warp",
    "flow_metrics",
    "sample_rotations",
]

if sphereflow.__version__ != __version__:
    raise ImportError(
        f"sphereflow-bindings {__version__} is locked to sphereflow "
        f"{__version__}, found sphereflow {sphereflow.__version__}"
    )


class ContractError(ValueError):
    """An input buffer violates the binding contract (dtype or memory layout)."""


def check_view(array, name: str = "array") -> np.ndarray:
    """Validate the zero-copy input contract and return the array unchanged.

    Exactly C-contiguous float32 ndarrays pass. Anything else raises
    ContractError; nothing is converted or copied silently.
    """
    if not isinstance(array, np.ndarray):
        raise ContractError(f"{name} must be a numpy ndarray, got {type(array).__name__}")
    if array.dtype != np.float32:
        raise ContractError(f"{name} must be float32, got {array.dtype}; convert explicitly")
    if not array.flags.c_contiguous:
        raise ContractError(f"{name} must be C-contiguous; make the copy explicitly if needed")
    return array


def warp(
    array: np.ndarray,
    pitch: float = 0.0,
    roll: float = 0.0,
    yaw: float = 0.0,
    kind: str = "image",
    interp: str = "bilinear",
    inverse: bool = False,
) -> np.ndarray:
    """Rotate an equirect image or flow field, bit-equal to the library call.

    kind="image" takes (H, 2H) or (H, 2H, C) arrays and resamples them;
    kind="flow" takes (H, 2H, 2) arrays and additionally reprojects every
    displacement vector on the sphere. Angles are radians; inverse=True
    applies the reverse rotation. Returns a fresh float32 array.
    """
    if kind not in ("image", "flow"):
        raise ValueError(f"unknown kind {kind!r}, expected 'image' or 'flow'")
    arr = check_view(array, kind)
    if arr.ndim < 2:
        raise ShapeError(f"{kind} must be at least 2-D, got shape {arr.shape}")
    rot = Rotation3.from_euler(pitch, roll, yaw)
    if inverse:
        rot = rot.inverse()
    height, width = arr.shape[:2]
    wmap = build_warp_map(rot, width, height)
    if kind == "image":
        return warp_image(arr, wmap, interp=interp)
    return warp_flow(arr, wmap, rot, interp=interp)


def flow_metrics(pred: np.ndarray, gt: np.ndarray, density=None) -> dict:
    """Flow-accuracy report as a plain mapping.

    Wraps sphereflow.evaluate_flow on (H, W, 2) prediction/ground-truth
    pairs, optionally weighted by an (H, W) distortion-density map, and
    returns its report dict unchanged: overall EPE/AE, speed-binned and
    density-binned breakdowns, weighted variants when a density is given.
    """
    pred = check_view(pred, "pred")
    gt = check_view(gt, "gt")
    if density is not None:
        density = check_view(density, "density")
    return evaluate_flow(pred, gt, density=density).to_dict()


def sample_rotations(strategy: str, seed, count: int) -> list:
    """Deterministic augmentation rotations as plain angle triples.

    Returns count pairs of (pitch, roll, yaw) tuples, left stream then
    right stream, drawn exactly like
    sphereflow.siamese.augment.sample_augmentations: equal seeds give
    equal sequences, one side of every pair is the identity.
    """
    pairs = sample_augmentations(strategy, seed, count)
    return [(pair.rotation_left.angles(), pair.rotation_right.angles()) for pair in pairs]
