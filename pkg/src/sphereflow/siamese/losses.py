"""Similarity, flow, and hybrid losses of the siamese reference pipeline.

All loss functions accept either plain float64 arrays (returning floats)
or tape Vars (returning Vars), so the same code path serves evaluation
and the finite-difference gradient checks. The target latents in the
symmetrized similarity loss pass through stop_gradient, which makes their
gradients exactly zero by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, ShapeError
from ..geometry import Rotation3
from ..warp import build_warp_map, warp_flow
from . import tape
from .tape import Var

__all__ = [
    "cosine_distance",
    "symmetrized_similarity_loss",
    "sequence_flow_loss",
    "sequence_weights",
    "hybrid_loss",
    "CollapseReport",
    "collapse_monitor",
]

DEFAULT_GAMMA = 0.8


def _wants_var(*args) -> bool:
    return any(isinstance(a, Var) for a in args)


def _finish(out: Var, as_var: bool):
    return out if as_var else float(out.value)


def cosine_distance(p, z):
    """Negative cosine similarity of two nonzero vectors; in [-1, 1].

    The denominator is the single square root of the product of squared
    norms, so identical vectors give numerator == denominator bit for bit
    and the distance is exactly -1. Vector magnitudes are assumed to be
    within the normal float range.
    """
    as_var = _wants_var(p, z)
    p, z = tape.as_var(p), tape.as_var(z)
    if p.value.ndim != 1 or z.value.ndim != 1 or p.value.shape != z.value.shape:
        raise ShapeError(f"latents must be 1-D of equal length, got {p.value.shape} and {z.value.shape}")
    for side in (p, z):
        if not np.any(side.value):
            raise ValueError("zero-norm vector")
    den = tape.sqrt(tape.mul(tape.dot(p, p), tape.dot(z, z)))
    out = tape.neg(tape.div(tape.dot(p, z), den))
    return _finish(out, as_var)


def symmetrized_similarity_loss(p_left, z_right, p_right, z_left):
    """Mean of both cross-stream distances with frozen targets.

    The z arguments are treated as constants (stop-gradient): their
    gradients under the tape are exactly zero.
    """
    as_var = _wants_var(p_left, z_right, p_right, z_left)
    half = tape.constant(0.5)
    d_lr = cosine_distance(tape.as_var(p_left), tape.stop_gradient(z_right))
    d_rl = cosine_distance(tape.as_var(p_right), tape.stop_gradient(z_left))
    out = tape.add(tape.mul(half, d_lr), tape.mul(half, d_rl))
    return _finish(out, as_var)


def sequence_weights(n: int, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """Per-iteration weights gamma^(n-i) for i = 1..n; the last is exactly 1."""
    if n < 1:
        raise EmptyInputError("empty prediction sequence")
    return gamma ** (n - np.arange(1, n + 1, dtype=np.float64))


def sequence_flow_loss(predictions, gt_flow: np.ndarray, rotation: Rotation3 | None = None,
                       gamma: float = DEFAULT_GAMMA):
    """Weighted L1 distance between a prediction sequence and rotated truth.

    The ground truth is rotated into the predictions' frame (it is a
    constant; no gradient flows through the warp). Each prediction
    contributes the mean absolute error over pixels and channels, weighted
    by gamma^(n-i) so later refinements dominate.
    """
    predictions = list(predictions)
    if not predictions:
        raise EmptyInputError("empty prediction sequence")
    as_var = _wants_var(*predictions)

    gt_flow = np.asarray(gt_flow, dtype=np.float64)
    if gt_flow.ndim != 3 or gt_flow.shape[-1] != 2:
        raise ShapeError(f"ground-truth flow must be (H, W, 2), got {gt_flow.shape}")
    if rotation is not None and not rotation.is_identity:
        height, width = gt_flow.shape[:2]
        gt_flow = warp_flow(gt_flow, build_warp_map(rotation, width, height), rotation)
    target = tape.constant(gt_flow)

    weights = sequence_weights(len(predictions), gamma)
    total = None
    for w, pred in zip(weights, predictions):
        pred = tape.as_var(pred)
        if pred.value.shape != gt_flow.shape:
            raise ShapeError(
                f"prediction shape {pred.value.shape} does not match ground truth {gt_flow.shape}"
            )
        term = tape.mul(tape.constant(w), tape.vmean(tape.abs_val(tape.sub(pred, target))))
        total = term if total is None else tape.add(total, term)
    return _finish(total, as_var)


def hybrid_loss(sim, flow):
    """Plain sum of the similarity and flow terms."""
    as_var = _wants_var(sim, flow)
    out = tape.add(tape.as_var(sim), tape.as_var(flow))
    return _finish(out, as_var)


@dataclass(frozen=True)
class CollapseReport:
    per_channel_std: np.ndarray
    mean_std: float
    reference: float
    collapsed: bool

    def to_dict(self) -> dict:
        return {
            "per_channel_std": [float(s) for s in self.per_channel_std],
            "mean_std": self.mean_std,
            "reference": self.reference,
            "collapsed": self.collapsed,
        }


def collapse_monitor(latents, collapse_fraction: float = 0.1) -> CollapseReport:
    """Detect representation collapse from a batch of latents.

    Each latent is l2-normalized, per-channel standard deviations are
    taken across the batch, and their mean is compared with the healthy
    isotropic reference 1/sqrt(d). A mean below collapse_fraction times
    the reference raises the collapsed flag.
    """
    latents = np.asarray(latents, dtype=np.float64)
    if latents.ndim != 2:
        raise ShapeError(f"expected (batch, d) latents, got shape {latents.shape}")
    batch, dim = latents.shape
    if batch < 2:
        raise EmptyInputError("collapse monitor needs a batch of at least 2")
    norms = np.linalg.norm(latents, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("zero-norm latent in batch")
    unit = latents / norms
    per_channel = unit.std(axis=0)
    mean_std = float(per_channel.mean())
    reference = 1.0 / np.sqrt(dim)
    return CollapseReport(
        per_channel_std=per_channel,
        mean_std=mean_std,
        reference=float(reference),
        collapsed=bool(mean_std < collapse_fraction * reference),
    )
