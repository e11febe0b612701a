"""A desk-scale stand-in for the trainable half of the siamese pipeline.

Real backbones are out of scope; this encoder exists so the losses,
stop-gradient semantics, and gradients can be exercised end to end. It
block-averages the grayscale frame difference onto a fixed 8x16 grid and
runs four recurrent refinement steps, each a per-cell linear mix plus
tanh, emitting a flow increment. The latent is a linear projection of
the spatially pooled hidden state; the predictor head is a two-layer MLP
of constant width.

All parameters live in a flat dict of float64 arrays, so the whole
pipeline differentiates through the tape and can be checked against
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from ..geometry import Rotation3
from ..stats import to_grayscale
from ..warp import build_warp_map, warp_image
from . import tape
from .augment import AugmentationPair
from .losses import hybrid_loss, sequence_flow_loss, symmetrized_similarity_loss
from .tape import Var

__all__ = [
    "POOL_SHAPE",
    "N_ITERATIONS",
    "HIDDEN_CHANNELS",
    "LATENT_DIM",
    "init_params",
    "toy_encoder",
    "predictor",
    "PipelineOutputs",
    "run_reference_pipeline",
    "pipeline_loss",
    "pipeline_loss_and_grads",
]

POOL_SHAPE = (8, 16)
N_ITERATIONS = 4
HIDDEN_CHANNELS = 6
LATENT_DIM = 16

_CELLS = POOL_SHAPE[0] * POOL_SHAPE[1]
_MIX_IN = 1 + HIDDEN_CHANNELS + 2  # diff signal + hidden state + running flow


def init_params(seed: int = 0) -> dict:
    """Small random parameters; biases on the flow head start at zero."""
    rng = np.random.default_rng(seed)

    def w(*shape):
        fan_in = shape[0]
        return rng.normal(0.0, 0.4 / np.sqrt(fan_in), size=shape)

    return {
        "w_mix": w(_MIX_IN, HIDDEN_CHANNELS),
        "b_mix": rng.normal(0.0, 0.1, size=HIDDEN_CHANNELS),
        "w_flow": w(HIDDEN_CHANNELS, 2),
        "b_flow": np.zeros(2),
        "w_latent": w(HIDDEN_CHANNELS, LATENT_DIM),
        "b_latent": rng.normal(0.0, 0.1, size=LATENT_DIM),
        "w_pred1": w(LATENT_DIM, LATENT_DIM),
        "b_pred1": rng.normal(0.0, 0.05, size=LATENT_DIM),
        "w_pred2": w(LATENT_DIM, LATENT_DIM),
        "b_pred2": rng.normal(0.0, 0.05, size=LATENT_DIM),
    }


def _pool_to_grid(frame: np.ndarray) -> np.ndarray:
    gray = to_grayscale(frame) / 255.0
    h, w = gray.shape
    ph, pw = POOL_SHAPE
    if w != 2 * h or h % ph or w % pw:
        raise ShapeError(
            f"frame must be equirect with dimensions divisible by {ph}x{pw}, got {h}x{w}"
        )
    return gray.reshape(ph, h // ph, pw, w // pw).mean(axis=(1, 3))


def toy_encoder(params: dict, frame_a: np.ndarray, frame_b: np.ndarray):
    """Run the reference encoder; returns (flow_sequence, latent).

    With plain-array parameters the outputs are arrays; with tape Vars the
    graph is kept so gradients can flow back into the parameters.
    """
    as_var = any(isinstance(v, Var) for v in params.values())
    p = {k: tape.as_var(v) for k, v in params.items()}

    diff = tape.constant((_pool_to_grid(frame_b) - _pool_to_grid(frame_a)).reshape(_CELLS, 1))
    hidden = tape.constant(np.zeros((_CELLS, HIDDEN_CHANNELS)))
    flow = tape.constant(np.zeros((_CELLS, 2)))

    flows = []
    for _ in range(N_ITERATIONS):
        mixed = tape.concat([diff, hidden, flow], axis=1)
        hidden = tape.tanh(tape.add(tape.matmul(mixed, p["w_mix"]), p["b_mix"]))
        step = tape.add(tape.matmul(hidden, p["w_flow"]), p["b_flow"])
        flow = tape.add(flow, step)
        flows.append(tape.reshape(flow, POOL_SHAPE + (2,)))

    pooled = tape.reshape(tape.vmean(hidden, axis=0), (1, HIDDEN_CHANNELS))
    latent = tape.reshape(tape.add(tape.matmul(pooled, p["w_latent"]), p["b_latent"]), (LATENT_DIM,))

    if as_var:
        return flows, latent
    return [f.value for f in flows], latent.value


def predictor(params: dict, latent):
    """Two-layer MLP head of constant width."""
    as_var = any(isinstance(v, Var) for v in params.values()) or isinstance(latent, Var)
    p = {k: tape.as_var(v) for k, v in params.items()}
    z = tape.reshape(tape.as_var(latent), (1, LATENT_DIM))
    h = tape.tanh(tape.add(tape.matmul(z, p["w_pred1"]), p["b_pred1"]))
    out = tape.reshape(tape.add(tape.matmul(h, p["w_pred2"]), p["b_pred2"]), (LATENT_DIM,))
    return out if as_var else out.value


def _warp_frame(frame: np.ndarray, rotation: Rotation3) -> np.ndarray:
    if rotation.is_identity:
        return frame
    h, w = np.asarray(frame).shape[:2]
    return warp_image(np.asarray(frame, dtype=np.float64), build_warp_map(rotation, w, h))


@dataclass
class PipelineOutputs:
    total: object
    sim: object
    flow: object
    z_left: object
    z_right: object
    flows_left: list
    flows_right: list


def run_reference_pipeline(
    params: dict,
    frame_a: np.ndarray,
    frame_b: np.ndarray,
    gt_flow: np.ndarray,
    pair: AugmentationPair,
    gamma: float = 0.8,
    frozen_targets=None,
):
    """Two-stream forward pass; returns a PipelineOutputs bundle.

    Each stream sees the frame pair warped by its own rotation; the flow
    loss compares each stream's predictions against the ground truth
    rotated into that stream's frame, and the two streams' flow losses
    are averaged. Output types follow the parameter types (Vars stay Vars).

    frozen_targets, if given, is a (z_left, z_right) pair of plain arrays
    substituted for the similarity targets. The loss value at the base
    point is unchanged (the targets are stop-gradient constants anyway),
    but it makes the loss finite-differentiable as a function of the
    parameters alone, which is how the gradient tests validate the
    stop-gradient semantics.
    """
    streams = {}
    for side, rotation in (("left", pair.rotation_left), ("right", pair.rotation_right)):
        fa = _warp_frame(frame_a, rotation)
        fb = _warp_frame(frame_b, rotation)
        flows, latent = toy_encoder(params, fa, fb)
        streams[side] = (flows, latent, rotation)

    flows_l, z_l, rot_l = streams["left"]
    flows_r, z_r, rot_r = streams["right"]
    p_l = predictor(params, z_l)
    p_r = predictor(params, z_r)

    target_l, target_r = (z_l, z_r) if frozen_targets is None else frozen_targets
    sim = symmetrized_similarity_loss(p_l, target_r, p_r, target_l)
    flow_l = sequence_flow_loss(flows_l, gt_flow, rot_l, gamma)
    flow_r = sequence_flow_loss(flows_r, gt_flow, rot_r, gamma)
    flow = tape.mul(tape.constant(0.5), tape.add(tape.as_var(flow_l), tape.as_var(flow_r)))
    as_var = isinstance(flow_l, Var) or isinstance(sim, Var)
    if not as_var:
        flow = float(flow.value)
    total = hybrid_loss(sim, flow)
    return PipelineOutputs(total, sim, flow, z_l, z_r, flows_l, flows_r)


def pipeline_loss(params: dict, frame_a, frame_b, gt_flow, pair, gamma: float = 0.8,
                  frozen_targets=None) -> float:
    out = run_reference_pipeline(params, frame_a, frame_b, gt_flow, pair, gamma, frozen_targets)
    return out.total if isinstance(out.total, float) else float(out.total.value)


def pipeline_loss_and_grads(params: dict, frame_a, frame_b, gt_flow, pair, gamma: float = 0.8):
    """Analytic gradients of the hybrid loss w.r.t. every parameter array."""
    lifted = {k: tape.as_var(v) for k, v in params.items()}
    out = run_reference_pipeline(lifted, frame_a, frame_b, gt_flow, pair, gamma)
    tape.backward(out.total)
    grads = {
        k: (np.zeros_like(v.value) if v.grad is None else v.grad) for k, v in lifted.items()
    }
    return float(out.total.value), grads
