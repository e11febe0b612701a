"""Siamese training reference: augmentation pairs, losses, toy encoder."""

from .augment import (
    MIN_ROTATION_ANGLE,
    STRATEGIES,
    AugmentationPair,
    sample_augmentation,
    sample_augmentations,
)
from .encoder import (
    HIDDEN_CHANNELS,
    LATENT_DIM,
    N_ITERATIONS,
    POOL_SHAPE,
    PipelineOutputs,
    init_params,
    pipeline_loss,
    pipeline_loss_and_grads,
    predictor,
    run_reference_pipeline,
    toy_encoder,
)
from .losses import (
    CollapseReport,
    collapse_monitor,
    cosine_distance,
    hybrid_loss,
    sequence_flow_loss,
    sequence_weights,
    symmetrized_similarity_loss,
)

__all__ = [
    "MIN_ROTATION_ANGLE",
    "STRATEGIES",
    "AugmentationPair",
    "sample_augmentation",
    "sample_augmentations",
    "HIDDEN_CHANNELS",
    "LATENT_DIM",
    "N_ITERATIONS",
    "POOL_SHAPE",
    "PipelineOutputs",
    "init_params",
    "pipeline_loss",
    "pipeline_loss_and_grads",
    "predictor",
    "run_reference_pipeline",
    "toy_encoder",
    "CollapseReport",
    "collapse_monitor",
    "cosine_distance",
    "hybrid_loss",
    "sequence_flow_loss",
    "sequence_weights",
    "symmetrized_similarity_loss",
]
