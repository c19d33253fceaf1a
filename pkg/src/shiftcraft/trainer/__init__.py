"""Desk-scale classifiers and the variant training loop."""

from .checkpoint import load_model, save_model
from .model import (
    EXTRA_AUG_VARIANTS,
    IMAGE_VARIANTS,
    SHAPE_VARIANTS,
    VARIANTS,
    Model,
    ShapeError,
    as_input,
    combined_loss,
    cross_entropy,
    forward,
    gradient_check,
    init_model,
    logits,
    loss_and_grad,
    predict_proba,
    softmax,
    stack_inputs,
)
from .train import StepLog, TrainConfig, TrainConfigError, lr_schedule, train, write_log_csv

__all__ = [
    "EXTRA_AUG_VARIANTS",
    "IMAGE_VARIANTS",
    "SHAPE_VARIANTS",
    "VARIANTS",
    "Model",
    "ShapeError",
    "StepLog",
    "TrainConfig",
    "TrainConfigError",
    "as_input",
    "combined_loss",
    "cross_entropy",
    "forward",
    "gradient_check",
    "init_model",
    "load_model",
    "logits",
    "loss_and_grad",
    "lr_schedule",
    "predict_proba",
    "save_model",
    "softmax",
    "stack_inputs",
    "train",
    "write_log_csv",
]
