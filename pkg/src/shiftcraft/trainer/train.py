"""Training loop for the image / shape variant family.

Variants:
  I               images, basic augmentation only
  I_hat           images with at most one extra augmentation
  S               randomized BTEs only
  IS, I_hat_S     images + randomized BTEs, loss l_I + lambda * l_S
  IS_sob          images + non-binarized Sobel maps in the shape slots
  IS_x2           as IS but two separate models (images, BTEs)
  I_hat_plus_BTE  BTE used as one more extra augmentation, no shape branch

SGD without momentum; the learning rate decays exponentially from ``lr``
at the first step to ``lr / 100`` at the last.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..augment import ALL_GROUPS, BasicAugConfig, apply_basic, augment_for_training, parse_groups, sample_group
from ..augment.registry import apply_extra, sample_spec
from ..bte import DEFAULT_POLICY, BteRandomPolicy, encode_edges, extract_bte_random, sobel_edge_map
from ..rng import derive_rng
from ..valset import LabeledImage
from .model import (
    EXTRA_AUG_VARIANTS,
    IMAGE_VARIANTS,
    SHAPE_VARIANTS,
    VARIANTS,
    Model,
    init_model,
    loss_and_grad,
)

LR_DECAY = 0.01


class TrainConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    variant: str = "I"
    lam: float = 1.0
    lr: float = 0.1
    epochs: int = 10
    batch_images: int = 64
    batch_btes: int | None = None  # None: batch_images for shape variants, else 0
    seed: int = 0
    allowed_groups: tuple = ALL_GROUPS
    extra_prob: float = 0.5
    plus_bte_prob: float = 1.0 / 11.0
    architecture: str = "linear"
    hidden: int = 32
    basic: BasicAugConfig = field(default_factory=lambda: BasicAugConfig.digits(32))
    bte_policy: BteRandomPolicy = DEFAULT_POLICY
    sobel_sigmas: tuple[float, ...] = (0.0, 1.0, 2.0)

    def __post_init__(self):
        object.__setattr__(self, "allowed_groups", parse_groups(self.allowed_groups))
        if self.variant not in VARIANTS:
            raise TrainConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not 0.0 <= self.lam <= 1.0:
            raise TrainConfigError("lambda must be in [0, 1]")
        if self.lr <= 0:
            raise TrainConfigError("lr must be positive")
        if self.epochs < 1 or self.batch_images < 1:
            raise TrainConfigError("epochs and batch_images must be >= 1")
        n_bte = self.n_btes
        if self.variant in SHAPE_VARIANTS and n_bte <= 0:
            raise TrainConfigError(f"variant {self.variant} needs batch_btes > 0")
        if self.variant not in SHAPE_VARIANTS and n_bte != 0:
            raise TrainConfigError(f"variant {self.variant} has no shape branch; batch_btes must be 0")
        if self.variant != "S" and self.variant in SHAPE_VARIANTS and n_bte > self.batch_images:
            raise TrainConfigError("batch_btes must not exceed batch_images")
        if self.variant in EXTRA_AUG_VARIANTS and not self.allowed_groups and self.extra_prob > 0:
            raise TrainConfigError(f"variant {self.variant} needs at least one allowed augmentation group")

    @property
    def n_btes(self) -> int:
        if self.batch_btes is None:
            return self.batch_images if self.variant in SHAPE_VARIANTS else 0
        return int(self.batch_btes)


def lr_schedule(lr: float, total_steps: int) -> np.ndarray:
    """Per-step learning rates: lr * 0.01 ** (t / (T - 1)), t = 0..T-1."""
    if total_steps <= 1:
        return np.array([lr] * max(total_steps, 0), dtype=np.float64)
    t = np.arange(total_steps, dtype=np.float64)
    return lr * LR_DECAY ** (t / (total_steps - 1))


def steps_per_epoch(n: int, batch_images: int) -> int:
    return int(math.ceil(n / batch_images))


def _image_slot(img, cfg: TrainConfig, rng) -> np.ndarray:
    if cfg.variant == "I_hat_plus_BTE":
        if cfg.extra_prob > 0 and rng.random() < cfg.extra_prob:
            if rng.random() < cfg.plus_bte_prob:
                # BTE taken after the geometric part so the map stays binary
                aug = apply_basic(img, cfg.basic, rng)
                return encode_edges(extract_bte_random(aug, cfg.bte_policy, rng), _channels(aug))
            img = apply_extra(img, sample_spec(sample_group(cfg.allowed_groups, rng), rng), rng)
        return apply_basic(img, cfg.basic, rng)
    extra = cfg.extra_prob if cfg.variant in EXTRA_AUG_VARIANTS else 0.0
    return augment_for_training(img, cfg.allowed_groups, extra, cfg.basic, rng)


def _shape_slot(img, cfg: TrainConfig, rng) -> np.ndarray:
    aug = apply_basic(img, cfg.basic, rng)
    if cfg.variant == "IS_sob":
        sigma = cfg.sobel_sigmas[int(rng.integers(len(cfg.sobel_sigmas)))]
        return encode_edges(sobel_edge_map(aug, sigma), _channels(aug))
    return encode_edges(extract_bte_random(aug, cfg.bte_policy, rng), _channels(aug))


def _channels(img) -> int:
    return 1 if np.ndim(img) == 2 else np.shape(img)[2]


def input_shape_for(data: Sequence[LabeledImage], cfg: TrainConfig) -> tuple[int, ...]:
    c = _channels(data[0].image)
    s = cfg.basic.out_size
    return (s, s) if c == 1 else (s, s, c)


def _features(batch) -> np.ndarray:
    return np.stack([np.asarray(b, dtype=np.float64).ravel() for b in batch])


@dataclass
class StepLog:
    step: int
    lr: float
    loss_total: float
    loss_I: float
    loss_S: float


def train(
    data: Sequence[LabeledImage],
    cfg: TrainConfig,
    callback: Callable | None = None,
    log: list | None = None,
):
    """Train per ``cfg``; returns a Model, or (image_model, shape_model) for IS_x2.

    ``callback(step, lr, models, step_log)`` runs after every update, with
    ``models`` a tuple of the model(s) being trained.
    """
    if not data:
        raise TrainConfigError("training split is empty")
    n = len(data)
    labels = np.array([it.label for it in data], dtype=np.int64)
    class_count = int(labels.max()) + 1
    shape = input_shape_for(data, cfg)
    init_rng = derive_rng(cfg.seed, "init")
    model = init_model(shape, class_count, cfg.architecture, cfg.hidden, init_rng)
    shape_model = init_model(shape, class_count, cfg.architecture, cfg.hidden, derive_rng(cfg.seed, "init-shape")) if cfg.variant == "IS_x2" else None

    spe = steps_per_epoch(n, cfg.batch_images)
    total = cfg.epochs * spe
    lrs = lr_schedule(cfg.lr, total)
    use_images = cfg.variant in IMAGE_VARIANTS
    n_bte = cfg.n_btes
    order = None

    for step in range(total):
        epoch, j = divmod(step, spe)
        if j == 0:
            order = derive_rng(cfg.seed, "order", epoch).permutation(n)
        lr = float(lrs[step])
        l_i = l_s = 0.0
        g_i = g_s = None
        if use_images:
            idx = order[j * cfg.batch_images:(j + 1) * cfg.batch_images]
            xs = [_image_slot(data[i].image, cfg, derive_rng(cfg.seed, "image", step, k)) for k, i in enumerate(idx)]
            l_i, g_i = loss_and_grad(model, _features(xs), labels[idx])
        if n_bte:
            draw = derive_rng(cfg.seed, "bte-draw", step)
            bidx = draw.choice(n, size=n_bte, replace=n_bte > n)
            xs = [_shape_slot(data[i].image, cfg, derive_rng(cfg.seed, "bte", step, k)) for k, i in enumerate(bidx)]
            target = shape_model if shape_model is not None else model
            l_s, g_s = loss_and_grad(target, _features(xs), labels[bidx])

        if cfg.variant == "S":
            grads, loss_total = g_s, l_s
        elif cfg.variant == "IS_x2":
            grads, loss_total = g_i, l_i + l_s
            for p, g in zip(shape_model.params, g_s):
                p -= lr * g
        elif g_s is not None:
            grads = [a + cfg.lam * b for a, b in zip(g_i, g_s)]
            loss_total = l_i + cfg.lam * l_s
        else:
            grads, loss_total = g_i, l_i
        for p, g in zip(model.params, grads):
            p -= lr * g

        entry = StepLog(step, lr, float(loss_total), float(l_i), float(l_s))
        if log is not None:
            log.append(entry)
        if callback is not None:
            callback(step, lr, (model,) if shape_model is None else (model, shape_model), entry)

    return (model, shape_model) if shape_model is not None else model


def write_log_csv(log: Sequence[StepLog], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "lr", "loss_total", "loss_I", "loss_S"])
        for e in log:
            w.writerow([e.step, repr(e.lr), repr(e.loss_total), repr(e.loss_I), repr(e.loss_S)])
