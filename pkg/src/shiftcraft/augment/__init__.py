"""Basic and extra augmentations and the training-time sampling policy."""

from __future__ import annotations

import numpy as np

from ..rng import as_rng
from .basic import BasicAugConfig, apply_basic, preprocess_eval, resize_bilinear
from .registry import (
    ALL_GROUPS,
    AugmentationGroup,
    AugmentationSpec,
    RegistryError,
    Template,
    apply_extra,
    make_spec,
    parse_groups,
    registry,
    sample_spec,
    template,
)


class AugmentConfigError(ValueError):
    pass


def sample_group(allowed_groups, rng) -> AugmentationGroup:
    groups = parse_groups(allowed_groups)
    if not groups:
        raise AugmentConfigError("extra augmentation requested with no allowed groups")
    return groups[int(as_rng(rng).integers(len(groups)))]


def augment_for_training(img, allowed_groups, extra_prob: float, cfg: BasicAugConfig, rng=None) -> np.ndarray:
    """At most one extra augmentation (with probability ``extra_prob``), then the basic ones."""
    rng = as_rng(rng)
    out = np.asarray(img, dtype=np.float64)
    if extra_prob > 0 and rng.random() < extra_prob:
        spec = sample_spec(sample_group(allowed_groups, rng), rng)
        out = apply_extra(out, spec, rng)
    return apply_basic(out, cfg, rng)


__all__ = [
    "ALL_GROUPS",
    "AugmentConfigError",
    "AugmentationGroup",
    "AugmentationSpec",
    "BasicAugConfig",
    "RegistryError",
    "Template",
    "apply_basic",
    "apply_extra",
    "augment_for_training",
    "make_spec",
    "parse_groups",
    "preprocess_eval",
    "registry",
    "resize_bilinear",
    "sample_group",
    "sample_spec",
    "template",
]
