"""Accuracy of trained models on an evaluation set under a test variant."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..augment import preprocess_eval
from ..bte import DEFAULT_PARAMS, BteParams, encode_edges, extract_bte, sobel_edge_map
from ..trainer.model import Model, predict_proba
from ..valset import EvalSet
from .ensemble import ensemble_predict

TEST_KINDS = ("I", "S", "IS", "IS_x2")


class OraclePolicyError(RuntimeError):
    """The oracle (test-distribution) set was used outside an upper-bound report."""


@dataclass(frozen=True)
class TestVariant:
    kind: str = "I"
    w: float = 1.0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.kind not in TEST_KINDS:
            raise ValueError(f"unknown test variant {self.kind!r}")
        if self.kind == "I":
            object.__setattr__(self, "w", 1.0)
        elif self.kind == "S":
            object.__setattr__(self, "w", 0.0)
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("w must be in [0, 1]")

    @property
    def label(self) -> str:
        if self.kind in ("I", "S"):
            return self.kind
        return f"{self.kind}@{self.w:g}"


@dataclass
class PreparedSet:
    """Flattened image and BTE features of an EvalSet, computed once and reused."""

    kind: str
    labels: np.ndarray
    images: np.ndarray = field(repr=False)
    btes: np.ndarray | None = field(default=None, repr=False)
    groups: list = field(default_factory=list, repr=False)

    def subset(self, mask) -> "PreparedSet":
        mask = np.asarray(mask, dtype=bool)
        return PreparedSet(
            self.kind,
            self.labels[mask],
            self.images[mask],
            None if self.btes is None else self.btes[mask],
            [g for g, m in zip(self.groups, mask) if m],
        )


SHAPE_INPUTS = ("bte", "sobel")


def prepare(
    evalset: EvalSet,
    out_size: int,
    bte_params: BteParams = DEFAULT_PARAMS,
    with_btes: bool = True,
    shape_input: str = "bte",
) -> PreparedSet:
    """Resize every item once and compute its shape-branch features.

    ``shape_input="sobel"`` stores normalized Sobel magnitudes (blurred with
    ``bte_params.sigma``) instead of BTEs, for models trained as IS_sob.
    """
    if shape_input not in SHAPE_INPUTS:
        raise ValueError(f"shape_input must be one of {SHAPE_INPUTS}")
    imgs = [preprocess_eval(it.image, out_size) for it in evalset.items]
    x_img = np.stack([im.ravel() for im in imgs])
    x_bte = None
    if with_btes:
        def shape_map(im):
            return extract_bte(im, bte_params) if shape_input == "bte" else sobel_edge_map(im, bte_params.sigma)

        x_bte = np.stack([encode_edges(shape_map(im), 1 if im.ndim == 2 else im.shape[2]).ravel() for im in imgs])
    groups = [p.group if p is not None else None for p in evalset.provenance]
    return PreparedSet(evalset.kind, evalset.labels, x_img, x_bte, groups)


def predict(models, prepared: PreparedSet, tv: TestVariant) -> np.ndarray:
    """Combined class probabilities (n, C) for every item of ``prepared``."""
    if isinstance(models, Model):
        image_model = shape_model = models
    else:
        image_model, shape_model = models
    if tv.kind != "IS_x2":
        shape_model = image_model
    if tv.w == 1.0:
        return predict_proba(image_model, prepared.images)
    if prepared.btes is None:
        raise ValueError("prepared set has no BTE features; prepare it with with_btes=True")
    p_s = predict_proba(shape_model, prepared.btes)
    if tv.w == 0.0:
        return p_s
    return ensemble_predict(predict_proba(image_model, prepared.images), p_s, tv.w)


def accuracy_from_probs(probs: np.ndarray, labels) -> float:
    # np.argmax breaks ties toward the lowest class index
    return float(np.mean(np.argmax(probs, axis=1) == np.asarray(labels)))


def evaluate(models, evalset, tv: TestVariant = TestVariant(), bte_params: BteParams = DEFAULT_PARAMS, out_size: int | None = None, allow_oracle: bool = False) -> float:
    """Classification accuracy. ``evalset`` may be an EvalSet or a PreparedSet."""
    kind = evalset.kind
    if kind == "oracle" and not allow_oracle:
        raise OraclePolicyError("oracle sets are only evaluated for upper-bound reports (allow_oracle=True)")
    if isinstance(evalset, EvalSet):
        if out_size is None:
            first = models if isinstance(models, Model) else models[0]
            out_size = first.input_shape[0]
        evalset = prepare(evalset, out_size, bte_params, with_btes=tv.w < 1.0)
    return accuracy_from_probs(predict(models, evalset, tv), evalset.labels)
