"""Two-fold cross-validation over augmentation groups."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from ..augment import ALL_GROUPS, AugmentationGroup, parse_groups
from ..bte import DEFAULT_PARAMS, BteParams
from ..rng import derive_rng
from ..trainer import EXTRA_AUG_VARIANTS, TrainConfig, train
from ..valset import LabeledImage, build_augmented
from .evaluate import TestVariant, evaluate, prepare


class ProtocolError(RuntimeError):
    pass


def tcv_split(groups=ALL_GROUPS, fold: int = 0, split_seed: int = 0) -> tuple[tuple[AugmentationGroup, ...], tuple[AugmentationGroup, ...]]:
    """(train_groups, val_groups) for ``fold``; the two folds swap the halves.

    The halves come from a seeded permutation of the canonical group order;
    each half is returned in canonical order.
    """
    if fold not in (0, 1):
        raise ValueError("fold must be 0 or 1")
    groups = parse_groups(groups)
    perm = derive_rng(split_seed, "tcv-split").permutation(len(groups))
    half = len(groups) // 2
    first = {groups[i] for i in perm[:half]}
    a = tuple(g for g in groups if g in first)
    b = tuple(g for g in groups if g not in first)
    return (a, b) if fold == 0 else (b, a)


@dataclass
class TcvResult:
    score: float
    fold_accuracies: tuple[float, float]
    train_groups: tuple[tuple, tuple]
    val_groups: tuple[tuple, tuple]
    val_sets: list = field(default_factory=list, repr=False)
    final_model: object = field(default=None, repr=False)


@dataclass
class TcvFold:
    train_groups: tuple
    val_groups: tuple
    model: object = field(repr=False)


def check_no_leakage(vset, train_groups) -> None:
    """Raise unless no validation item stems from a training group."""
    leaked = vset.groups() & set(parse_groups(train_groups))
    if leaked:
        raise ProtocolError(f"validation groups {sorted(g.value for g in leaked)} were also used in training")


def tcv_fold_models(
    data: Sequence[LabeledImage],
    cfg: TrainConfig,
    split_seed: int = 0,
    train_fn: Callable = train,
    folds: list | None = None,
) -> list[TcvFold]:
    """Train one model per fold, each restricted to that fold's training groups."""
    if cfg.variant not in EXTRA_AUG_VARIANTS:
        raise ProtocolError(f"variant {cfg.variant} uses no extra augmentations; validate on the plain augmented set instead")
    if folds is None:
        folds = [tcv_split(ALL_GROUPS, f, split_seed) for f in (0, 1)]
    out = []
    for train_groups, val_groups in folds:
        train_groups, val_groups = parse_groups(train_groups), parse_groups(val_groups)
        if set(train_groups) & set(val_groups):
            raise ProtocolError("fold training and validation groups overlap")
        out.append(TcvFold(train_groups, val_groups, train_fn(data, replace(cfg, allowed_groups=train_groups))))
    return out


def tcv_validate(
    data: Sequence[LabeledImage],
    cfg: TrainConfig,
    val_images: Sequence[LabeledImage],
    tv: TestVariant,
    split_seed: int = 0,
    valset_seed: int = 0,
    bte_params: BteParams = DEFAULT_PARAMS,
    final_train: bool = False,
    train_fn: Callable = train,
    folds: list | None = None,
    builder: Callable = build_augmented,
) -> TcvResult:
    """Average validation accuracy over the two group folds.

    Each fold trains with ``allowed_groups`` = its training half and is
    validated on the augmented set (``builder``) built from the other half
    only. ``folds`` overrides the split as [(train_groups, val_groups), ...].
    With ``final_train`` a last model is trained on all groups of ``cfg``.
    """
    trained = tcv_fold_models(data, cfg, split_seed, train_fn, folds)
    shape_input = "sobel" if cfg.variant == "IS_sob" else "bte"
    accs, vsets = [], []
    for fold in trained:
        vset = builder(val_images, fold.val_groups, valset_seed)
        check_no_leakage(vset, fold.train_groups)
        first = fold.model if not isinstance(fold.model, tuple) else fold.model[0]
        prepared = prepare(vset, first.input_shape[0], bte_params, with_btes=tv.w < 1.0, shape_input=shape_input)
        accs.append(evaluate(fold.model, prepared, tv))
        vsets.append(vset)
    final = train_fn(data, cfg) if final_train else None
    return TcvResult(
        (accs[0] + accs[1]) / 2.0,
        (accs[0], accs[1]),
        tuple(f.train_groups for f in trained),
        tuple(f.val_groups for f in trained),
        vsets,
        final,
    )
