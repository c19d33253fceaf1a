"""Validation-set variants: standard, augmented (one transform per group), same-size augmented, oracle."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .augment import AugmentationGroup, apply_extra, parse_groups, sample_group, sample_spec
from .imageio import list_images, read_image, write_png
from .rng import derive_rng

KINDS = ("standard", "augmented", "augmented_small", "oracle")
MANIFEST_COLUMNS = ("id", "source_id", "label", "group", "spec", "params_json_like_text")


class ValsetError(ValueError):
    pass


@dataclass
class LabeledImage:
    image: np.ndarray = field(repr=False)
    label: int
    id: str


@dataclass(frozen=True)
class Provenance:
    source_id: str
    group: AugmentationGroup | None = None
    spec: str = ""
    params: str = ""


@dataclass
class EvalSet:
    kind: str
    items: list[LabeledImage]
    provenance: list[Provenance | None] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValsetError(f"unknown set kind {self.kind!r}")
        if not self.provenance:
            self.provenance = [None] * len(self.items)
        if len(self.provenance) != len(self.items):
            raise ValsetError("provenance must align with items")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def labels(self) -> np.ndarray:
        return np.array([it.label for it in self.items], dtype=np.int64)

    def groups(self) -> set[AugmentationGroup]:
        return {p.group for p in self.provenance if p is not None and p.group is not None}


def _check_ids(items: Sequence[LabeledImage]) -> None:
    ids = [it.id for it in items]
    if len(set(ids)) != len(ids):
        raise ValsetError("item ids must be unique within a set")


def _copy(it: LabeledImage, image=None, id=None) -> LabeledImage:
    return LabeledImage(np.array(it.image if image is None else image, dtype=np.float64), int(it.label), id or it.id)


def build_standard(val: Sequence[LabeledImage]) -> EvalSet:
    if not val:
        raise ValsetError("standard validation set needs at least one image")
    _check_ids(val)
    return EvalSet("standard", [_copy(it) for it in val], [Provenance(it.id) for it in val])


def _augment_item(it: LabeledImage, group: AugmentationGroup, rng) -> tuple[LabeledImage, Provenance]:
    spec = sample_spec(group, rng)
    out = apply_extra(it.image, spec, rng)
    return _copy(it, out, f"{it.id}__{group.value}"), Provenance(it.id, group, spec.name, spec.params_text())


def build_augmented(val: Sequence[LabeledImage], groups=None, seed: int = 0) -> EvalSet:
    """Each image once per group, with one transform drawn uniformly within that group.

    The stream for (image id, group) depends only on ``seed``, so the set is
    identical however it is built or parallelized.
    """
    groups = parse_groups(groups if groups is not None else "all")
    if not groups:
        raise ValsetError("augmented validation set needs at least one group")
    _check_ids(val)
    items, prov = [], []
    for it in val:
        for g in groups:
            item, p = _augment_item(it, g, derive_rng(seed, "valset", "augmented", it.id, g.value))
            items.append(item)
            prov.append(p)
    return EvalSet("augmented", items, prov)


def build_augmented_small(val: Sequence[LabeledImage], groups=None, seed: int = 0) -> EvalSet:
    """One randomly chosen group per image; same size as the input set."""
    groups = parse_groups(groups if groups is not None else "all")
    if not groups:
        raise ValsetError("augmented validation set needs at least one group")
    _check_ids(val)
    items, prov = [], []
    for it in val:
        rng = derive_rng(seed, "valset", "augmented_small", it.id)
        item, p = _augment_item(it, sample_group(groups, rng), rng)
        items.append(item)
        prov.append(p)
    return EvalSet("augmented_small", items, prov)


def build_oracle(test_sets: Iterable) -> EvalSet:
    """Union of the target test sets. Only for upper-bound reporting."""
    items, prov = [], []
    for s in test_sets:
        for i, it in enumerate(s.items if isinstance(s, EvalSet) else s):
            items.append(_copy(it))
            prov.append(s.provenance[i] if isinstance(s, EvalSet) else None)
    if not items:
        raise ValsetError("oracle set needs at least one test item")
    _check_ids(items)
    return EvalSet("oracle", items, prov)


def save_evalset(evalset: EvalSet, root) -> Path:
    """Write ``<root>/<kind>/<id>.png`` and ``<root>/<kind>/manifest.csv``."""
    out = Path(root) / evalset.kind
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_COLUMNS)
        for it, p in zip(evalset.items, evalset.provenance):
            write_png(out / f"{it.id}.png", it.image)
            w.writerow([
                it.id,
                p.source_id if p else it.id,
                it.label,
                p.group.value if p and p.group else "",
                p.spec if p else "",
                p.params if p else "",
            ])
    return out


def load_evalset(directory) -> EvalSet:
    directory = Path(directory)
    kind = directory.name
    items, prov = [], []
    with open(directory / "manifest.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            items.append(LabeledImage(read_image(directory / f"{row['id']}.png"), int(row["label"]), row["id"]))
            group = AugmentationGroup(row["group"]) if row["group"] else None
            prov.append(Provenance(row["source_id"], group, row["spec"], row["params_json_like_text"]))
    return EvalSet(kind, items, prov)


def load_labeled_folder(root, class_names: Sequence[str] | None = None) -> tuple[list[LabeledImage], list[str]]:
    """Labeled images from a directory.

    Either a saved set (``manifest.csv`` present, labels from the manifest,
    class names are the label numbers) or ``<root>/<class_name>/*.png`` with
    labels following sorted class names. Pass ``class_names`` to reuse the
    label mapping of another split.
    """
    root = Path(root)
    if not root.is_dir():
        raise ValsetError(f"not a directory: {root}")
    if (root / "manifest.csv").exists():
        items = load_evalset(root).items
        if not items:
            raise ValsetError(f"no images listed in {root / 'manifest.csv'}")
        count = max(it.label for it in items) + 1
        return items, list(class_names) if class_names is not None else [str(k) for k in range(count)]
    names = sorted(p.name for p in root.iterdir() if p.is_dir()) if class_names is None else list(class_names)
    if not names:
        raise ValsetError(f"no class subdirectories under {root}")
    items = []
    for label, name in enumerate(names):
        sub = root / name
        if not sub.is_dir():
            continue
        for path in list_images(sub):
            items.append(LabeledImage(read_image(path), label, f"{name}-{path.stem}"))
    if not items:
        raise ValsetError(f"no images found under {root}")
    return items, names
