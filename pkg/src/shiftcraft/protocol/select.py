"""Experiment records and validation-driven model selection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..trainer import VARIANTS
from .evaluate import TEST_KINDS, OraclePolicyError
from .stats import UndefinedCorrelationError, spearman

VAL_KINDS = ("standard", "augmented", "augmented_small", "oracle")


@dataclass(frozen=True)
class ExperimentRecord:
    train_variant: str
    test_variant: str
    w: float
    lam: float | None
    lr: float
    seed: int
    val_kind: str
    val_accuracy: float
    test_accuracy: float | None = None

    def __post_init__(self):
        for a in (self.val_accuracy, self.test_accuracy):
            if a is not None and not 0.0 <= a <= 1.0:
                raise ValueError(f"accuracy {a} outside [0, 1]")

    def tie_key(self) -> tuple:
        """Order among equal validation accuracy: smaller lr, smaller lambda, canonical variants."""
        return (
            self.lr,
            -1.0 if self.lam is None else self.lam,
            VARIANTS.index(self.train_variant),
            TEST_KINDS.index(self.test_variant),
            self.w,
            self.seed,
        )


@dataclass
class SelectionReport:
    chosen: ExperimentRecord
    runner_ups: list[ExperimentRecord]
    by: str
    n_records: int
    spearman_rho: dict[str, float] = field(default_factory=dict)
    grids: dict = field(default_factory=dict)


def select(records: Sequence[ExperimentRecord], by: str, upper_bound: bool = False, n_runner_ups: int = 3) -> SelectionReport:
    """Pick the record with the highest validation accuracy on ``by``.

    Oracle records are refused unless ``upper_bound`` is set. Test accuracy is never read.
    """
    if not records:
        raise ValueError("no records to select from")
    if by not in VAL_KINDS:
        raise ValueError(f"unknown validation kind {by!r}")
    if (by == "oracle" or any(r.val_kind == "oracle" for r in records)) and not upper_bound:
        raise OraclePolicyError("selection on the oracle set is only allowed for the upper-bound report")
    mismatched = [r for r in records if r.val_kind != by]
    if mismatched:
        raise ValueError(f"all records must share val kind {by!r}; found {mismatched[0].val_kind!r}")
    ranked = sorted(records, key=lambda r: (-r.val_accuracy, r.tie_key()))
    return SelectionReport(ranked[0], ranked[1:1 + n_runner_ups], by, len(records))


def correlation(records: Sequence[ExperimentRecord]) -> tuple[float, int]:
    """Spearman rho between validation and test accuracy over ``records``, and the point count."""
    pts = [(r.val_accuracy, r.test_accuracy) for r in records if r.test_accuracy is not None]
    if len(pts) < 2:
        raise UndefinedCorrelationError("need at least two records with test accuracy")
    xs, ys = zip(*pts)
    return spearman(xs, ys), len(pts)
