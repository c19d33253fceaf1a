"""Grid runner: train variants x lr x lambda x replicates, validate, correlate, select.

Every grid point (a *job*) trains one model (plus the two fold models of the
two-fold group cross-validation for variants with extra augmentations) and
emits one :class:`ExperimentRecord` per (test variant, validation kind).

Outputs in the run directory:

``run_manifest.txt``
    Written before any training; the configuration, its hash and versions.
``records.partial.csv``
    Records appended as jobs finish; a re-run skips jobs already present.
``report.csv``
    One row per (grid point, test variant) in canonical order, with one
    accuracy column per validation kind and the configuration hash.
``correlation.csv``
    Spearman rho between validation and mean target accuracy per kind.
``selection.txt``
    The model chosen by each validation kind (oracle only as upper bound).
"""

from __future__ import annotations

import csv
import hashlib
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .. import __version__
from ..augment import ALL_GROUPS, BasicAugConfig
from ..bte import DEFAULT_PARAMS
from ..imgcore import BACKEND
from ..rng import derive_seed
from ..synthdata import SynthSpec, generate_source, generate_target
from ..trainer import EXTRA_AUG_VARIANTS, SHAPE_VARIANTS, VARIANTS, TrainConfig, train
from ..valset import EvalSet, build_augmented, build_augmented_small, build_oracle, build_standard, load_labeled_folder
from .evaluate import TEST_KINDS, TestVariant, accuracy_from_probs, predict, prepare
from .grids import grid_w
from .select import ExperimentRecord, SelectionReport, correlation, select
from .stats import UndefinedCorrelationError
from .tcv import check_no_leakage, tcv_fold_models, tcv_split

RECORD_COLUMNS = ("train_variant", "test_variant", "w", "lambda", "lr", "seed", "val_kind", "val_accuracy", "test_accuracy")
PARTIAL_COLUMNS = ("job",) + RECORD_COLUMNS
KEY_COLUMNS = ("train_variant", "test_variant", "w", "lambda", "lr", "seed")
DEFAULT_TARGETS = ("invert", "heavy_noise", "edge_only", "color_jitter")
AUGMENTED_KINDS = ("augmented", "augmented_small")
VAL_KIND_ORDER = ("standard", "augmented", "augmented_small", "oracle")
REPORT_COLUMNS = KEY_COLUMNS + tuple(f"val_{k}" for k in VAL_KIND_ORDER) + ("test_accuracy", "config_sha256")
LAMBDA_VARIANTS = ("IS", "IS_sob", "I_hat_S")


class ExperimentError(RuntimeError):
    """The run directory or configuration is unusable."""


class NumericalError(ArithmeticError):
    """Training produced non-finite weights."""


@dataclass(frozen=True)
class ExperimentConfig:
    # data
    source: str = "synth"
    class_count: int = 7
    image_size: int = 32
    per_class_train: int = 50
    per_class_val: int = 20
    per_class_test: int = 20
    texture_strength: float = 0.8
    targets: tuple[str, ...] = DEFAULT_TARGETS
    train_dir: str | None = None
    val_dir: str | None = None
    test_dirs: tuple[str, ...] = ()
    # training
    variants: tuple[str, ...] = ("I", "S", "IS")
    lrs: tuple[float, ...] = (0.03, 0.1)
    lambdas: tuple[float, ...] = (0.5, 1.0)
    replicates: int = 1
    epochs: int = 20
    batch_images: int = 64
    batch_btes: int | None = None
    architecture: str = "mlp"
    hidden: int = 64
    extra_prob: float = 0.5
    # evaluation
    val_kinds: tuple[str, ...] = ("standard", "augmented")
    ws: tuple[float, ...] = tuple(grid_w())
    oracle: bool = False
    split_seed: int | None = None
    # run
    seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        if self.source not in ("synth", "folder"):
            raise ExperimentError(f"source must be 'synth' or 'folder', got {self.source!r}")
        if self.source == "folder" and not (self.train_dir and self.val_dir):
            raise ExperimentError("folder source needs train_dir and val_dir")
        for v in self.variants:
            if v not in VARIANTS:
                raise ExperimentError(f"unknown variant {v!r}; expected one of {VARIANTS}")
        for k in self.val_kinds:
            if k not in ("standard",) + AUGMENTED_KINDS:
                raise ExperimentError(f"unknown validation kind {k!r}")
        if not self.variants or not self.lrs or not self.val_kinds:
            raise ExperimentError("variants, lrs and val_kinds must be non-empty")
        if any(lr <= 0 for lr in self.lrs):
            raise ExperimentError("learning rates must be positive")
        if any(not 0.0 <= lam <= 1.0 for lam in self.lambdas):
            raise ExperimentError("lambdas must be in [0, 1]")
        if any(not 0.0 <= w <= 1.0 for w in self.ws):
            raise ExperimentError("ws must be in [0, 1]")
        if self.replicates < 1:
            raise ExperimentError("replicates must be >= 1")
        if any(v in LAMBDA_VARIANTS for v in self.variants) and not self.lambdas:
            raise ExperimentError("shape variants need at least one lambda")

    @property
    def effective_split_seed(self) -> int:
        return self.seed if self.split_seed is None else self.split_seed

    def canonical_text(self) -> str:
        """Stable text form; ``workers`` is excluded because it cannot change results."""
        d = asdict(self)
        d.pop("workers")
        return "\n".join(f"{k}={d[k]!r}" for k in sorted(d))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Job:
    variant: str
    lr: float
    lam: float | None
    replicate: int

    @property
    def key(self) -> str:
        lam = "-" if self.lam is None else repr(self.lam)
        return f"{self.variant}|{self.lr!r}|{lam}|{self.replicate}"


@dataclass
class ExperimentResult:
    records: list[ExperimentRecord]
    correlations: dict[str, tuple[float, int]]
    selections: dict[str, SelectionReport]
    upper_bound: SelectionReport | None = None
    out_dir: Path | None = None
    skipped_jobs: int = 0
    extras: dict = field(default_factory=dict)


def training_seed(master_seed: int, replicate: int) -> int:
    return int(derive_seed(master_seed, "train", replicate).generate_state(1)[0])


def test_variants(variant: str, ws: Sequence[float]) -> list[TestVariant]:
    """Test variants evaluated for a training variant."""
    if variant == "S":
        return [TestVariant("S")]
    if variant == "IS_x2":
        return [TestVariant("IS_x2", w) for w in ws]
    if variant in SHAPE_VARIANTS:
        return [TestVariant("IS", w) for w in ws]
    return [TestVariant("I")]


def jobs_for(cfg: ExperimentConfig) -> list[Job]:
    """λ is only a grid axis where it weights a shared shape loss; elsewhere it is None."""
    out = []
    for v in cfg.variants:
        lams = cfg.lambdas if v in LAMBDA_VARIANTS else (None,)
        for lr in cfg.lrs:
            for lam in lams:
                for r in range(cfg.replicates):
                    out.append(Job(v, float(lr), None if lam is None else float(lam), r))
    return out


def train_config(cfg: ExperimentConfig, job: Job) -> TrainConfig:
    return TrainConfig(
        variant=job.variant,
        lam=1.0 if job.lam is None else job.lam,
        lr=job.lr,
        epochs=cfg.epochs,
        batch_images=cfg.batch_images,
        batch_btes=cfg.batch_btes if job.variant in SHAPE_VARIANTS else None,
        seed=training_seed(cfg.seed, job.replicate),
        allowed_groups=ALL_GROUPS,
        extra_prob=cfg.extra_prob,
        architecture=cfg.architecture,
        hidden=cfg.hidden,
        basic=BasicAugConfig.digits(cfg.image_size),
    )


class Context:
    """Data, validation and target sets of a run, with prepared-feature caching."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        if cfg.source == "synth":
            spec = SynthSpec(
                class_count=cfg.class_count,
                image_size=cfg.image_size,
                per_class_train=cfg.per_class_train,
                per_class_val=cfg.per_class_val,
                per_class_test=cfg.per_class_test,
                texture_strength=cfg.texture_strength,
                seed=cfg.seed,
            )
            self.train, self.val = generate_source(spec)
            self.targets = {s: EvalSet("standard", generate_target(spec, s)) for s in cfg.targets}
        else:
            self.train, names = load_labeled_folder(cfg.train_dir)
            self.val, _ = load_labeled_folder(cfg.val_dir, names)
            self.targets = {str(d): EvalSet("standard", load_labeled_folder(d, names)[0]) for d in cfg.test_dirs}
        self.out_size = cfg.image_size
        self.folds = [tcv_split(ALL_GROUPS, f, cfg.effective_split_seed) for f in (0, 1)]
        self._sets: dict = {}
        self._prepared: dict = {}

    def evalset(self, name: str, fold: int | None = None) -> EvalSet:
        key = (name, fold)
        if key not in self._sets:
            groups = ALL_GROUPS if fold is None else self.folds[fold][1]
            if name == "standard":
                s = build_standard(self.val)
            elif name == "augmented":
                s = build_augmented(self.val, groups, self.cfg.seed)
            elif name == "augmented_small":
                s = build_augmented_small(self.val, groups, self.cfg.seed)
            elif name == "oracle":
                s = build_oracle(self.targets.values())
            else:
                s = self.targets[name.split(":", 1)[1]]
            self._sets[key] = s
        return self._sets[key]

    def prepared(self, name: str, shape_input: str, fold: int | None = None):
        key = (name, shape_input, fold)
        if key not in self._prepared:
            self._prepared[key] = prepare(self.evalset(name, fold), self.out_size, DEFAULT_PARAMS, True, shape_input)
        return self._prepared[key]


def _check_finite(models) -> None:
    for m in models if isinstance(models, tuple) else (models,):
        if not all(np.all(np.isfinite(p)) for p in m.params):
            raise NumericalError("training diverged: non-finite weights (try a smaller learning rate)")


def _accuracy(models, prepared, tv: TestVariant) -> float:
    return accuracy_from_probs(predict(models, prepared, tv), prepared.labels)


def run_job(ctx: Context, job: Job) -> list[ExperimentRecord]:
    cfg = ctx.cfg
    tcfg = train_config(cfg, job)
    shape_input = "sobel" if job.variant == "IS_sob" else "bte"
    model = train(ctx.train, tcfg)
    _check_finite(model)
    fold_models = None
    if job.variant in EXTRA_AUG_VARIANTS and any(k in AUGMENTED_KINDS for k in cfg.val_kinds):
        fold_models = tcv_fold_models(ctx.train, tcfg, folds=ctx.folds)
        for f in fold_models:
            _check_finite(f.model)
    records = []
    for tv in test_variants(job.variant, cfg.ws):
        test_acc = None
        if ctx.targets:
            test_acc = float(np.mean([_accuracy(model, ctx.prepared(f"target:{t}", shape_input), tv) for t in ctx.targets]))

        def rec(kind, acc):
            return ExperimentRecord(job.variant, tv.kind, tv.w, job.lam, job.lr, tcfg.seed, kind, acc, test_acc)

        for kind in cfg.val_kinds:
            if kind in AUGMENTED_KINDS and fold_models is not None:
                accs = []
                for i, f in enumerate(fold_models):
                    vset = ctx.evalset(kind, i)
                    check_no_leakage(vset, f.train_groups)
                    accs.append(_accuracy(f.model, ctx.prepared(kind, shape_input, i), tv))
                acc = (accs[0] + accs[1]) / 2.0
            else:
                acc = _accuracy(model, ctx.prepared(kind, shape_input), tv)
            records.append(rec(kind, acc))
        if cfg.oracle and ctx.targets:
            records.append(rec("oracle", _accuracy(model, ctx.prepared("oracle", shape_input), tv)))
    return records


# -- persistence ---------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _row(r: ExperimentRecord) -> list[str]:
    return [r.train_variant, r.test_variant, _fmt(float(r.w)), _fmt(r.lam), _fmt(r.lr), str(r.seed), r.val_kind, _fmt(r.val_accuracy), _fmt(r.test_accuracy)]


def _parse_row(row: dict) -> ExperimentRecord:
    opt = lambda s: None if s == "" else float(s)  # noqa: E731
    return ExperimentRecord(
        row["train_variant"], row["test_variant"], float(row["w"]), opt(row["lambda"]), float(row["lr"]),
        int(row["seed"]), row["val_kind"], float(row["val_accuracy"]), opt(row["test_accuracy"]),
    )


def record_sort_key(r: ExperimentRecord) -> tuple:
    return (
        VARIANTS.index(r.train_variant),
        r.lr,
        -1.0 if r.lam is None else r.lam,
        r.seed,
        TEST_KINDS.index(r.test_variant),
        r.w,
        VAL_KIND_ORDER.index(r.val_kind),
    )


def read_report(path) -> list[ExperimentRecord]:
    """Records of a report.csv, one per filled validation column."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            for kind in VAL_KIND_ORDER:
                if row[f"val_{kind}"] != "":
                    out.append(_parse_row({**row, "val_kind": kind, "val_accuracy": row[f"val_{kind}"]}))
    return sorted(out, key=record_sort_key)


def write_report(path, records: Sequence[ExperimentRecord], digest: str = "") -> None:
    rows: dict[tuple, dict] = {}
    for r in sorted(records, key=record_sort_key):
        cells = _row(r)
        key = tuple(cells[:6])
        row = rows.setdefault(key, {"test_accuracy": cells[8], "order": record_sort_key(r)[:6]})
        row[r.val_kind] = cells[7]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for key, row in sorted(rows.items(), key=lambda kv: kv[1]["order"]):
            w.writerow(list(key) + [row.get(k, "") for k in VAL_KIND_ORDER] + [row["test_accuracy"], digest])


def write_manifest(path, cfg: ExperimentConfig, config_path=None) -> None:
    """Run manifest with every default resolved; written before any computation."""
    lines = [
        f"config_path={'' if config_path is None else Path(config_path).resolve()}",
        f"output_dir={Path(path).resolve().parent}",
        f"package_version={__version__}",
        f"kernel_backend={BACKEND}",
        f"python={platform.python_version()}",
        f"numpy={np.__version__}",
        f"config_sha256={cfg.digest()}",
        f"master_seed={cfg.seed}",
        f"split_seed={cfg.effective_split_seed}",
        "[config]",
        cfg.canonical_text(),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def _manifest_digest(path) -> str | None:
    for line in Path(path).read_text().splitlines():
        if line.startswith("config_sha256="):
            return line.split("=", 1)[1]
    return None


def _load_partial(path) -> dict[str, list[ExperimentRecord]]:
    done: dict[str, list[ExperimentRecord]] = {}
    if not Path(path).exists():
        return done
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            done.setdefault(row["job"], []).append(_parse_row(row))
    return done


def write_correlation(path, correlations: dict[str, tuple[float, int]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("val_kind", "spearman_rho", "n_points"))
        for kind in VAL_KIND_ORDER:
            if kind in correlations:
                rho, n = correlations[kind]
                w.writerow((kind, "nan" if rho != rho else repr(float(rho)), n))


def _describe(r: ExperimentRecord) -> str:
    lam = "-" if r.lam is None else f"{r.lam:g}"
    test = "-" if r.test_accuracy is None else f"{r.test_accuracy:.4f}"
    tv = r.test_variant if r.test_variant in ("I", "S") else f"{r.test_variant}@{r.w:g}"
    return f"train={r.train_variant} test={tv} lr={r.lr:g} lambda={lam} seed={r.seed} val={r.val_accuracy:.4f} target={test}"


def format_selection(result: ExperimentResult) -> str:
    lines = []
    for kind, rep in result.selections.items():
        lines.append(f"[{kind}] chosen: {_describe(rep.chosen)}")
        for i, r in enumerate(rep.runner_ups, 1):
            lines.append(f"[{kind}] runner-up {i}: {_describe(r)}")
        rho = rep.spearman_rho.get(kind)
        if rho is not None:
            lines.append(f"[{kind}] spearman_rho={rho:.4f}")
    base = result.selections.get("standard")
    if base is not None and base.chosen.test_accuracy:
        for kind, rep in result.selections.items():
            if kind != "standard" and rep.chosen.test_accuracy is not None:
                ratio = rep.chosen.test_accuracy / base.chosen.test_accuracy
                lines.append(f"relative target accuracy {kind}/standard = {ratio:.4f}")
    if result.upper_bound is not None:
        lines.append(f"[oracle upper bound, not a valid selection] {_describe(result.upper_bound.chosen)}")
    return "\n".join(lines) + "\n"


# -- driver ---------------------------------------------------------------------

_WORKER_CTX: Context | None = None


def _init_worker(cfg: ExperimentConfig) -> None:
    global _WORKER_CTX
    _WORKER_CTX = Context(cfg)


def _work(job: Job) -> tuple[str, list[ExperimentRecord]]:
    return job.key, run_job(_WORKER_CTX, job)


def worker_count(cfg: ExperimentConfig) -> int:
    env = os.environ.get("SHIFTCRAFT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ExperimentError(f"SHIFTCRAFT_THREADS must be an integer, got {env!r}") from exc
    return max(1, cfg.workers or 1)


def summarize(records: Sequence[ExperimentRecord], n_runner_ups: int = 3) -> tuple[dict, dict, SelectionReport | None]:
    correlations, selections = {}, {}
    by_kind: dict[str, list] = {}
    for r in records:
        by_kind.setdefault(r.val_kind, []).append(r)
    for kind in VAL_KIND_ORDER:
        recs = by_kind.get(kind)
        if not recs:
            continue
        try:
            correlations[kind] = correlation(recs)
        except UndefinedCorrelationError:
            correlations[kind] = (float("nan"), sum(r.test_accuracy is not None for r in recs))
    rhos = {k: v[0] for k, v in correlations.items()}
    for kind in VAL_KIND_ORDER:
        if kind in by_kind and kind != "oracle":
            rep = select(by_kind[kind], kind, n_runner_ups=n_runner_ups)
            rep.spearman_rho = dict(rhos)
            selections[kind] = rep
    upper = None
    if "oracle" in by_kind:
        upper = select(by_kind["oracle"], "oracle", upper_bound=True, n_runner_ups=n_runner_ups)
    return correlations, selections, upper


def run_experiment(cfg: ExperimentConfig, out_dir=None, resume: bool = True, progress=None, config_path=None) -> ExperimentResult:
    """Run the grid; with ``out_dir`` write the run files and resume from partial records."""
    jobs = jobs_for(cfg)
    done: dict[str, list[ExperimentRecord]] = {}
    partial = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = out_dir / "run_manifest.txt"
        partial = out_dir / "records.partial.csv"
        if manifest.exists() and partial.exists() and resume:
            if _manifest_digest(manifest) != cfg.digest():
                raise ExperimentError(f"{out_dir} holds records of a different configuration; use a fresh directory")
            done = _load_partial(partial)
        elif partial.exists():
            partial.unlink()
        write_manifest(manifest, cfg, config_path)
        if not partial.exists():
            with open(partial, "w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(PARTIAL_COLUMNS)
    todo = [j for j in jobs if j.key not in done]
    skipped = len(jobs) - len(todo)

    def store(key, recs):
        done[key] = recs
        if partial is not None:
            with open(partial, "a", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                for r in recs:
                    w.writerow([key] + _row(r))
        if progress is not None:
            progress(key, recs)

    n_workers = min(worker_count(cfg), max(1, len(todo)))
    if todo and n_workers > 1:
        with ProcessPoolExecutor(n_workers, initializer=_init_worker, initargs=(cfg,)) as pool:
            for key, recs in pool.map(_work, todo):
                store(key, recs)
    elif todo:
        ctx = Context(cfg)
        for job in todo:
            store(job.key, run_job(ctx, job))

    records = sorted((r for j in jobs for r in done.get(j.key, [])), key=record_sort_key)
    correlations, selections, upper = summarize(records)
    result = ExperimentResult(records, correlations, selections, upper, out_dir, skipped)
    if out_dir is not None:
        write_report(out_dir / "report.csv", records, cfg.digest())
        write_correlation(out_dir / "correlation.csv", correlations)
        (out_dir / "selection.txt").write_text(format_selection(result))
    return result
