"""``shiftcraft`` command-line entry point.

Subcommands::

    shiftcraft bte extract --in DIR --out DIR [--random --seed N] [--sigma F --method M]
    shiftcraft augment list
    shiftcraft augment preview --in IMAGE --out PNG [--groups LIST] [--samples N] [--seed N]
    shiftcraft valset build --in DIR --out DIR --kind {standard,augmented,augmented-small} [--groups LIST] [--seed N]
    shiftcraft synth generate --out DIR [--seed N] [--shifts LIST] [...]
    shiftcraft run --config FILE [--out DIR] [--oracle] [--fresh]

Exit codes: 0 success, 1 usage, 2 configuration, 3 I/O, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import __version__
from ..augment import ALL_GROUPS, parse_groups, registry
from ..augment.registry import RegistryError, apply_extra, sample_spec
from ..bte import BteParams, extract_bte, extract_bte_random
from ..imageio import list_images, read_image, write_png
from ..imgcore import ThresholdMethod
from ..protocol.experiment import ExperimentError, NumericalError, run_experiment
from ..rng import derive_rng
from ..synthdata import SHIFTS, SynthSpec, generate_source, generate_target
from ..valset import ValsetError, build_augmented, build_augmented_small, build_standard, load_labeled_folder, save_evalset
from .config import ConfigError, load_config

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4

log = logging.getLogger("shiftcraft")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse reports usage errors through an exception so they map to exit code 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _groups_arg(text: str):
    try:
        return parse_groups(text)
    except (RegistryError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# -- bte -------------------------------------------------------------------------

PROVENANCE_COLUMNS = ("input", "output", "sigma", "method", "threshold_noise", "bound_noise_low", "bound_noise_high", "min_area_fraction")


def cmd_bte(args) -> int:
    src, dst = Path(args.inp), Path(args.out)
    if not src.is_dir():
        log.error("input directory %s does not exist", src)
        return EXIT_IO
    if args.random and (args.sigma is not None or args.method is not None):
        raise UsageError("--random draws sigma and method itself; drop --sigma/--method")
    files = list_images(src)
    dst.mkdir(parents=True, exist_ok=True)
    if not files:
        log.warning("no PNG/PGM/PPM images in %s; nothing to do", src)
    fixed = BteParams(
        sigma=1.0 if args.sigma is None else args.sigma,
        method=ThresholdMethod(args.method or "otsu"),
    )
    failures = 0
    with open(dst / "provenance.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROVENANCE_COLUMNS)
        for path in files:
            try:
                img = read_image(path)
            except (OSError, ValueError) as exc:
                log.error("%s: cannot read image (%s)", path, exc)
                failures += 1
                continue
            if args.random:
                edges, params = extract_bte_random(img, rng=derive_rng(args.seed, "cli-bte", path.name), return_params=True)
            else:
                edges, params = extract_bte(img, fixed), fixed
            out_name = path.stem + ".png"
            write_png(dst / out_name, edges.astype(np.float64))
            p = params.provenance()
            w.writerow([path.name, out_name] + [p[k] for k in PROVENANCE_COLUMNS[2:]])
    print(f"wrote {len(files) - failures} edge maps to {dst}")
    return EXIT_IO if failures else EXIT_OK


# -- augment ---------------------------------------------------------------------

def cmd_augment_list(args) -> int:
    for group, templates in registry().items():
        print(f"{group.value}:")
        for t in templates:
            params = ", ".join(f"{p.name}[{p.low:g}, {p.high:g}]" for p in t.params) or "-"
            print(f"  {t.name:22s} {params}")
    return EXIT_OK


def cmd_augment_preview(args) -> int:
    """Contact sheet: one row per group, ``samples`` random transforms per row."""
    try:
        img = read_image(args.inp)
    except (OSError, ValueError) as exc:
        log.error("%s: cannot read image (%s)", args.inp, exc)
        return EXIT_IO
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    groups = args.groups or ALL_GROUPS
    h, wd = img.shape[:2]
    pad = 2
    sheet = np.ones(((h + pad) * len(groups) + pad, (wd + pad) * (args.samples + 1) + pad, 3))
    for r, g in enumerate(groups):
        tiles = [img]
        for k in range(args.samples):
            rng = derive_rng(args.seed, "cli-preview", g.value, k)
            tiles.append(apply_extra(img, sample_spec(g, rng), rng))
        for c, tile in enumerate(tiles):
            y, x = pad + r * (h + pad), pad + c * (wd + pad)
            sheet[y:y + h, x:x + wd] = tile
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_png(args.out, sheet)
    print(f"wrote {args.out} ({len(groups)} groups x {args.samples} samples)")
    return EXIT_OK


# -- valset ----------------------------------------------------------------------

def cmd_valset(args) -> int:
    kind = args.kind.replace("-", "_")
    if kind != "standard" and args.groups is None:
        raise UsageError(f"--groups is required for --kind {args.kind} (e.g. --groups all)")
    try:
        val, _ = load_labeled_folder(args.inp)
    except ValsetError as exc:
        log.error("%s", exc)
        return EXIT_IO
    if kind == "standard":
        es = build_standard(val)
    elif kind == "augmented":
        es = build_augmented(val, args.groups, args.seed)
    else:
        es = build_augmented_small(val, args.groups, args.seed)
    out = save_evalset(es, args.out)
    print(f"wrote {len(es)} images to {out}")
    return EXIT_OK


# -- synth -----------------------------------------------------------------------

def cmd_synth(args) -> int:
    spec = SynthSpec(
        class_count=args.classes,
        image_size=args.size,
        per_class_train=args.train,
        per_class_val=args.val,
        per_class_test=args.test,
        texture_strength=args.texture,
        seed=args.seed,
    )
    out = Path(args.out)
    train, val = generate_source(spec)
    save_evalset(build_standard(train), out / "train")
    save_evalset(build_standard(val), out / "val")
    for shift in args.shifts:
        save_evalset(build_standard(generate_target(spec, shift)), out / f"test-{shift}")
    print(f"wrote train/val splits and {len(args.shifts)} target sets to {out} (<split>/standard/)")
    return EXIT_OK


# -- run -------------------------------------------------------------------------

def cmd_run(args) -> int:
    loaded = load_config(args.config)
    cfg = loaded.experiment
    if args.oracle:
        cfg = replace(cfg, oracle=True)
    out = args.out or loaded.out
    if out is None:
        raise UsageError("no output directory: pass --out or set [run] out")

    def progress(key, recs):
        log.info("done %s (%d records)", key, len(recs))

    result = run_experiment(cfg, out, resume=not args.fresh, progress=progress, config_path=args.config)
    if result.skipped_jobs:
        print(f"resumed: {result.skipped_jobs} grid point(s) already complete")
    for kind, (rho, n) in result.correlations.items():
        print(f"spearman[{kind}] = {rho:.4f} over {n} points")
    print((Path(out) / "selection.txt").read_text(), end="")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shiftcraft", description="Shape-biased validation tooling for single-source domain generalization.")
    p.add_argument("--version", action="version", version=f"shiftcraft {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    bte = sub.add_parser("bte", help="binary thin edge extraction")
    bsub = bte.add_subparsers(dest="action", parser_class=_Parser)
    ex = bsub.add_parser("extract", help="extract one edge map per input image")
    ex.add_argument("--in", dest="inp", required=True, help="input directory of PNG/PGM/PPM images")
    ex.add_argument("--out", required=True, help="output directory")
    ex.add_argument("--random", action="store_true", help="randomized extraction (training-style)")
    ex.add_argument("--seed", type=int, default=0, help="seed for --random")
    ex.add_argument("--sigma", type=float, help="blur sigma (default 1.0)")
    ex.add_argument("--method", choices=[m.value for m in ThresholdMethod], help="threshold method (default otsu)")
    ex.set_defaults(func=cmd_bte)

    aug = sub.add_parser("augment", help="augmentation registry")
    asub = aug.add_subparsers(dest="action", parser_class=_Parser)
    asub.add_parser("list", help="list groups, transforms and parameter ranges").set_defaults(func=cmd_augment_list)
    pv = asub.add_parser("preview", help="contact sheet of random transforms per group")
    pv.add_argument("--in", dest="inp", required=True, help="input image")
    pv.add_argument("--out", required=True, help="output PNG")
    pv.add_argument("--groups", type=_groups_arg, help="comma-separated groups or 'all' (default all)")
    pv.add_argument("--samples", type=int, default=6)
    pv.add_argument("--seed", type=int, default=0)
    pv.set_defaults(func=cmd_augment_preview)

    vs = sub.add_parser("valset", help="validation set construction")
    vsub = vs.add_subparsers(dest="action", parser_class=_Parser)
    vb = vsub.add_parser("build", help="build a validation set from a class-folder directory")
    vb.add_argument("--in", dest="inp", required=True, help="saved set (with manifest.csv) or one subdirectory of images per class")
    vb.add_argument("--out", required=True, help="output root; files go to OUT/<kind>/")
    vb.add_argument("--kind", required=True, choices=("standard", "augmented", "augmented-small"))
    vb.add_argument("--groups", type=_groups_arg, help="comma-separated groups or 'all' (required unless standard)")
    vb.add_argument("--seed", type=int, default=0)
    vb.set_defaults(func=cmd_valset)

    sy = sub.add_parser("synth", help="synthetic source/target data")
    ssub = sy.add_subparsers(dest="action", parser_class=_Parser)
    sg = ssub.add_parser("generate", help="write source splits and shifted targets as saved sets")
    sg.add_argument("--out", required=True)
    sg.add_argument("--seed", type=int, default=0)
    sg.add_argument("--classes", type=int, default=7)
    sg.add_argument("--size", type=int, default=32)
    sg.add_argument("--train", type=int, default=50, help="training images per class")
    sg.add_argument("--val", type=int, default=20, help="validation images per class")
    sg.add_argument("--test", type=int, default=20, help="target images per class and shift")
    sg.add_argument("--texture", type=float, default=0.8, help="texture strength in [0, 1]")
    sg.add_argument("--shifts", type=lambda s: [x.strip() for x in s.split(",")], default=["invert", "heavy_noise", "edge_only", "color_jitter"])
    sg.set_defaults(func=cmd_synth)

    rn = sub.add_parser("run", help="run an experiment grid from a config file")
    rn.add_argument("--config", required=True)
    rn.add_argument("--out", help="output directory (overrides [run] out)")
    rn.add_argument("--oracle", action="store_true", help="also report the oracle upper bound")
    rn.add_argument("--fresh", action="store_true", help="discard partial records instead of resuming")
    rn.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
        if not hasattr(args, "func"):
            raise UsageError(f"{parser.prog}: missing subcommand (see --help)")
        if getattr(args, "command", None) == "synth" and any(s not in SHIFTS for s in args.shifts):
            raise UsageError(f"--shifts must be drawn from {', '.join(SHIFTS)}")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ExperimentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValsetError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
