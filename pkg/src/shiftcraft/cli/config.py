"""Experiment configuration files.

Grammar (one statement per line)::

    file     := { line }
    line     := blank | comment | section | entry
    comment  := ws* "#" any*
    section  := ws* "[" name "]" ws*
    entry    := ws* key ws* "=" ws* value ws* [ "#" any* ]
    value    := scalar | scalar { "," scalar }

Keys are only valid inside their section; unknown sections or keys,
duplicates and malformed values are errors reported with 1-based line and
column. List values are comma separated. ``lrs = grid`` / ``grid-reduced``,
``lambdas = grid`` and ``ws = grid`` expand to the standard search grids.
Booleans are ``true``/``false``; an empty value means "default".

Example::

    [data]
    source = synth
    texture_strength = 0.8
    targets = invert, heavy_noise, edge_only, color_jitter

    [train]
    variants = I, S, IS
    lrs = 0.03, 0.1
    lambdas = 0.5, 1.0
    epochs = 20

    [eval]
    val_kinds = standard, augmented
    ws = 0.25, 0.5, 0.75

    [run]
    seed = 0
    out = results/run0
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable

from ..protocol.experiment import ExperimentConfig, ExperimentError
from ..protocol.grids import grid_lambda, grid_lr, grid_w
from ..synthdata import SHIFTS
from ..trainer import VARIANTS
from ..trainer.model import ARCHITECTURES


class ConfigError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0, path: str | None = None):
        self.message, self.line, self.column, self.path = message, line, column, path
        where = f"{path or '<config>'}:{line}:{column}: " if line else ""
        super().__init__(where + message)


def _int(text: str) -> int:
    return int(text)


def _opt_int(text: str):
    return None if text.lower() in ("", "none") else int(text)


def _float(text: str) -> float:
    return float(text)


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _str(text: str) -> str:
    if not text:
        raise ValueError("empty value")
    return text


def _items(text: str) -> list[str]:
    parts = [p.strip() for p in text.split(",")]
    if any(not p for p in parts):
        raise ValueError("empty list element")
    return parts


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(_items(text))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in _items(text))


def _grid_or(grid: Callable, reduced: Callable | None = None) -> Callable:
    def parse(text: str):
        t = text.lower()
        if t == "grid":
            return tuple(float(x) for x in grid())
        if t == "grid-reduced" and reduced is not None:
            return tuple(float(x) for x in reduced())
        return _float_list(text)

    return parse


def _kinds(text: str) -> tuple[str, ...]:
    kinds = tuple(k.replace("-", "_") for k in _items(text))
    for k in kinds:
        if k not in ("standard", "augmented", "augmented_small"):
            raise ValueError(f"unknown validation kind {k!r}; expected standard, augmented or augmented-small")
    return kinds


def _choices(options, many: bool = False) -> Callable:
    def parse(text: str):
        got = _items(text) if many else [_str(text)]
        for g in got:
            if g not in options:
                raise ValueError(f"{g!r} is not one of {', '.join(options)}")
        return tuple(got) if many else got[0]

    return parse


# section -> key -> (ExperimentConfig field or "out", parser)
SCHEMA: dict[str, dict[str, tuple[str, Callable]]] = {
    "data": {
        "source": ("source", _choices(("synth", "folder"))),
        "class_count": ("class_count", _int),
        "image_size": ("image_size", _int),
        "per_class_train": ("per_class_train", _int),
        "per_class_val": ("per_class_val", _int),
        "per_class_test": ("per_class_test", _int),
        "texture_strength": ("texture_strength", _float),
        "targets": ("targets", _choices(SHIFTS, many=True)),
        "train_dir": ("train_dir", _str),
        "val_dir": ("val_dir", _str),
        "test_dirs": ("test_dirs", _str_list),
    },
    "train": {
        "variants": ("variants", _choices(VARIANTS, many=True)),
        "lrs": ("lrs", _grid_or(grid_lr, lambda: grid_lr(reduced=True))),
        "lambdas": ("lambdas", _grid_or(grid_lambda)),
        "replicates": ("replicates", _int),
        "epochs": ("epochs", _int),
        "batch_images": ("batch_images", _int),
        "batch_btes": ("batch_btes", _opt_int),
        "architecture": ("architecture", _choices(ARCHITECTURES)),
        "hidden": ("hidden", _int),
        "extra_prob": ("extra_prob", _float),
    },
    "eval": {
        "val_kinds": ("val_kinds", _kinds),
        "ws": ("ws", _grid_or(grid_w)),
        "oracle": ("oracle", _bool),
        "split_seed": ("split_seed", _opt_int),
    },
    "run": {
        "seed": ("seed", _int),
        "workers": ("workers", _opt_int),
        "out": ("out", _str),
    },
}

_FIELDS = {f.name for f in fields(ExperimentConfig)}


@dataclass
class LoadedConfig:
    experiment: ExperimentConfig
    out: str | None
    path: str | None
    text: str


def parse_config(text: str, path: str | None = None) -> LoadedConfig:
    """Parse config text; every error carries line and column."""
    values: dict = {}
    seen: dict[tuple[str, str], int] = {}
    out = None
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        indent = len(raw) - len(raw.lstrip())
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, indent + 1, path)
            name = stripped[1:-1].strip()
            if name not in SCHEMA:
                raise ConfigError(f"unknown section [{name}]; expected one of {sorted(SCHEMA)}", lineno, indent + 2, path)
            section = name
            continue
        eq = raw.find("=")
        if eq < 0:
            raise ConfigError("expected 'key = value'", lineno, indent + 1, path)
        key = raw[:eq].strip()
        if not key:
            raise ConfigError("missing key before '='", lineno, indent + 1, path)
        if section is None:
            raise ConfigError(f"key {key!r} appears before any [section]", lineno, indent + 1, path)
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]; expected one of {sorted(SCHEMA[section])}", lineno, indent + 1, path)
        if (section, key) in seen:
            raise ConfigError(f"duplicate key {key!r} (first set on line {seen[(section, key)]})", lineno, indent + 1, path)
        seen[(section, key)] = lineno
        value_part = raw[eq + 1:]
        hash_at = value_part.find("#")
        if hash_at >= 0:
            value_part = value_part[:hash_at]
        value = value_part.strip()
        vcol = eq + 2 + (len(value_part) - len(value_part.lstrip()))
        target, parser = SCHEMA[section][key]
        if value == "":
            continue
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno, vcol, path) from None
        if target == "out":
            out = parsed
        else:
            values[target] = parsed
    assert set(values) <= _FIELDS
    try:
        cfg = ExperimentConfig(**values)
    except ExperimentError as exc:
        raise ConfigError(str(exc), 0, 0, path) from None
    return LoadedConfig(cfg, out, path, text)


def load_config(path) -> LoadedConfig:
    """Read and parse a config file (OSError propagates for I/O failures)."""
    text = Path(path).read_text()
    return parse_config(text, str(path))
