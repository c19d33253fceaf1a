"""Little-endian binary checkpoints.

Layout::

    magic        4 bytes  b"SCMD"
    version      u32      1
    arch tag     u32      0 = linear, 1 = mlp
    class_count  u32
    input ndim   u32, then ndim x u32 dims
    n_arrays     u32, then per array: ndim u32, ndim x u64 dims
    payload      every array in order, row-major float64
"""

from __future__ import annotations

import struct

import numpy as np

from .model import Model

MAGIC = b"SCMD"
VERSION = 1
_ARCH_TAGS = {"linear": 0, "mlp": 1}


class CheckpointError(ValueError):
    pass


def dumps(model: Model) -> bytes:
    parts = [MAGIC, struct.pack("<III", VERSION, _ARCH_TAGS[model.architecture], model.class_count)]
    parts.append(struct.pack("<I", len(model.input_shape)) + struct.pack(f"<{len(model.input_shape)}I", *model.input_shape))
    parts.append(struct.pack("<I", len(model.params)))
    for p in model.params:
        parts.append(struct.pack("<I", p.ndim) + struct.pack(f"<{p.ndim}Q", *p.shape))
    for p in model.params:
        parts.append(np.ascontiguousarray(p, dtype="<f8").tobytes())
    return b"".join(parts)


def loads(buf: bytes) -> Model:
    if buf[:4] != MAGIC:
        raise CheckpointError("not a shiftcraft checkpoint")
    off = 4
    version, arch_tag, class_count = struct.unpack_from("<III", buf, off)
    off += 12
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    arch = {v: k for k, v in _ARCH_TAGS.items()}.get(arch_tag)
    if arch is None:
        raise CheckpointError(f"unknown architecture tag {arch_tag}")
    (ndim,) = struct.unpack_from("<I", buf, off)
    off += 4
    input_shape = struct.unpack_from(f"<{ndim}I", buf, off)
    off += 4 * ndim
    (n_arrays,) = struct.unpack_from("<I", buf, off)
    off += 4
    shapes = []
    for _ in range(n_arrays):
        (nd,) = struct.unpack_from("<I", buf, off)
        off += 4
        shapes.append(struct.unpack_from(f"<{nd}Q", buf, off))
        off += 8 * nd
    params = []
    for s in shapes:
        count = int(np.prod(s))
        params.append(np.frombuffer(buf, dtype="<f8", count=count, offset=off).astype(np.float64).reshape(s))
        off += 8 * count
    if off != len(buf):
        raise CheckpointError("trailing bytes in checkpoint")
    return Model(arch, tuple(input_shape), class_count, params)


def save_model(model: Model, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(model))


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        return loads(fh.read())
