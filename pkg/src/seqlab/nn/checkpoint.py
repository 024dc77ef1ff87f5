"""Flat binary container for named parameter tensors.

Layout (all integers little-endian):

    magic   4 bytes  b"SQLB"
    version u32      currently 1
    count   u32      number of tensors
    then per tensor:
        name_len u16, name utf-8 bytes
        ndim     u8,  dims u32 * ndim
        data     float64 little-endian, C order

See docs/checkpoint-format.md for the normative description.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import InvalidInputError, ParseError
from .params import Parameter

MAGIC = b"SQLB"
VERSION = 1


def save_params(path: str, params: list[Parameter]) -> None:
    names = [p.name for p in params]
    if len(set(names)) != len(names):
        raise InvalidInputError("duplicate parameter names in checkpoint")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(params)))
        for p in params:
            name = p.name.encode("utf-8")
            fh.write(struct.pack("<H", len(name)))
            fh.write(name)
            shape = p.value.shape
            fh.write(struct.pack("<B", len(shape)))
            for d in shape:
                fh.write(struct.pack("<I", d))
            fh.write(np.ascontiguousarray(p.value, dtype="<f8").tobytes())


def load_params(path: str) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ParseError(f"{path}: not a parameter checkpoint")
        version, count = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ParseError(f"{path}: unsupported checkpoint version {version}")
        out: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
            n_items = int(np.prod(shape)) if shape else 1
            raw = fh.read(8 * n_items)
            if len(raw) != 8 * n_items:
                raise ParseError(f"{path}: truncated tensor {name!r}")
            out[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
        return out


def restore_params(params: list[Parameter], loaded: dict[str, np.ndarray]) -> None:
    """Copy loaded tensors into matching parameters (strict names/shapes)."""
    for p in params:
        if p.name not in loaded:
            raise InvalidInputError(f"checkpoint missing parameter {p.name!r}")
        src = loaded[p.name]
        if src.shape != p.value.shape:
            raise InvalidInputError(
                f"shape mismatch for {p.name!r}: {src.shape} vs {p.value.shape}"
            )
        p.value[...] = src
