"""Flat-binary parameter snapshots: magic, JSON metadata header, raw values."""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import ConfigurationError

_MAGIC = b"SEEPARMS"
_VERSION = 1


def save_params(path, params: np.ndarray, metadata: dict) -> None:
    """Write a flat parameter vector with a self-describing header."""
    params = np.asarray(params)
    header = dict(metadata)
    header["dtype"] = params.dtype.name
    header["param_count"] = int(params.size)
    header["layout"] = "layer-major, weights (row-major) then bias per layer"
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<II", _VERSION, len(blob)))
        f.write(blob)
        f.write(np.ascontiguousarray(params).tobytes())


def load_params(path) -> tuple[np.ndarray, dict]:
    """Read back (params, metadata) written by save_params."""
    with open(path, "rb") as f:
        if f.read(len(_MAGIC)) != _MAGIC:
            raise ConfigurationError(f"{path}: not a parameter snapshot file")
        version, blob_len = struct.unpack("<II", f.read(8))
        if version != _VERSION:
            raise ConfigurationError(f"{path}: unsupported snapshot version {version}")
        header = json.loads(f.read(blob_len).decode())
        params = np.frombuffer(f.read(), dtype=np.dtype(header["dtype"])).copy()
    if params.size != header["param_count"]:
        raise ConfigurationError(
            f"{path}: expected {header['param_count']} parameters, file holds {params.size}"
        )
    return params, header
