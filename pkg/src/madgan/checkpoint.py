"""Versioned binary checkpoint for trained models.

Layout (little endian): magic "MADGAN01", u32 format version, then
length-prefixed sections: the run-config snapshot as UTF-8 text, the
preprocessing state, both parameter stacks (each tensor as a shape header
plus raw float64 data), and the training log. Raw float64 bytes make the
round trip bit-exact.
"""

from __future__ import annotations

import struct
from io import BufferedReader, BufferedWriter

import numpy as np

from .config import RunConfig, config_from_text, config_to_text
from .dataset import NormalizationState, PcaState
from .gan import GanModel
from .lstm import LstmStackParams

MAGIC = b"MADGAN01"
VERSION = 1


class CheckpointError(RuntimeError):
    pass


def _write_bytes(fh: BufferedWriter, data: bytes) -> None:
    fh.write(struct.pack("<Q", len(data)))
    fh.write(data)


def _read_bytes(fh: BufferedReader) -> bytes:
    (n,) = struct.unpack("<Q", _read_exact(fh, 8))
    return _read_exact(fh, n)


def _read_exact(fh, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointError("truncated checkpoint file")
    return data


def _write_tensor(fh, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    fh.write(struct.pack("<I", arr.ndim))
    for d in arr.shape:
        fh.write(struct.pack("<Q", d))
    fh.write(arr.tobytes())


def _read_tensor(fh) -> np.ndarray:
    (ndim,) = struct.unpack("<I", _read_exact(fh, 4))
    shape = tuple(struct.unpack("<Q", _read_exact(fh, 8))[0] for _ in range(ndim))
    count = int(np.prod(shape)) if shape else 1
    data = np.frombuffer(_read_exact(fh, 8 * count), dtype="<f8").copy()
    return data.reshape(shape)


def _write_stack(fh, params: LstmStackParams) -> None:
    fh.write(struct.pack("<IIII", params.input_dim, params.hidden_dim,
                         params.depth, params.output_dim))
    tensors = params.tensors()
    fh.write(struct.pack("<I", len(tensors)))
    for t in tensors:
        _write_tensor(fh, t)


def _read_stack(fh) -> LstmStackParams:
    input_dim, hidden, depth, out_dim = struct.unpack("<IIII", _read_exact(fh, 16))
    (count,) = struct.unpack("<I", _read_exact(fh, 4))
    tensors = [_read_tensor(fh) for _ in range(count)]
    proto = LstmStackParams(input_dim, hidden, depth, out_dim)
    return proto.replace_tensors(tensors)


def save_checkpoint(path, model: GanModel, config: RunConfig) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        _write_bytes(fh, config_to_text(config).encode("utf-8"))
        fh.write(struct.pack("<III", model.latent_dim, model.s_w, model.s_s))
        if model.normalization is not None:
            fh.write(b"\x01")
            _write_tensor(fh, model.normalization.vmin)
            _write_tensor(fh, model.normalization.vmax)
        else:
            fh.write(b"\x00")
        if model.pca is not None:
            fh.write(b"\x01")
            _write_tensor(fh, model.pca.mean)
            _write_tensor(fh, model.pca.components)
            _write_tensor(fh, model.pca.variance_ratio)
        else:
            fh.write(b"\x00")
        _write_stack(fh, model.generator)
        _write_stack(fh, model.discriminator)
        log = np.array(model.training_log, dtype=np.float64).reshape(-1, 4) \
            if model.training_log else np.zeros((0, 4))
        _write_tensor(fh, log)


def load_checkpoint(path) -> tuple[GanModel, RunConfig]:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"{path}: not a model checkpoint (bad magic)")
        (version,) = struct.unpack("<I", _read_exact(fh, 4))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        config = config_from_text(_read_bytes(fh).decode("utf-8"))
        latent_dim, s_w, s_s = struct.unpack("<III", _read_exact(fh, 12))
        normalization = None
        if _read_exact(fh, 1) == b"\x01":
            normalization = NormalizationState(_read_tensor(fh), _read_tensor(fh))
        pca = None
        if _read_exact(fh, 1) == b"\x01":
            pca = PcaState(_read_tensor(fh), _read_tensor(fh), _read_tensor(fh))
        generator = _read_stack(fh)
        discriminator = _read_stack(fh)
        log_arr = _read_tensor(fh)
        log = [(int(r[0]), r[1], r[2], r[3]) for r in log_arr]
        model = GanModel(generator, discriminator, latent_dim, s_w, s_s,
                         normalization, pca, log)
    return model, config
