"""Binary checkpoint format (little-endian).

::

    b"UGMP"  u32 version  u32 n_layers
    n_layers x (u32 in_ch, u32 out_ch, u32 kernel, u32 dilation, u32 relu, u32 kind)
    per layer: weight (out, in, k, k) f32, then bias (out,) f32
    u32 n_levels, n_levels x f64 sigma, f64 epsilon
    u32 n_bytes, UTF-8 JSON metadata
"""
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import CheckpointError, CheckpointMagicError, CheckpointTruncatedError, CheckpointVersionError
from .models import ConvScoreNet, LayerSpec
from .schedule import NoiseSchedule

MAGIC = b"UGMP"
VERSION = 1
HEADER_BYTES = 12
LAYER_RECORD_BYTES = 24


@dataclass
class Checkpoint:
    layers: list
    weights: list
    schedule: NoiseSchedule
    metadata: dict = field(default_factory=dict)
    version: int = VERSION

    def to_model(self, clamp=False):
        s = self.schedule.sigmas
        return ConvScoreNet(self.layers, self.weights, sigma_range=(s[-1], s[0]), clamp=clamp)

    @property
    def loss_history(self):
        return self.metadata.get("loss_history", [])

    def to_bytes(self):
        out = bytearray()
        out += MAGIC + struct.pack("<II", self.version, len(self.layers))
        for spec in self.layers:
            out += struct.pack("<6I", spec.in_ch, spec.out_ch, spec.kernel, spec.dilation,
                               int(spec.relu), spec.kind)
        for w, b in self.weights:
            out += np.asarray(w, dtype="<f4").tobytes()
            out += np.asarray(b, dtype="<f4").tobytes()
        sig = self.schedule.sigmas
        out += struct.pack(f"<I{len(sig)}dd", len(sig), *sig, self.schedule.epsilon)
        meta = json.dumps(self.metadata, sort_keys=True).encode("utf-8")
        out += struct.pack("<I", len(meta)) + meta
        return bytes(out)

    @classmethod
    def from_bytes(cls, data):
        reader = _Reader(data)
        magic = reader.take(4)
        if magic != MAGIC:
            raise CheckpointMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version, n_layers = reader.unpack("<II")
        if version != VERSION:
            raise CheckpointVersionError(f"checkpoint version {version}, this build reads {VERSION}")
        layers = []
        for _ in range(n_layers):
            i, o, k, d, relu, kind = reader.unpack("<6I")
            layers.append(LayerSpec(i, o, k, d, bool(relu), kind))
        weights = []
        for spec in layers:
            n_w = spec.out_ch * spec.in_ch * spec.kernel ** 2
            w = np.frombuffer(reader.take(4 * n_w), dtype="<f4").astype(np.float32)
            b = np.frombuffer(reader.take(4 * spec.out_ch), dtype="<f4").astype(np.float32)
            weights.append((w.reshape(spec.out_ch, spec.in_ch, spec.kernel, spec.kernel), b))
        (n_levels,) = reader.unpack("<I")
        vals = reader.unpack(f"<{n_levels}dd")
        schedule = NoiseSchedule(tuple(vals[:-1]), vals[-1])
        (n_meta,) = reader.unpack("<I")
        try:
            metadata = json.loads(reader.take(n_meta).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"corrupt metadata block: {exc}") from None
        if reader.remaining:
            raise CheckpointError(f"{reader.remaining} trailing bytes after metadata")
        return cls(layers, weights, schedule, metadata, version)


class _Reader:
    def __init__(self, data):
        self.data = memoryview(data)
        self.pos = 0

    @property
    def remaining(self):
        return len(self.data) - self.pos

    def take(self, n):
        if self.pos + n > len(self.data):
            raise CheckpointTruncatedError(
                f"file truncated: need {n} bytes at offset {self.pos}, have {self.remaining}")
        chunk = bytes(self.data[self.pos:self.pos + n])
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def save_checkpoint(ckpt, path):
    with open(path, "wb") as fh:
        fh.write(ckpt.to_bytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        return Checkpoint.from_bytes(fh.read())
