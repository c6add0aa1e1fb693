"""On-disk formats: complex grids (CIMG), bit masks (MASK), PNG previews.

All binary layouts are little-endian.

CIMG::

    b"CIMG"  u32 version  u32 rows  u32 cols  u32 ncoils
    ncoils x rows x cols x (f32 re, f32 im), row-major per coil

MASK::

    b"MASK"  u32 rows  u32 cols  u32 reserved(0)
    ceil(rows * cols / 8) bytes, row-major bits, least-significant bit first
"""
import struct

import numpy as np
from PIL import Image

from .errors import FileFormatError
from .sampling import SamplingMask

CIMG_MAGIC = b"CIMG"
CIMG_VERSION = 1
CIMG_HEADER = struct.Struct("<4sIIII")
MASK_MAGIC = b"MASK"
MASK_HEADER = struct.Struct("<4sIII")


def encode_cimg(coils):
    coils = np.asarray(coils)
    if coils.ndim == 2:
        coils = coils[None]
    if coils.ndim != 3:
        raise FileFormatError(f"CIMG payload must be (ncoils, rows, cols), got {coils.shape}")
    n, rows, cols = coils.shape
    inter = np.empty((n, rows, cols, 2), dtype="<f4")
    inter[..., 0] = coils.real
    inter[..., 1] = coils.imag if np.iscomplexobj(coils) else 0.0
    return CIMG_HEADER.pack(CIMG_MAGIC, CIMG_VERSION, rows, cols, n) + inter.tobytes()


def decode_cimg(data):
    if len(data) < CIMG_HEADER.size:
        raise FileFormatError("CIMG file shorter than its header")
    magic, version, rows, cols, n = CIMG_HEADER.unpack_from(data)
    if magic != CIMG_MAGIC:
        raise FileFormatError(f"bad CIMG magic {magic!r}")
    if version != CIMG_VERSION:
        raise FileFormatError(f"unsupported CIMG version {version}")
    expected = n * rows * cols * 8
    payload = data[CIMG_HEADER.size:]
    if len(payload) != expected:
        raise FileFormatError(f"CIMG payload is {len(payload)} bytes, header implies {expected}")
    arr = np.frombuffer(payload, dtype="<f4").reshape(n, rows, cols, 2).astype(np.float64)
    return arr[..., 0] + 1j * arr[..., 1]


def cimg_header(path):
    with open(path, "rb") as fh:
        head = fh.read(CIMG_HEADER.size)
    if len(head) < CIMG_HEADER.size:
        raise FileFormatError(f"{path}: truncated CIMG header")
    magic, version, rows, cols, n = CIMG_HEADER.unpack(head)
    return {"magic": magic, "version": version, "rows": rows, "cols": cols, "ncoils": n}


def write_cimg(path, coils):
    with open(path, "wb") as fh:
        fh.write(encode_cimg(coils))


def read_cimg(path):
    with open(path, "rb") as fh:
        return decode_cimg(fh.read())


def encode_mask(mask):
    bits = np.asarray(getattr(mask, "bits", mask), dtype=bool)
    rows, cols = bits.shape
    packed = np.packbits(bits.ravel(), bitorder="little")
    return MASK_HEADER.pack(MASK_MAGIC, rows, cols, 0) + packed.tobytes()


def decode_mask(data, target_R=None, seed=None):
    if len(data) < MASK_HEADER.size:
        raise FileFormatError("MASK file shorter than its header")
    magic, rows, cols, _ = MASK_HEADER.unpack_from(data)
    if magic != MASK_MAGIC:
        raise FileFormatError(f"bad MASK magic {magic!r}")
    n_bytes = (rows * cols + 7) // 8
    payload = data[MASK_HEADER.size:]
    if len(payload) != n_bytes:
        raise FileFormatError(f"MASK payload is {len(payload)} bytes, expected {n_bytes}")
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")
    return SamplingMask(bits[:rows * cols].reshape(rows, cols).astype(bool), target_R, seed)


def write_mask(path, mask):
    with open(path, "wb") as fh:
        fh.write(encode_mask(mask))


def read_mask(path, target_R=None, seed=None):
    with open(path, "rb") as fh:
        return decode_mask(fh.read(), target_R, seed)


def to_uint8(img):
    """Min-max normalize a magnitude image to 0..255 (inspection only)."""
    img = np.abs(np.asarray(img, dtype=np.complex128)) if np.iscomplexobj(img) else np.asarray(img, float)
    lo, hi = float(img.min()), float(img.max())
    if hi > lo:
        img = (img - lo) / (hi - lo)
    else:
        img = np.ones_like(img) if hi > 0 else np.zeros_like(img)
    return np.round(255 * img).astype(np.uint8)


def write_png(path, img):
    Image.fromarray(to_uint8(img), mode="L").save(path, format="PNG")


def write_mask_png(path, mask):
    bits = np.asarray(getattr(mask, "bits", mask), dtype=bool)
    Image.fromarray(np.where(bits, 255, 0).astype(np.uint8), mode="L").save(path, format="PNG")


def read_png(path):
    """Grayscale PNG scaled to [0, 1]."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.float64) / 255.0
