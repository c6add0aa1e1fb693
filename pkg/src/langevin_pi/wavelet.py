"""Single-level undecimated Haar transform with circular boundaries.

Analysis along one axis uses ``low[n] = (x[n] + x[n+1]) / 2`` and
``high[n] = (x[n] - x[n+1]) / 2``. With this scaling the four-band analysis
operator ``A`` is a tight frame, ``A^T A = I``, so the synthesis below (the
adjoint) is an exact left inverse and the subband energy equals the image
energy.

Subband names are ``<row filter><column filter>``: the first letter is the
filter applied along each row (last axis), the second along each column.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ShapeError

SUBBANDS = ("ll", "lh", "hl", "hh")
N_CHANNELS = 8


@dataclass(frozen=True)
class WaveletTensor:
    """Four same-size complex subbands; leading batch axes are allowed."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def __post_init__(self):
        shapes = {b.shape for b in self.bands()}
        if len(shapes) != 1:
            raise ShapeError(f"subband shapes differ: {sorted(shapes)}")

    @property
    def shape(self):
        return self.ll.shape

    def bands(self):
        return (self.ll, self.lh, self.hl, self.hh)

    def channels(self):
        """Real view ``(..., 8, rows, cols)`` ordered ll.re, ll.im, lh.re, ..."""
        parts = []
        for b in self.bands():
            parts.extend((b.real, b.imag))
        return np.stack(parts, axis=-3)

    @classmethod
    def from_channels(cls, arr):
        arr = np.asarray(arr)
        if arr.ndim < 3 or arr.shape[-3] != N_CHANNELS:
            raise ShapeError(f"expected (..., 8, rows, cols), got {arr.shape}")
        bands = [arr[..., 2 * k, :, :] + 1j * arr[..., 2 * k + 1, :, :]
                 for k in range(4)]
        return cls(*bands)

    def __add__(self, other):
        return WaveletTensor(*(a + b for a, b in zip(self.bands(), other.bands())))

    def __mul__(self, c):
        return WaveletTensor(*(c * b for b in self.bands()))

    __rmul__ = __mul__


def _lo(x, axis):
    return 0.5 * (x + np.roll(x, -1, axis=axis))


def _hi(x, axis):
    return 0.5 * (x - np.roll(x, -1, axis=axis))


def _lo_adj(c, axis):
    return 0.5 * (c + np.roll(c, 1, axis=axis))


def _hi_adj(c, axis):
    return 0.5 * (c - np.roll(c, 1, axis=axis))


def forward_uwt(img):
    img = np.asarray(img)
    if img.ndim < 2 or min(img.shape[-2:]) < 2:
        raise InvalidInputError(f"image must be at least 2x2, got {img.shape}")
    if not np.all(np.isfinite(img)):
        raise InvalidInputError("image contains non-finite values")
    img = img.astype(np.complex128, copy=False)
    lo_r, hi_r = _lo(img, -1), _hi(img, -1)
    return WaveletTensor(
        ll=_lo(lo_r, -2),
        lh=_hi(lo_r, -2),
        hl=_lo(hi_r, -2),
        hh=_hi(hi_r, -2),
    )


def inverse_uwt(tensor):
    """Adjoint synthesis; identity on the range of :func:`forward_uwt`.

    For tensors outside the range this returns the least-squares image,
    i.e. the off-range component is discarded.
    """
    if not isinstance(tensor, WaveletTensor):
        tensor = WaveletTensor.from_channels(tensor)
    lo_r = _lo_adj(tensor.ll, -2) + _hi_adj(tensor.lh, -2)
    hi_r = _lo_adj(tensor.hl, -2) + _hi_adj(tensor.hh, -2)
    return _lo_adj(lo_r, -1) + _hi_adj(hi_r, -1)


def to_channels(img):
    """Shortcut: image (or coil stack) to its 8-channel real wavelet tensor."""
    return forward_uwt(img).channels()


def from_channels(arr):
    return inverse_uwt(WaveletTensor.from_channels(arr))
