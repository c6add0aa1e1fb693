"""PSNR, SSIM and HFEN on real magnitude images."""
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidInputError, InvalidReferenceError, ShapeError

PSNR_CAP_DB = 99.0


def _pair(rec, ref):
    rec = np.asarray(rec, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if rec.shape != ref.shape:
        raise ShapeError(f"shape mismatch: {rec.shape} vs {ref.shape}")
    if rec.ndim != 2:
        raise InvalidInputError(f"metrics expect 2D images, got {rec.shape}")
    return rec, ref


def psnr(rec, ref):
    """``20 log10(max(ref) / rmse)``; ``inf`` for identical images."""
    rec, ref = _pair(rec, ref)
    peak = ref.max()
    if not peak > 0:
        raise InvalidReferenceError("reference peak must be positive")
    mse = np.mean((rec - ref) ** 2)
    if mse == 0:
        return math.inf
    return 20 * math.log10(peak / math.sqrt(mse))


def gaussian_window(size=11, std=1.5):
    c = np.arange(size) - (size - 1) / 2
    g = np.exp(-c ** 2 / (2 * std ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(rec, ref, data_range=None, symmetric=False, K1=0.01, K2=0.03, win_size=11, std=1.5):
    """Mean local SSIM with a Gaussian window.

    ``data_range`` defaults to ``max(ref) - min(ref)``; with ``symmetric=True``
    it is taken over both images so ``ssim(a, b) == ssim(b, a)``. Local
    statistics use population (not sample) covariance, and the mean skips a
    border of half a window, as in scikit-image.
    """
    rec, ref = _pair(rec, ref)
    if min(rec.shape) < win_size:
        raise InvalidInputError(f"images must be at least {win_size} pixels per side")
    if data_range is None:
        both = (rec, ref) if symmetric else (ref,)
        data_range = max(a.max() for a in both) - min(a.min() for a in both)
    if not data_range > 0:
        raise InvalidReferenceError("dynamic range is zero")
    w = gaussian_window(win_size, std)

    def filt(a):
        return ndimage.correlate(a, w, mode="reflect")

    mx, my = filt(rec), filt(ref)
    sxx = filt(rec * rec) - mx * mx
    syy = filt(ref * ref) - my * my
    sxy = filt(rec * ref) - mx * my
    C1 = (K1 * data_range) ** 2
    C2 = (K2 * data_range) ** 2
    smap = ((2 * mx * my + C1) * (2 * sxy + C2)) / ((mx * mx + my * my + C1) * (sxx + syy + C2))
    pad = (win_size - 1) // 2
    return float(smap[pad:-pad, pad:-pad].mean())


def log_kernel(size=15, std=1.5):
    """Laplacian-of-Gaussian kernel, shifted to sum to zero."""
    c = np.arange(size) - (size - 1) / 2
    xx, yy = np.meshgrid(c, c)
    r2 = xx ** 2 + yy ** 2
    h = np.exp(-r2 / (2 * std ** 2))
    h /= h.sum()
    h1 = h * (r2 - 2 * std ** 2) / std ** 4
    return h1 - h1.sum() / h1.size


def hfen(rec, ref, size=15, std=1.5):
    """``||LoG(rec - ref)|| / ||LoG(ref)||`` with reflective boundaries."""
    rec, ref = _pair(rec, ref)
    if min(rec.shape) < size:
        raise InvalidInputError(f"images must be at least {size} pixels per side")
    k = log_kernel(size, std)
    den = np.linalg.norm(ndimage.correlate(ref, k, mode="reflect"))
    # A constant reference leaves only rounding noise after the zero-sum kernel.
    if den <= 1e-12 * np.linalg.norm(ref):
        raise InvalidReferenceError("LoG of the reference is identically zero")
    return float(np.linalg.norm(ndimage.correlate(rec - ref, k, mode="reflect")) / den)


@dataclass(frozen=True)
class MetricReport:
    psnr: float
    ssim: float
    hfen: float
    peak: float

    def to_dict(self):
        p = self.psnr
        return {"psnr_db": PSNR_CAP_DB if math.isinf(p) else min(p, PSNR_CAP_DB),
                "ssim": self.ssim, "hfen": self.hfen, "peak": self.peak}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(d["psnr_db"], d["ssim"], d["hfen"], d["peak"])


def evaluate(rec, ref):
    rec, ref = _pair(rec, ref)
    return MetricReport(psnr(rec, ref), ssim(rec, ref), hfen(rec, ref), float(ref.max()))
