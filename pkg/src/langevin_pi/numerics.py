"""Centered orthonormal 2D FFTs, masking and coil combination.

Images are plain numpy arrays: a single image is ``(rows, cols)`` complex,
a coil set is ``(J, rows, cols)``. Transforms act on the last two axes, so
coil stacks can be passed directly.

k-space is always stored centered: the DC sample sits at
``(rows // 2, cols // 2)``, which holds for odd sizes as well.
"""
import numpy as np

from .errors import InvalidInputError, ShapeError


def _check_grid(x, name="input"):
    x = np.asarray(x)
    if x.ndim < 2:
        raise InvalidInputError(f"{name} must be at least 2D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return x


def as_coilset(coils):
    """Stack a coil list (or pass through a 3D array) into ``(J, rows, cols)``."""
    if isinstance(coils, (list, tuple)):
        if len(coils) == 0:
            raise InvalidInputError("coil set is empty")
        shapes = {np.shape(c) for c in coils}
        if len(shapes) != 1:
            raise ShapeError(f"coil images differ in shape: {sorted(shapes)}")
        coils = np.stack(coils)
    coils = np.asarray(coils)
    if coils.ndim == 2:
        coils = coils[None]
    if coils.ndim != 3:
        raise ShapeError(f"coil set must be (J, rows, cols), got {coils.shape}")
    if coils.shape[0] == 0:
        raise InvalidInputError("coil set is empty")
    return coils


def fft2c(img):
    """Orthonormal 2D DFT with centered (fft-shifted) output.

    ``ifftshift`` before and ``fftshift`` after keeps the image origin and the
    DC sample at index ``n // 2`` for both even and odd ``n``.
    """
    img = _check_grid(img, "image")
    axes = (-2, -1)
    tmp = np.fft.ifftshift(img, axes=axes)
    tmp = np.fft.fft2(tmp, axes=axes, norm="ortho")
    return np.fft.fftshift(tmp, axes=axes)


def ifft2c(ksp):
    """Inverse of :func:`fft2c` (also its adjoint)."""
    ksp = _check_grid(ksp, "k-space")
    axes = (-2, -1)
    tmp = np.fft.ifftshift(ksp, axes=axes)
    tmp = np.fft.ifft2(tmp, axes=axes, norm="ortho")
    return np.fft.fftshift(tmp, axes=axes)


def apply_mask(ksp, mask):
    """Zero k-space outside the mask support.

    ``mask`` may be a :class:`~langevin_pi.sampling.SamplingMask` or a boolean
    grid. Sampled entries are copied unchanged.
    """
    bits = getattr(mask, "bits", mask)
    bits = np.asarray(bits, dtype=bool)
    ksp = np.asarray(ksp)
    if ksp.shape[-2:] != bits.shape:
        raise ShapeError(f"k-space {ksp.shape[-2:]} does not match mask {bits.shape}")
    return np.where(bits, ksp, np.zeros((), dtype=ksp.dtype))


def sos_combine(coils):
    """Root sum-of-squares over the coil axis."""
    coils = as_coilset(coils)
    return np.sqrt(np.sum(np.abs(coils) ** 2, axis=0))


def center_index(shape):
    return shape[-2] // 2, shape[-1] // 2
