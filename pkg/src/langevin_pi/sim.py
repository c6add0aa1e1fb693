"""Synthetic multi-coil acquisitions: phantom, coil sensitivities, k-space."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ShapeError
from .numerics import apply_mask, fft2c, ifft2c, sos_combine

# Modified Shepp-Logan (Toft): intensity, semi-axis a (x), semi-axis b (y),
# center x0, center y0, rotation in degrees.
SHEPP_LOGAN_ELLIPSES = np.array([
    [1.0, 0.6900, 0.9200, 0.00, 0.0000, 0.0],
    [-0.8, 0.6624, 0.8740, 0.00, -0.0184, 0.0],
    [-0.2, 0.1100, 0.3100, 0.22, 0.0000, -18.0],
    [-0.2, 0.1600, 0.4100, -0.22, 0.0000, 18.0],
    [0.1, 0.2100, 0.2500, 0.00, 0.3500, 0.0],
    [0.1, 0.0460, 0.0460, 0.00, 0.1000, 0.0],
    [0.1, 0.0460, 0.0460, 0.00, -0.1000, 0.0],
    [0.1, 0.0460, 0.0230, -0.08, -0.6050, 0.0],
    [0.1, 0.0230, 0.0230, 0.00, -0.6060, 0.0],
    [0.1, 0.0230, 0.0460, 0.06, -0.6050, 0.0],
])


def pixel_coordinates(n):
    """Pixel-center coordinates on [-1, 1]; y points up (row 0 is the top)."""
    c = (np.arange(n) - (n - 1) / 2) / (n / 2)
    x = np.broadcast_to(c[None, :], (n, n))
    y = np.broadcast_to(-c[:, None], (n, n))
    return x, y


def rasterize_ellipses(n, ellipses):
    x, y = pixel_coordinates(n)
    img = np.zeros((n, n))
    for A, a, b, x0, y0, phi in ellipses:
        t = np.deg2rad(phi)
        dx, dy = x - x0, y - y0
        u = dx * np.cos(t) + dy * np.sin(t)
        v = -dx * np.sin(t) + dy * np.cos(t)
        img[(u / a) ** 2 + (v / b) ** 2 <= 1.0] += A
    return np.clip(img, 0.0, 1.0)


def shepp_logan(n):
    """Modified Shepp-Logan phantom on an ``n x n`` grid, values in [0, 1]."""
    if int(n) != n or n < 16:
        raise InvalidInputError(f"phantom size must be an integer >= 16, got {n}")
    return rasterize_ellipses(int(n), SHEPP_LOGAN_ELLIPSES)


def random_phantom(n, rng):
    """Shepp-Logan variant with jittered geometry and contrasts.

    Used to build training sets; ``rng`` is a numpy Generator.
    """
    e = SHEPP_LOGAN_ELLIPSES.copy()
    k = len(e)
    e[:, 1:3] *= rng.uniform(0.8, 1.15, size=(k, 2))
    e[:, 3:5] += rng.uniform(-0.06, 0.06, size=(k, 2))
    e[:, 5] += rng.uniform(-20, 20, size=k)
    e[0, 0] = 1.0
    e[1, 0] = -rng.uniform(0.5, 0.9)
    e[2:4, 0] = -rng.uniform(0.05, 0.3, size=2)
    e[4:, 0] = rng.uniform(0.05, 0.4, size=k - 4)
    # keep the inner ellipses inside the skull
    e[1, 1:3] = np.minimum(e[1, 1:3], 0.96 * e[0, 1:3])
    extra = []
    for _ in range(rng.integers(0, 5)):
        extra.append([rng.uniform(-0.3, 0.4), *rng.uniform(0.03, 0.15, size=2),
                      *rng.uniform(-0.4, 0.4, size=2), rng.uniform(0, 180)])
    if extra:
        e = np.vstack([e, extra])
    return rng.uniform(0.6, 1.0) * rasterize_ellipses(n, e)


@dataclass(frozen=True)
class SensitivityMaps:
    maps: np.ndarray  # (J, n, n) complex
    normalized: bool = True

    @property
    def n_coils(self):
        return self.maps.shape[0]


def make_sensitivities(n, J, seed, width=0.6, phase_slope=0.5):
    """Smooth complex coil maps normalized so ``sum_j |s_j|^2 == 1``.

    Each coil is a Gaussian magnitude bump centered on the FOV edge at an
    equally spaced angle (with small seeded jitter), times a random global
    phase and a mild linear phase ramp of at most ``phase_slope`` rad per unit
    normalized coordinate.
    """
    if J < 1:
        raise InvalidInputError(f"coil count must be >= 1, got {J}")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    x, y = pixel_coordinates(n)
    maps = np.empty((J, n, n), dtype=np.complex128)
    for j in range(J):
        theta = 2 * np.pi * j / J + rng.uniform(-0.1, 0.1)
        cx, cy = np.cos(theta), np.sin(theta)
        mag = np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * width ** 2))
        kx, ky = rng.uniform(-phase_slope, phase_slope, size=2)
        phase = rng.uniform(0, 2 * np.pi) + kx * x + ky * y
        maps[j] = mag * np.exp(1j * phase)
    maps /= np.sqrt(np.sum(np.abs(maps) ** 2, axis=0))
    return SensitivityMaps(maps, normalized=True)


@dataclass(frozen=True)
class AcquisitionRecord:
    y: np.ndarray  # (J, rows, cols) masked centered k-space
    mask: object  # SamplingMask
    noise_std: float
    seed: int
    scale: float = 1.0
    ground_truth: np.ndarray | None = None

    @property
    def n_coils(self):
        return self.y.shape[0]

    @property
    def shape(self):
        return self.y.shape[-2:]


def intensity_scale(y):
    """Factor that brings the zero-filled SOS image to a peak of 1."""
    peak = float(sos_combine(ifft2c(y)).max())
    return 1.0 / peak if peak > 0 else 1.0


def acquire(x, sens, mask, noise_std=0.0, seed=0):
    """Masked noisy multi-coil k-space ``y_j = M (F (s_j x) + eta_j)``.

    ``eta`` is complex white Gaussian with ``noise_std`` per real component.
    The ground truth stored with the record is the SOS of the noiseless coil
    images, i.e. ``|x|`` for normalized maps.
    """
    if noise_std < 0:
        raise InvalidInputError(f"noise_std must be >= 0, got {noise_std}")
    x = np.asarray(x)
    maps = getattr(sens, "maps", sens)
    bits = getattr(mask, "bits", mask)
    if x.shape != maps.shape[-2:] or x.shape != bits.shape:
        raise ShapeError(
            f"image {x.shape}, maps {maps.shape[-2:]} and mask {bits.shape} must agree")
    coils = maps * x
    k = fft2c(coils)
    if noise_std > 0:
        rng = np.random.Generator(np.random.PCG64(int(seed)))
        k = k + noise_std * (rng.standard_normal(k.shape) + 1j * rng.standard_normal(k.shape))
    y = apply_mask(k, mask)
    return AcquisitionRecord(y=y, mask=mask, noise_std=float(noise_std), seed=int(seed),
                             scale=intensity_scale(y), ground_truth=sos_combine(coils))


def zero_filled(record):
    """SOS of the inverse FFT of the measured (zero-filled) k-space."""
    return sos_combine(ifft2c(record.y))


def training_images(n_images, size=64, seed=0, coil_weighted=True):
    """Synthetic single-coil training images.

    Each image is a jittered phantom. With ``coil_weighted`` it is multiplied
    by one coil map drawn from a randomly seeded array of 2-8 coils, so the
    prior sees the smooth magnitude shading and phase of a single receiver.
    """
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    out = np.empty((n_images, size, size), dtype=np.complex128)
    for k in range(n_images):
        img = random_phantom(size, rng).astype(np.complex128)
        if coil_weighted:
            J = int(rng.integers(2, 9))
            maps = make_sensitivities(size, J, int(rng.integers(0, 2 ** 63))).maps
            img = img * maps[rng.integers(0, J)]
        out[k] = img
    return out
