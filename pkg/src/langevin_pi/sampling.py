"""Variable-density k-space undersampling masks.

Both generators share a Gaussian radial density profile
``g(r) = exp(-r^2 / (2 s^2))`` where ``r`` is the distance from the k-space
center normalized by the grid half-width (so ``r = 1`` on the edge midpoints)
and ``s`` is ``density_sigma``.

Randomness comes from numpy's PCG64 bit generator seeded with the given
64-bit seed, so masks are reproducible across platforms.
"""
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InfeasibleParametersError, InvalidInputError

DEFAULT_DENSITY_SIGMA = 0.45


@dataclass(frozen=True)
class SamplingMask:
    bits: np.ndarray
    target_R: float | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise InvalidInputError(f"mask must be 2D, got shape {bits.shape}")
        if bits.dtype != bool:
            if not np.all((bits == 0) | (bits == 1)):
                raise InvalidInputError("mask entries must be 0 or 1")
            bits = bits.astype(bool)
        if not bits.any():
            raise InvalidInputError("mask has no sampled locations")
        bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    @property
    def shape(self):
        return self.bits.shape

    @property
    def fraction(self):
        return int(self.bits.sum()) / self.bits.size

    def __eq__(self, other):
        if not isinstance(other, SamplingMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None


def _rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


def radius_grid(rows, cols):
    """Normalized radial distance from the center pixel ``(rows//2, cols//2)``."""
    i = (np.arange(rows) - rows // 2) / (rows / 2)
    j = (np.arange(cols) - cols // 2) / (cols / 2)
    return np.sqrt(i[:, None] ** 2 + j[None, :] ** 2)


def _forced_region(rows, cols, center_radius, sample_dc):
    forced = np.zeros((rows, cols), dtype=bool)
    if center_radius and center_radius > 0:
        ii, jj = np.mgrid[:rows, :cols]
        forced |= (ii - rows // 2) ** 2 + (jj - cols // 2) ** 2 <= center_radius ** 2
    if sample_dc:
        forced[rows // 2, cols // 2] = True
    return forced


def _check_common(rows, cols, R, density_sigma):
    if rows < 1 or cols < 1:
        raise InvalidInputError(f"grid must be positive, got {rows}x{cols}")
    if not np.isfinite(R) or R < 1:
        raise InvalidInputError(f"acceleration R must be >= 1, got {R}")
    if not density_sigma > 0:
        raise InvalidInputError(f"density_sigma must be > 0, got {density_sigma}")


def density_profile(rows, cols, R, density_sigma=DEFAULT_DENSITY_SIGMA,
                    center_radius=0, sample_dc=True):
    """Per-pixel sampling probability whose mean is exactly ``1/R``.

    Solves ``mean(min(1, c * g(r))) = 1/R`` for ``c`` by bisection on
    ``log c``; forced pixels (DC, optional center disk) have probability 1.
    """
    _check_common(rows, cols, R, density_sigma)
    target = 1.0 / R
    log_g = -radius_grid(rows, cols) ** 2 / (2 * density_sigma ** 2)
    g = np.exp(log_g)
    forced = _forced_region(rows, cols, center_radius, sample_dc)

    def fraction(log_c):
        p = np.exp(np.minimum(0.0, log_c + log_g))
        p[forced] = 1.0
        return p.mean(), p

    free = ~forced & (g > 0)
    if forced.mean() > target * (1 + 1e-12):
        raise InfeasibleParametersError(
            f"forced center region already samples {forced.mean():.4f} > 1/R = {target:.4f}")
    if not free.any():
        f_max = forced.mean()
    else:
        log_hi = -np.log(g[free].min())
        f_max, p_max = fraction(log_hi)
    if f_max < target * (1 - 1e-12):
        raise InfeasibleParametersError(
            f"density_sigma={density_sigma} cannot reach sampled fraction 1/R = {target:.4f}")
    if not free.any() or f_max <= target:
        p = np.ones((rows, cols)) if not free.any() else p_max
        return np.where(forced, 1.0, p)

    log_lo = np.log(g[free].max()) - 60.0
    for _ in range(200):
        mid = 0.5 * (log_lo + log_hi)
        f, _p = fraction(mid)
        if f < target:
            log_lo = mid
        else:
            log_hi = mid
        if log_hi - log_lo < 1e-13:
            break
    return fraction(log_hi)[1]


def variable_density_random_mask(rows, cols, R, seed, density_sigma=DEFAULT_DENSITY_SIGMA,
                                 center_radius=0, sample_dc=True, tol=0.05, max_draws=1000):
    """Independent Bernoulli sampling with the calibrated density profile.

    A realization whose sampled fraction misses ``1/R`` by more than ``tol``
    (relative) is discarded and redrawn from the same seeded stream, which
    bounds the binomial spread on small grids at high R.
    """
    p = density_profile(rows, cols, R, density_sigma, center_radius, sample_dc)
    target = 1.0 / R
    rng = _rng(seed)
    for _ in range(max_draws):
        bits = rng.random((rows, cols)) < p
        if bits.any() and abs(bits.mean() - target) <= tol * target:
            break
    else:
        raise InfeasibleParametersError(
            f"no realization within {tol:.0%} of 1/R = {target:.4f} after {max_draws} draws")
    return SamplingMask(bits, float(R), int(seed),
                        meta={"kind": "random", "density_sigma": density_sigma})


@numba.njit(cache=True)
def _dart_throw(order, radius, forced):
    rows, cols = radius.shape
    bits = forced.copy()
    acc_i = np.empty(rows * cols, np.int64)
    acc_j = np.empty(rows * cols, np.int64)
    n_acc = 0
    for i in range(rows):
        for j in range(cols):
            if bits[i, j]:
                acc_i[n_acc] = i
                acc_j[n_acc] = j
                n_acc += 1
    for n in range(order.size):
        idx = order[n]
        i = idx // cols
        j = idx % cols
        if bits[i, j]:
            continue
        rho = radius[i, j]
        rho2 = rho * rho
        w = int(np.ceil(rho))
        ok = True
        if (2 * w + 1) * (2 * w + 1) > n_acc:
            # large radius: scanning the kept points is cheaper than the window
            for m in range(n_acc):
                di = acc_i[m] - i
                dj = acc_j[m] - j
                if di * di + dj * dj < rho2:
                    ok = False
                    break
        else:
            for di in range(max(-w, -i), min(w, rows - 1 - i) + 1):
                ii = i + di
                for dj in range(max(-w, -j), min(w, cols - 1 - j) + 1):
                    if bits[ii, j + dj] and di * di + dj * dj < rho2:
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            bits[i, j] = True
            acc_i[n_acc] = i
            acc_j[n_acc] = j
            n_acc += 1
    return bits


def exclusion_radius(rows, cols, scale, density_sigma=DEFAULT_DENSITY_SIGMA):
    """``rho(r) = scale / sqrt(g(r))`` in pixels."""
    r = radius_grid(rows, cols)
    return scale * np.exp(r ** 2 / (4 * density_sigma ** 2))


def poisson_disk_mask(rows, cols, R, seed, density_sigma=DEFAULT_DENSITY_SIGMA,
                      center_radius=0, sample_dc=True, max_iter=60, tol=0.1):
    """Variable-density dart throwing, calibrated to sampled fraction ``1/R``.

    Candidates are visited once in a seeded random order. A candidate is kept
    if no already-kept point lies closer than its own exclusion radius.
    The radius scale is found by bisection on ``log(scale)``; the result must
    land within ``tol`` (relative) of ``1/R``.
    """
    _check_common(rows, cols, R, density_sigma)
    target = 1.0 / R
    forced = _forced_region(rows, cols, center_radius, sample_dc)
    meta = {"kind": "poisson", "density_sigma": density_sigma}
    if R == 1:
        return SamplingMask(np.ones((rows, cols), dtype=bool), 1.0, int(seed),
                            meta={**meta, "scale": 0.0})
    if forced.mean() > target * (1 + tol):
        raise InfeasibleParametersError(
            f"forced center region already samples {forced.mean():.4f} > 1/R = {target:.4f}")

    order = _rng(seed).permutation(rows * cols).astype(np.int64)
    shape_r = exclusion_radius(rows, cols, 1.0, density_sigma)
    # scale at which every pixel is accepted, and one at which almost none is
    log_lo = np.log(1.0 / shape_r.max())
    log_hi = np.log(max(rows, cols) / shape_r.min())

    best = None
    for _ in range(max_iter):
        mid = 0.5 * (log_lo + log_hi)
        bits = _dart_throw(order, np.exp(mid) * shape_r, forced)
        frac = bits.mean()
        err = abs(frac - target) / target
        if best is None or err < best[0]:
            best = (err, bits, float(np.exp(mid)))
        if err <= 0.01:
            break
        if frac > target:
            log_lo = mid
        else:
            log_hi = mid
    err, bits, scale = best
    if err > tol:
        raise InfeasibleParametersError(
            f"Poisson-disk calibration reached fraction {bits.mean():.4f}, "
            f"target {target:.4f} +/- {tol:.0%}")
    return SamplingMask(bits, float(R), int(seed), meta={**meta, "scale": scale})


def make_mask(kind, rows, cols, R, seed, density_sigma=DEFAULT_DENSITY_SIGMA,
              center_radius=0, sample_dc=True):
    if kind == "random":
        fn = variable_density_random_mask
    elif kind == "poisson":
        fn = poisson_disk_mask
    else:
        raise InvalidInputError(f"unknown mask type {kind!r} (expected 'random' or 'poisson')")
    return fn(rows, cols, R, seed, density_sigma=density_sigma,
              center_radius=center_radius, sample_dc=sample_dc)


def achieved_acceleration(mask):
    bits = getattr(mask, "bits", mask)
    return bits.size / int(np.count_nonzero(bits))


def radial_quartile_fractions(mask):
    """Sampled fraction in the innermost and outermost radial quartiles."""
    bits = getattr(mask, "bits", mask)
    r = radius_grid(*bits.shape).ravel()
    order = np.argsort(r, kind="stable")
    q = bits.size // 4
    flat = bits.ravel()
    return flat[order[:q]].mean(), flat[order[-q:]].mean()
