"""Annealed Langevin reconstruction with per-step k-space data consistency.

Each inner iteration updates every coil independently:

1. ``X = forward_uwt(x_j)``
2. ``X <- X + alpha_i / 2 * S(X, sigma_i) + sqrt(alpha_i) * z``
3. ``x_j = inverse_uwt(X)``
4. blend ``F x_j`` toward ``y_j`` on the sampled set and transform back.

The outer loop walks the noise levels from high to low; level ``i`` runs
``inner_iters(i)`` steps unless a fixed count is configured.
"""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NumericalFailureError, ShapeError
from .metrics import psnr
from .numerics import fft2c, ifft2c, sos_combine
from .prior.schedule import NoiseSchedule
from .wavelet import WaveletTensor, forward_uwt, inverse_uwt

INIT_MODES = ("uniform-noise", "zero-filled")


def step_sizes(schedule):
    """``alpha_i = epsilon * sigma_i^2 / sigma_1^2``."""
    s = np.asarray(schedule.sigmas)
    return schedule.epsilon * s ** 2 / s[0] ** 2


def inner_iters(i):
    """Adaptive inner-loop length ``10 (ln i + 1)``, rounded half up, at least 1."""
    if int(i) != i or i < 1:
        raise InvalidInputError(f"outer index must be an integer >= 1, got {i}")
    return max(1, math.floor(10.0 * (math.log(i) + 1.0) + 0.5))


def langevin_step(X, model, sigma, alpha, rng=None, z=None, where=None):
    """One Langevin update on an 8-channel tensor or a ``(J, 8, ...)`` coil stack.

    ``z`` overrides the Gaussian draw from ``rng``; ``where`` is a
    ``(level, step)`` pair reported, with the offending coil, if the score is
    not finite.
    """
    if not alpha > 0:
        raise InvalidInputError(f"step size must be > 0, got {alpha}")
    X = np.asarray(X, dtype=np.float64)
    s = model.score(X, sigma)
    bad = ~np.isfinite(s)
    if bad.any():
        level, step = where or (None, None)
        coil = int(np.argwhere(bad.reshape(len(s), -1).any(axis=1))[0, 0]) if X.ndim == 4 else 0
        raise NumericalFailureError(level, step, coil)
    if z is None:
        z = rng.standard_normal(X.shape)
    return X + 0.5 * alpha * s + math.sqrt(alpha) * z


def data_consistency(k_current, y, mask, lam=1.0):
    """Closed-form blend on the sampled set: ``(y + lam k) / (1 + lam)``.

    Unsampled locations are returned unchanged.
    """
    if not lam > 0:
        raise InvalidInputError(f"lambda must be > 0, got {lam}")
    bits = np.asarray(getattr(mask, "bits", mask), dtype=bool)
    k_current = np.asarray(k_current)
    y = np.asarray(y)
    if k_current.shape != y.shape or k_current.shape[-2:] != bits.shape:
        raise ShapeError(f"k-space {k_current.shape}, data {y.shape}, mask {bits.shape} must agree")
    return np.where(bits, (y + lam * k_current) / (1.0 + lam), k_current)


@dataclass
class ReconConfig:
    schedule: NoiseSchedule = field(default_factory=lambda: NoiseSchedule.geometric())
    lambda_dc: float = 1.0
    init: str = "uniform-noise"
    seed: int = 0
    trace_metrics: bool = True
    trace_snapshot_every: int = 0
    fixed_inner_iters: int | None = None

    def __post_init__(self):
        if not self.lambda_dc > 0:
            raise InvalidInputError(f"lambda_dc must be > 0, got {self.lambda_dc}")
        if self.init not in INIT_MODES:
            raise InvalidInputError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.fixed_inner_iters is not None and self.fixed_inner_iters < 1:
            raise InvalidInputError("fixed_inner_iters must be >= 1")

    def iterations(self, i):
        return self.fixed_inner_iters if self.fixed_inner_iters else inner_iters(i)

    def total_iterations(self):
        return sum(self.iterations(i) for i in range(1, self.schedule.n_levels + 1))


@dataclass(frozen=True)
class TraceRecord:
    i: int
    t: int
    sigma: float
    alpha: float
    psnr: float
    dc_residual: float


@dataclass
class ReconTrace:
    records: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def psnr_at_level_end(self, i):
        recs = [r for r in self.records if r.i == i]
        return recs[-1].psnr if recs else float("nan")

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "t", "sigma", "alpha", "psnr", "dc_residual"])
        for r in self.records:
            w.writerow([r.i, r.t, repr(r.sigma), repr(r.alpha), repr(r.psnr), repr(r.dc_residual)])
        return buf.getvalue()


@dataclass
class ReconResult:
    sos: np.ndarray
    coils: np.ndarray
    trace: ReconTrace

    def __iter__(self):
        return iter((self.sos, self.coils, self.trace))


def coil_streams(seed, n_coils):
    """Independent per-coil generators split from one seed."""
    return [np.random.Generator(np.random.PCG64(s))
            for s in np.random.SeedSequence(int(seed)).spawn(n_coils)]


def _initial_coils(config, y, streams):
    if config.init == "zero-filled":
        return ifft2c(y)
    shape = y.shape[-2:]
    return np.stack([rng.random(shape) + 1j * rng.random(shape) for rng in streams])


def reconstruct(record, model, config=None, streams=None):
    """Run the full annealed reconstruction on an acquisition record.

    The measured k-space is multiplied by ``record.scale`` before iterating and
    the outputs are divided by it again. ``streams`` overrides the per-coil
    random generators (one per coil, used for the initial image and the
    Langevin noise).
    """
    config = config or ReconConfig()
    scale = float(getattr(record, "scale", 1.0))
    y = np.asarray(record.y) * scale
    bits = np.asarray(getattr(record.mask, "bits", record.mask), dtype=bool)
    if y.shape[-2:] != bits.shape:
        raise ShapeError(f"data {y.shape} and mask {bits.shape} disagree")
    n_coils = y.shape[0]
    if streams is None:
        streams = coil_streams(config.seed, n_coils)
    if len(streams) != n_coils:
        raise InvalidInputError(f"need {n_coils} coil streams, got {len(streams)}")
    gt = getattr(record, "ground_truth", None)
    track_psnr = config.trace_metrics and gt is not None

    sigmas = config.schedule.sigmas
    alphas = step_sizes(config.schedule)
    x = _initial_coils(config, y, streams)
    trace = ReconTrace()

    for i, (sigma, alpha) in enumerate(zip(sigmas, alphas), start=1):
        for t in range(1, config.iterations(i) + 1):
            X = forward_uwt(x).channels()
            z = np.stack([rng.standard_normal(X.shape[1:]) for rng in streams])
            try:
                X = langevin_step(X, model, sigma, alpha, z=z, where=(i, t))
            except NumericalFailureError as exc:
                exc.trace = trace
                raise
            k = fft2c(inverse_uwt(WaveletTensor.from_channels(X)))
            k = data_consistency(k, y, bits, config.lambda_dc)
            x = ifft2c(k)
            resid = math.sqrt(float(np.sum(np.abs(np.where(bits, k - y, 0)) ** 2))) / scale
            cur_psnr = psnr(sos_combine(x) / scale, gt) if track_psnr else float("nan")
            trace.records.append(TraceRecord(i, t, float(sigma), float(alpha), cur_psnr, resid))
            every = config.trace_snapshot_every
            if every and len(trace.records) % every == 0:
                trace.snapshots[(i, t)] = sos_combine(x) / scale

    return ReconResult(sos_combine(x) / scale, x / scale, trace)
