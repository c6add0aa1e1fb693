"""Denoising score matching in the wavelet domain.

With weighting ``lambda(sigma) = sigma^2`` the per-level objective
``lambda * 1/2 * E||S(X + sigma z, sigma) + z / sigma||^2`` becomes
``1/2 * E||sigma * S + z||^2``; for the conv net ``sigma * S`` is just the raw
network output, so training regresses the raw output onto ``-z``.
"""
import logging

import numpy as np
import torch

from ..errors import InvalidInputError, ShapeError, TrainingDivergedError
from ..wavelet import from_channels, to_channels
from .checkpoint import Checkpoint
from .models import N_CHANNELS_IN, default_layers, init_weights, net_input, torch_forward

log = logging.getLogger(__name__)


def _rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


NOISE_MODES = ("white", "range")


def range_noise(z):
    """Project 8-channel white noise onto the range of the wavelet analysis.

    The result is the wavelet transform of the synthesized image noise, which
    is complex white with unit variance per real component. This is exactly the
    perturbation a sampler that re-analyzes its image every step presents to
    the network.
    """
    return to_channels(from_channels(z))


def noise_weight(sigma):
    return sigma ** 2


def perturb(X, sigma, seed):
    """Return ``(X + sigma z, -(X_tilde - X) / sigma^2)``."""
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be > 0, got {sigma}")
    X = np.asarray(X, dtype=np.float64)
    z = _rng(seed).standard_normal(X.shape)
    X_tilde = X + sigma * z
    return X_tilde, -(X_tilde - X) / sigma ** 2


def dsm_loss(model, batch, schedule, seed=0, noise=None):
    """Unified multi-level DSM loss, averaged over samples and levels.

    Every sample is evaluated at every level. ``noise`` may supply the
    standard-normal draws explicitly, shape ``(n_levels, *batch.shape)``;
    otherwise they come from ``seed``. The theta-independent constant of the
    score-matching identity is omitted.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim == 3:
        batch = batch[None]
    if batch.shape[0] == 0:
        raise InvalidInputError("batch is empty")
    sigmas = schedule.sigmas if hasattr(schedule, "sigmas") else tuple(schedule)
    if noise is None:
        rng = _rng(seed)
        noise = [rng.standard_normal(batch.shape) for _ in sigmas]
    total = 0.0
    for sigma, z in zip(sigmas, noise):
        x_tilde = batch + sigma * z
        resid = model.score(x_tilde, sigma) + (x_tilde - batch) / sigma ** 2
        per_sample = 0.5 * np.sum(resid.reshape(len(batch), -1) ** 2, axis=1)
        total += noise_weight(sigma) * per_sample.mean()
    return total / len(sigmas)


def level_losses(model, batch, schedule, seed=0):
    """Per-level weighted losses (useful for checking the weighting balance)."""
    return [dsm_loss(model, batch, [s], seed=seed + k) for k, s in enumerate(schedule.sigmas)]


def _random_crops(rng, data, idx, crop):
    n_rows, n_cols = data.shape[-2:]
    out = np.empty((len(idx), data.shape[1], crop, crop))
    for k, i in enumerate(idx):
        dr, dc = rng.integers(0, n_rows), rng.integers(0, n_cols)
        rolled = np.roll(data[i], (-dr, -dc), axis=(-2, -1))
        out[k] = rolled[:, :crop, :crop]
    return out


def train(dataset, schedule, epochs=10, batch_size=16, learning_rate=1e-2, seed=0,
          momentum=0.9, layers=None, crop=None, grad_clip=None, noise="white"):
    """Fit a :class:`ConvScoreNet` by SGD with momentum.

    Update rule per step: ``v <- momentum * v + g``; ``w <- w - learning_rate * v``
    where ``g`` is the gradient of the batch-mean DSM loss divided by the
    number of tensor entries per sample, rescaled to global norm ``grad_clip``
    when it is set and exceeded. Each step draws, in order: the batch
    indices (from a per-epoch permutation), crop offsets if ``crop`` is set,
    one level index per sample, and the Gaussian noise. All draws come from
    one PCG64 stream seeded with ``seed``.

    ``noise="range"`` replaces each white draw by :func:`range_noise` of it, so
    the network learns to denoise tensors that are the analysis of a noisy
    image; ``"white"`` perturbs all 8 channels independently.

    Returns a :class:`Checkpoint` whose metadata carries the per-step loss
    history (unbiased estimates of the unified loss).
    """
    data = np.asarray(dataset, dtype=np.float64)
    if data.ndim != 4 or data.shape[0] == 0:
        raise InvalidInputError(f"dataset must be a non-empty (N, 8, rows, cols) array, got {data.shape}")
    layers = layers or default_layers()
    sigma_channel = layers[0].in_ch == N_CHANNELS_IN + 1
    if data.shape[1] != N_CHANNELS_IN:
        raise ShapeError(f"dataset has {data.shape[1]} channels, network expects {N_CHANNELS_IN}")
    if noise not in NOISE_MODES:
        raise InvalidInputError(f"noise must be one of {NOISE_MODES}, got {noise!r}")
    if crop is not None and crop > min(data.shape[-2:]):
        raise InvalidInputError(f"crop {crop} exceeds tensor size {data.shape[-2:]}")
    rng = _rng(seed)
    weights = init_weights(layers, rng.integers(0, 2 ** 63))
    params = [(torch.tensor(w, requires_grad=True), torch.tensor(b, requires_grad=True)) for w, b in weights]
    flat = [p for pair in params for p in pair]
    velocity = [torch.zeros_like(p) for p in flat]
    sigmas = np.asarray(schedule.sigmas)
    n = data.shape[0]
    batch_size = min(batch_size, n)
    steps_per_epoch = n // batch_size
    history = []
    step = 0
    for epoch in range(epochs):
        perm = rng.permutation(n)
        for b in range(steps_per_epoch):
            idx = perm[b * batch_size:(b + 1) * batch_size]
            x = _random_crops(rng, data, idx, crop) if crop else data[idx]
            levels = rng.integers(0, len(sigmas), size=len(idx))
            z = rng.standard_normal(x.shape)
            if noise == "range":
                z = range_noise(z)
            sig = sigmas[levels][:, None, None, None]
            x_tilde = torch.from_numpy((x + sig * z).astype(np.float32))
            z_t = torch.from_numpy(z.astype(np.float32))
            raw = torch_forward(layers, params, net_input(x_tilde, sigmas[levels], sigma_channel))
            per_sample = 0.5 * ((raw + z_t) ** 2).flatten(1).sum(1)
            loss = per_sample.mean()
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDivergedError(step, value)
            for p in flat:
                p.grad = None
            (loss / x[0].size).backward()
            with torch.no_grad():
                if grad_clip is not None:
                    norm = torch.sqrt(sum((p.grad ** 2).sum() for p in flat))
                    if norm > grad_clip:
                        for p in flat:
                            p.grad.mul_(grad_clip / norm)
                for p, v in zip(flat, velocity):
                    v.mul_(momentum).add_(p.grad)
                    p.sub_(learning_rate * v)
            history.append(value)
            step += 1
        if steps_per_epoch:
            log.info("epoch %d/%d  loss %.4f", epoch + 1, epochs,
                     float(np.mean(history[-steps_per_epoch:])))
    trained = [(w.detach().numpy().copy(), b.detach().numpy().copy()) for w, b in params]
    meta = {
        "seed": int(seed),
        "epochs": int(epochs),
        "batch_size": int(batch_size),
        "steps_per_epoch": int(steps_per_epoch),
        "learning_rate": float(learning_rate),
        "momentum": float(momentum),
        "crop": crop,
        "grad_clip": grad_clip,
        "noise": noise,
        "final_loss": history[-1] if history else None,
        "loss_history": history,
    }
    return Checkpoint(list(layers), trained, schedule, meta)
