"""Score models ``S(X, sigma)`` over 8-channel wavelet tensors.

Two variants share the ``score(X, sigma)`` interface:

* :class:`AnalyticGaussianScore` - exact perturbed score of an isotropic
  Gaussian data law, used as a verification oracle.
* :class:`ConvScoreNet` - a small dilated conv net. Noise conditioning is a
  single division, ``score(X, sigma) = net(X) / sigma``.

Tensors are ``(8, rows, cols)`` or batched ``(B, 8, rows, cols)`` float arrays.
"""
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import InvalidInputError, ScoreRangeError, ShapeError
from ..wavelet import N_CHANNELS

KIND_CONV = 0
KIND_SKIP = 1
N_CHANNELS_IN = N_CHANNELS


def analytic_gaussian_score(X, mu, sigma_data, sigma_noise):
    """``-(X - mu) / (sigma_data^2 + sigma_noise^2)``."""
    if not sigma_noise > 0:
        raise InvalidInputError(f"sigma_noise must be > 0, got {sigma_noise}")
    if sigma_data < 0:
        raise InvalidInputError(f"sigma_data must be >= 0, got {sigma_data}")
    X = np.asarray(X, dtype=np.float64)
    return -(X - mu) / (sigma_data ** 2 + sigma_noise ** 2)


def gaussian_log_density(X, mu, var):
    X = np.asarray(X, dtype=np.float64)
    d = X.size
    return -0.5 * np.sum((X - mu) ** 2) / var - 0.5 * d * np.log(2 * np.pi * var)


class AnalyticGaussianScore:
    kind = "analytic-gaussian"

    def __init__(self, mu=0.0, sigma_data=1.0):
        if sigma_data < 0:
            raise InvalidInputError(f"sigma_data must be >= 0, got {sigma_data}")
        self.mu = mu if np.isscalar(mu) else np.asarray(mu, dtype=np.float64)
        self.sigma_data = float(sigma_data)

    def score(self, X, sigma):
        return analytic_gaussian_score(X, self.mu, self.sigma_data, sigma)

    __call__ = score


@dataclass(frozen=True)
class LayerSpec:
    in_ch: int
    out_ch: int
    kernel: int
    dilation: int = 1
    relu: bool = False
    kind: int = KIND_CONV

    @property
    def n_weights(self):
        return self.out_ch * self.in_ch * self.kernel * self.kernel + self.out_ch


def default_layers(width=32, dilations=(1, 2, 4, 2, 1), channels=N_CHANNELS, sigma_channel=False):
    """Dilated 3x3 trunk plus a 1x1 input-to-output skip.

    With ``sigma_channel`` the network input gets one extra constant channel
    holding ``log(sigma)``.
    """
    layers = []
    n_in = channels + int(sigma_channel)
    chans = [n_in] + [width] * (len(dilations) - 1) + [channels]
    for k, d in enumerate(dilations):
        last = k == len(dilations) - 1
        layers.append(LayerSpec(chans[k], chans[k + 1], 3, d, relu=not last))
    layers.append(LayerSpec(n_in, channels, 1, 1, relu=False, kind=KIND_SKIP))
    return layers


def net_input(X, sigma, sigma_channel):
    """Append the ``log(sigma)`` channel when the network expects it.

    ``X`` is a float32 torch tensor ``(B, 8, rows, cols)``; ``sigma`` a scalar
    or a length-B array.
    """
    if not sigma_channel:
        return X
    s = torch.as_tensor(np.log(np.broadcast_to(np.asarray(sigma, dtype=np.float64), (X.shape[0],))),
                        dtype=X.dtype)
    return torch.cat([X, s[:, None, None, None].expand(-1, 1, *X.shape[2:])], dim=1)


def init_weights(layers, seed):
    """He-normal init from a PCG64 stream; the output layer starts near zero."""
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    weights = []
    trunk = [l for l in layers if l.kind == KIND_CONV]
    for spec in layers:
        fan_in = spec.in_ch * spec.kernel ** 2
        shape = (spec.out_ch, spec.in_ch, spec.kernel, spec.kernel)
        if spec.kind == KIND_SKIP:
            w = np.zeros(shape)
        else:
            w = rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)
            if spec is trunk[-1]:
                w *= 0.1
        weights.append((w.astype(np.float32), np.zeros(spec.out_ch, np.float32)))
    return weights


def torch_forward(layers, params, x):
    """Trunk plus learned 1x1 skip; circular padding matches the wavelet boundary."""
    h = x
    skip = None
    for spec, (w, b) in zip(layers, params):
        if spec.kind == KIND_SKIP:
            skip = F.conv2d(x, w, b)
            continue
        p = spec.dilation * (spec.kernel // 2)
        if p:
            h = F.pad(h, (p, p, p, p), mode="circular")
        h = F.conv2d(h, w, b, dilation=spec.dilation)
        if spec.relu:
            h = F.relu(h)
    return h if skip is None else h + skip


class ConvScoreNet:
    kind = "conv-net"

    def __init__(self, layers, weights, sigma_range=None, clamp=False):
        if len(layers) != len(weights):
            raise ShapeError("layer spec and weight list lengths differ")
        for spec, (w, b) in zip(layers, weights):
            if w.shape != (spec.out_ch, spec.in_ch, spec.kernel, spec.kernel) or b.shape != (spec.out_ch,):
                raise ShapeError(f"weights do not match layer {spec}")
        self.layers = list(layers)
        self.weights = [(np.ascontiguousarray(w, np.float32), np.ascontiguousarray(b, np.float32))
                        for w, b in weights]
        self.sigma_range = None if sigma_range is None else (float(min(sigma_range)), float(max(sigma_range)))
        self.clamp = clamp
        self._params = [(torch.from_numpy(w.copy()), torch.from_numpy(b.copy())) for w, b in self.weights]

    @property
    def sigma_channel(self):
        return self.layers[0].in_ch == N_CHANNELS + 1

    @property
    def in_channels(self):
        return N_CHANNELS

    def raw(self, X, sigma=None):
        """Network output before the ``1/sigma`` scaling, same shape as ``X``."""
        X = np.asarray(X)
        single = X.ndim == 3
        if single:
            X = X[None]
        if X.ndim != 4 or X.shape[1] != self.in_channels:
            raise ShapeError(f"expected (B, {self.in_channels}, rows, cols), got {X.shape}")
        if self.sigma_channel and sigma is None:
            raise InvalidInputError("this network is sigma-conditioned; pass sigma")
        with torch.no_grad():
            inp = torch.from_numpy(np.ascontiguousarray(X, dtype=np.float32))
            out = torch_forward(self.layers, self._params, net_input(inp, sigma, self.sigma_channel))
        out = out.numpy().astype(np.float64)
        return out[0] if single else out

    def check_sigma(self, sigma):
        if self.sigma_range is None:
            return sigma
        lo, hi = self.sigma_range
        tol = 1e-9 * hi
        if lo - tol <= sigma <= hi + tol:
            return sigma
        if self.clamp:
            return min(max(sigma, lo), hi)
        raise ScoreRangeError(f"sigma={sigma} outside trained range [{lo}, {hi}]")

    def score(self, X, sigma):
        if not sigma > 0:
            raise InvalidInputError(f"sigma must be > 0, got {sigma}")
        sigma = self.check_sigma(sigma)
        return self.raw(X, sigma) / sigma

    __call__ = score


def score(model, X, sigma):
    return model.score(X, sigma)
