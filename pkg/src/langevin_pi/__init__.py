"""Parallel MRI reconstruction by annealed Langevin dynamics on a wavelet-domain score prior.

The pipeline: :mod:`~langevin_pi.sim` builds phantoms, coil maps and masked
k-space; :mod:`~langevin_pi.prior` trains a score network on wavelet tensors;
:mod:`~langevin_pi.recon` samples per-coil images under k-space data
consistency; :mod:`~langevin_pi.metrics` scores the result.
"""
from .numerics import fft2c, ifft2c, sos_combine
from .recon import ReconConfig, reconstruct
from .sampling import SamplingMask, make_mask
from .wavelet import WaveletTensor, forward_uwt, inverse_uwt

__version__ = "0.1.0"

__all__ = [
    "ReconConfig", "SamplingMask", "WaveletTensor", "fft2c", "forward_uwt", "ifft2c", "inverse_uwt",
    "make_mask", "reconstruct", "sos_combine",
]
