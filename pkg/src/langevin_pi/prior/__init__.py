from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .dsm import dsm_loss, level_losses, perturb, train
from .models import (AnalyticGaussianScore, ConvScoreNet, LayerSpec, analytic_gaussian_score,
                     default_layers, init_weights, score)
from .schedule import NoiseSchedule

__all__ = [
    "AnalyticGaussianScore", "Checkpoint", "ConvScoreNet", "LayerSpec", "NoiseSchedule",
    "analytic_gaussian_score", "default_layers", "dsm_loss", "init_weights", "level_losses",
    "load_checkpoint", "perturb", "save_checkpoint", "score", "train",
]
