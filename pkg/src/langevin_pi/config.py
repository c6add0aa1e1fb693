"""Flat ``key = value`` pipeline configuration.

Blank lines and ``#`` comments are ignored. An empty value means "unset"
(only allowed for optional keys). Per-stage seeds that are unset are
derived from the master ``seed`` by :func:`stage_seed`.
"""
import dataclasses
import hashlib
from dataclasses import dataclass, fields

from .errors import ConfigError

STAGES = ("mask", "sensitivities", "noise", "dataset", "train", "reconstruct")


def stage_seed(master, stage):
    """First 8 bytes (little-endian) of ``sha256(f"{master}/{stage}")``."""
    digest = hashlib.sha256(f"{int(master)}/{stage}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class PipelineConfig:
    size: int = 64
    coils: int = 4
    mask_type: str = "random"
    mask_R: float = 4.0
    mask_seed: int | None = None
    density_sigma: float = 0.45
    center_radius: float = 0.0
    sample_dc: bool = True
    noise_std: float = 0.0
    sens_seed: int | None = None
    noise_seed: int | None = None
    n_levels: int = 10
    sigma_max: float = 1.0
    sigma_min: float = 0.01
    epsilon: float = 1.0
    lambda_dc: float = 1.0
    init: str = "uniform-noise"
    fixed_inner_iters: int | None = None
    recon_seed: int | None = None
    model: str | None = None
    out: str = "out"
    trace: bool = True
    snapshot_every: int = 0
    seed: int = 0
    train_images: int = 0
    train_input: str = "image"
    train_epochs: int = 150
    train_batch_size: int = 16
    train_lr: float = 0.2
    train_momentum: float = 0.9
    train_crop: int | None = 32
    train_width: int = 32
    train_grad_clip: float | None = 1.0
    train_noise: str = "range"
    train_seed: int | None = None

    def seed_for(self, stage):
        explicit = {
            "mask": self.mask_seed, "sensitivities": self.sens_seed, "noise": self.noise_seed,
            "train": self.train_seed, "reconstruct": self.recon_seed,
        }.get(stage)
        return explicit if explicit is not None else stage_seed(self.seed, stage)

    def schedule(self):
        from .prior.schedule import NoiseSchedule
        return NoiseSchedule.geometric(self.sigma_max, self.sigma_min, self.n_levels, self.epsilon)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def serialize(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                text = ""
            elif isinstance(v, bool):
                text = "true" if v else "false"
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v)
            lines.append(f"{f.name} = {text}".rstrip())
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in fields(PipelineConfig)}


def _convert(name, text):
    f = _FIELDS[name]
    typ = f.type if isinstance(f.type, str) else str(f.type)
    typ = typ.replace("<class '", "").replace("'>", "")
    optional = "None" in typ
    if text == "":
        if not optional:
            raise ConfigError(f"key {name!r} requires a value")
        return None
    base = typ.replace("| None", "").strip()
    try:
        if base == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if base == "int":
            return int(text, 0)
        if base == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"bad {base} value for {name!r}: {text!r}") from None
    return text


def parse_config(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, value.strip())
    return PipelineConfig(**values)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
