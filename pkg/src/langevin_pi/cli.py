"""Command-line entry point: ``langevin-pi <command> [options]``.

Commands: ``simulate``, ``train``, ``reconstruct``, ``evaluate`` and ``mask``.
Every command accepts ``--config``, ``--seed``, ``--out`` and ``--quiet``.
Fatal errors are reported as a single ``CODE: message`` line on stderr with
exit status 1 (2 for command-line usage errors).
"""
import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import formats
from .config import PipelineConfig, load_config
from .errors import FileFormatError, InvalidInputError, LangevinPIError, ShapeError
from .metrics import evaluate as evaluate_metrics
from .numerics import sos_combine
from .prior import default_layers, load_checkpoint, save_checkpoint, train
from .recon import ReconConfig, reconstruct
from .sampling import achieved_acceleration, make_mask
from .sim import AcquisitionRecord, acquire, make_sensitivities, shepp_logan, training_images, zero_filled
from .wavelet import N_CHANNELS, WaveletTensor, to_channels

log = logging.getLogger("langevin_pi")

META_FILE = "meta.txt"


class _Context:
    def __init__(self, args):
        self.config = load_config(args.config) if args.config else PipelineConfig()
        if args.seed is not None:
            self.config = self.config.replace(seed=args.seed)
        if args.out is not None:
            self.config = self.config.replace(out=args.out)
        self.quiet = args.quiet
        self.out = self.config.out
        try:
            os.makedirs(self.out, exist_ok=True)
        except OSError as exc:
            raise _IOFailure(f"cannot create output directory {self.out!r}: {exc.strerror}") from None
        if not os.access(self.out, os.W_OK):
            raise _IOFailure(f"output directory {self.out!r} is not writable")

    def path(self, name):
        return os.path.join(self.out, name)

    def say(self, line):
        if not self.quiet:
            print(line)


class _IOFailure(LangevinPIError):
    code = "E_IO"


def _mask_from_config(cfg):
    return make_mask(cfg.mask_type, cfg.size, cfg.size, cfg.mask_R, cfg.seed_for("mask"),
                     density_sigma=cfg.density_sigma, center_radius=cfg.center_radius,
                     sample_dc=cfg.sample_dc)


def _mask_stats(mask):
    ones = int(np.count_nonzero(mask.bits))
    return f"achieved_R={achieved_acceleration(mask):.6f} fraction={ones / mask.bits.size!r} ones={ones}"


def write_meta(path, record):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"J = {record.n_coils}\n")
        fh.write(f"noise_std = {float(record.noise_std)!r}\n")
        fh.write(f"seed = {record.seed}\n")
        fh.write(f"scale = {float(record.scale)!r}\n")


def read_meta(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                k, _, v = line.partition("=")
                out[k.strip()] = v.strip()
    try:
        return {"J": int(out["J"]), "noise_std": float(out["noise_std"]),
                "seed": int(out["seed"]), "scale": float(out["scale"])}
    except (KeyError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed acquisition metadata ({exc})") from None


def simulate(cfg):
    """Phantom acquisition described by a config: ``(record, sensitivity maps)``."""
    mask = _mask_from_config(cfg)
    sens = make_sensitivities(cfg.size, cfg.coils, cfg.seed_for("sensitivities"))
    record = acquire(shepp_logan(cfg.size), sens, mask, cfg.noise_std, cfg.seed_for("noise"))
    return record, sens


def train_prior(cfg, data):
    """Train the score network on an ``(N, 8, rows, cols)`` array with the config's settings."""
    return train(data, cfg.schedule(), epochs=cfg.train_epochs, batch_size=cfg.train_batch_size,
                 learning_rate=cfg.train_lr, seed=cfg.seed_for("train"), momentum=cfg.train_momentum,
                 layers=default_layers(cfg.train_width), crop=cfg.train_crop,
                 grad_clip=cfg.train_grad_clip, noise=cfg.train_noise)


def recon_config(cfg):
    return ReconConfig(schedule=cfg.schedule(), lambda_dc=cfg.lambda_dc, init=cfg.init,
                       seed=cfg.seed_for("reconstruct"), trace_metrics=cfg.trace,
                       trace_snapshot_every=cfg.snapshot_every, fixed_inner_iters=cfg.fixed_inner_iters)


def cmd_simulate(ctx, args):
    cfg = ctx.config
    record, sens = simulate(cfg)
    mask = record.mask
    formats.write_cimg(ctx.path("ground_truth.cimg"), record.ground_truth)
    formats.write_png(ctx.path("ground_truth.png"), record.ground_truth)
    formats.write_cimg(ctx.path("sens.cimg"), sens.maps)
    formats.write_mask(ctx.path("mask.bin"), mask)
    formats.write_mask_png(ctx.path("mask.png"), mask)
    formats.write_cimg(ctx.path("kspace.cimg"), record.y)
    write_meta(ctx.path(META_FILE), record)
    n_train = args.training_images if args.training_images is not None else cfg.train_images
    if n_train:
        ddir = ctx.path("dataset")
        os.makedirs(ddir, exist_ok=True)
        imgs = training_images(n_train, cfg.size, seed=cfg.seed_for("dataset"))
        for k, img in enumerate(imgs):
            formats.write_cimg(os.path.join(ddir, f"img_{k:04d}.cimg"), img)
    ctx.say(_mask_stats(mask))


def load_dataset(directory, mode="image"):
    """Stack every ``.cimg`` / ``.png`` file of a directory into wavelet tensors.

    In ``image`` mode each slice of each file is transformed. In ``wavelet``
    mode each ``.cimg`` file must hold a multiple of four slices, read as the
    ``ll, lh, hl, hh`` subbands of consecutive tensors.
    """
    if not os.path.isdir(directory):
        raise _IOFailure(f"dataset directory {directory!r} does not exist")
    names = sorted(n for n in os.listdir(directory) if n.lower().endswith((".cimg", ".png")))
    tensors = []
    for name in names:
        path = os.path.join(directory, name)
        if name.lower().endswith(".png"):
            if mode == "wavelet":
                raise InvalidInputError(f"{name}: PNG files cannot hold wavelet tensors")
            slices = formats.read_png(path)[None].astype(np.complex128)
        else:
            slices = formats.read_cimg(path)
        if mode == "wavelet":
            if slices.shape[0] % 4:
                raise ShapeError(f"{name}: wavelet input needs a multiple of 4 slices, got {slices.shape[0]}")
            for g in range(0, slices.shape[0], 4):
                tensors.append(WaveletTensor(*slices[g:g + 4]).channels())
        else:
            tensors.extend(to_channels(slices))
    if not tensors:
        raise InvalidInputError(f"dataset directory {directory!r} holds no readable image files")
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ShapeError(f"dataset images differ in shape: {sorted(shapes)}")
    return np.stack(tensors)


def cmd_train(ctx, args):
    cfg = ctx.config
    if cfg.train_input not in ("image", "wavelet"):
        raise InvalidInputError(f"train_input must be 'image' or 'wavelet', got {cfg.train_input!r}")
    data = load_dataset(args.dataset, cfg.train_input)
    ctx.say(f"dataset: {data.shape[0]} tensors of {data.shape[2]}x{data.shape[3]}")
    ckpt = train_prior(cfg, data)
    target = args.output or ctx.path("model.ugmp")
    save_checkpoint(ckpt, target)
    spe = ckpt.metadata["steps_per_epoch"]
    with open(ctx.path("loss_history.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "step", "loss"])
        for n, value in enumerate(ckpt.loss_history):
            w.writerow([n // spe + 1, n % spe + 1, repr(value)])
    ctx.say(f"checkpoint={target} final_loss={ckpt.metadata['final_loss']!r}")


def load_acquisition(directory):
    """Read the files written by ``simulate`` back into an :class:`AcquisitionRecord`."""
    need = ["kspace.cimg", "mask.bin", META_FILE]
    for name in need:
        if not os.path.isfile(os.path.join(directory, name)):
            raise _IOFailure(f"acquisition file {os.path.join(directory, name)!r} is missing")
    y = formats.read_cimg(os.path.join(directory, "kspace.cimg"))
    mask = formats.read_mask(os.path.join(directory, "mask.bin"))
    meta = read_meta(os.path.join(directory, META_FILE))
    if y.shape[0] != meta["J"]:
        raise ShapeError(f"metadata says J={meta['J']} but k-space holds {y.shape[0]} coils")
    if y.shape[-2:] != mask.shape:
        raise ShapeError(f"k-space {y.shape[-2:]} and mask {mask.shape} disagree")
    gt_path = os.path.join(directory, "ground_truth.cimg")
    gt = None
    if os.path.isfile(gt_path):
        gt = np.abs(formats.read_cimg(gt_path)[0])
        if gt.shape != mask.shape:
            raise ShapeError(f"ground truth {gt.shape} and mask {mask.shape} disagree")
    # The stored k-space is float32; the saved scale keeps the original value.
    return AcquisitionRecord(y=y, mask=mask, noise_std=meta["noise_std"], seed=meta["seed"],
                             scale=meta["scale"], ground_truth=gt)


def cmd_reconstruct(ctx, args):
    cfg = ctx.config
    record = load_acquisition(args.acquisition)
    if args.zero_filled:
        sos = zero_filled(record)
        coils = None
        trace = None
    else:
        model_path = args.model or cfg.model
        if not model_path:
            raise InvalidInputError("no model given (use --model or the 'model' config key)")
        if not os.path.isfile(model_path):
            raise _IOFailure(f"model file {model_path!r} is missing")
        ckpt = load_checkpoint(model_path)
        if ckpt.layers[-1].out_ch != N_CHANNELS:
            raise ShapeError(f"model outputs {ckpt.layers[-1].out_ch} channels, data needs {N_CHANNELS}")
        sos, coils, trace = reconstruct(record, ckpt.to_model(), recon_config(cfg))
    formats.write_png(ctx.path("sos.png"), sos)
    formats.write_cimg(ctx.path("sos.cimg"), sos)
    if coils is not None:
        formats.write_cimg(ctx.path("coils.cimg"), coils)
    if trace is not None:
        with open(ctx.path("trace.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(trace.to_csv())
        for (i, t), snap in sorted(trace.snapshots.items()):
            formats.write_png(ctx.path(f"snapshot_{i}_{t}.png"), snap)
    if record.ground_truth is not None:
        report = evaluate_metrics(sos, record.ground_truth)
        with open(ctx.path("metrics.json"), "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
        ctx.say(report.to_json())


def load_image(path):
    """Magnitude image from a CIMG (SOS over coils) or PNG file."""
    if not os.path.isfile(path):
        raise _IOFailure(f"image file {path!r} is missing")
    if path.lower().endswith(".png"):
        return formats.read_png(path)
    return sos_combine(formats.read_cimg(path))


def cmd_evaluate(ctx, args):
    rec, ref = load_image(args.rec), load_image(args.ref)
    if rec.shape != ref.shape:
        raise ShapeError(f"reconstruction {rec.shape} and reference {ref.shape} differ in shape")
    report = evaluate_metrics(rec, ref)
    text = report.to_json()
    with open(args.output or ctx.path("metrics.json"), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    print(text)


def cmd_mask(ctx, args):
    mask = _mask_from_config(ctx.config)
    formats.write_mask(ctx.path("mask.bin"), mask)
    formats.write_mask_png(ctx.path("mask.png"), mask)
    print(_mask_stats(mask))


def _common_flags(suppress):
    # The subcommand copies use SUPPRESS so a flag given before the command
    # name is not reset by the subparser's defaults.
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file", **kw)
    common.add_argument("--seed", type=int, help="master seed (overrides the config)", **kw)
    common.add_argument("--out", help="output directory (overrides the config)", **kw)
    common.add_argument("--quiet", action="store_true", help="suppress progress output", **kw)
    return common


def build_parser():
    common = _common_flags(suppress=True)
    p = argparse.ArgumentParser(prog="langevin-pi", parents=[_common_flags(suppress=False)],
                                description="Wavelet-domain score-prior parallel MRI reconstruction.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="phantom, coils, mask and k-space")
    s.add_argument("--training-images", type=int, default=None,
                   help="also write N synthetic training images to OUT/dataset")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("train", parents=[common], help="fit the score prior on a dataset directory")
    t.add_argument("dataset", help="directory of .cimg / .png images")
    t.add_argument("--output", help="checkpoint path (default OUT/model.ugmp)")
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("reconstruct", parents=[common], help="annealed Langevin reconstruction")
    r.add_argument("acquisition", help="directory written by 'simulate'")
    r.add_argument("--model", help="checkpoint path (overrides the config)")
    r.add_argument("--zero-filled", action="store_true", help="skip the sampler and output the zero-filled SOS")
    r.set_defaults(func=cmd_reconstruct)

    e = sub.add_parser("evaluate", parents=[common], help="PSNR / SSIM / HFEN of two images")
    e.add_argument("rec")
    e.add_argument("ref")
    e.add_argument("--output", help="report path (default OUT/metrics.json)")
    e.set_defaults(func=cmd_evaluate)

    m = sub.add_parser("mask", parents=[common], help="write a sampling mask and print its statistics")
    m.set_defaults(func=cmd_mask)
    return p


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        ctx = _Context(args)
        args.func(ctx, args)
    except LangevinPIError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"E_IO: {exc.strerror or exc}: {exc.filename or ''}".rstrip(": "), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
