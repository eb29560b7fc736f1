"""Command-line entry point: ``lstmqgan {train,generate,fid,pca-study,resources}``.

Datasets are directories holding one IDX pair, ``*images-idx3-ubyte[.gz]``
and ``*labels-idx1-ubyte[.gz]`` (``train-*`` preferred). The default is
``$LSTMQGAN_DATA`` or ``./data/mnist``.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from .ansatz import count_resources
from .checkpoint import (
    CorruptCheckpoint,
    format_config,
    load_checkpoint,
    parse_config,
    parse_value,
    save_checkpoint,
)
from .data import ImageDataset, downscale, load_dir, toy_profile
from .estimators import LSTMQGAN, PatchQGAN
from .gan.losses import LossKind
from .metrics import FeatureMap, frechet_distance, nearest_neighbor_correlation
from .pca import StandardizedPCA, random_inverse_study
from .pgm import image_grid, read_pgm, write_pgm
from .seeding import stream

METRICS_FIELDS = ("epoch", "gl", "dl", "penalty", "wall_seconds")

# Resolved when neither a flag nor the config file sets a value.
TRAIN_DEFAULTS = {
    "arch": "lstm-qgan",
    "qubits": 7,
    "reps": 2,
    "layers": 2,
    "patches": 4,
    "patch_pixels": 14,
    "hidden_mode": "probabilities",
    "loss": "wgan-gp",
    "lambda_gp": 10.0,
    "critic_steps": None,
    "epochs": 1000,
    "batch_size": 128,
    "lr": 2e-4,
    "seed": 0,
    "toy": False,
    "limit": None,
    "digits": None,
    "save_every": 10,
    "timing": True,
}

# Desk-scale profile: 8x8 images, 3 qubits, 4 strips of 16 pixels.
TOY_OVERRIDES = {
    "qubits": 3,
    "patch_pixels": 8,
    "epochs": 60,
    "batch_size": 64,
    "lr": 2e-3,
    "limit": 512,
}


class UsageError(Exception):
    pass


def _default_data_dir():
    return os.environ.get("LSTMQGAN_DATA", "data/mnist")


def _digits(text):
    if text is None or text == "":
        return None
    if isinstance(text, (list, tuple)):
        return [int(d) for d in text]
    return [int(d) for d in str(text).split(",")]


def load_dataset(data_dir, toy=False, digits=None, limit=None) -> ImageDataset:
    ds = load_dir(data_dir)
    if toy:
        ds = toy_profile(ds)
    return ds.select(digits=_digits(digits), limit=limit)


def match_shape(ds: ImageDataset, shape):
    """Bring a dataset to ``shape`` (toy profile for 8x8, block pooling otherwise)."""
    shape = tuple(shape)
    if ds.source_dims == shape:
        return ds
    if shape == (8, 8) and ds.source_dims == (28, 28):
        return toy_profile(ds)
    rows, cols = ds.source_dims
    if rows % shape[0] == 0 and rows // shape[0] == cols // shape[1] and cols % shape[1] == 0:
        return downscale(ds, rows // shape[0])
    raise UsageError(f"cannot bring {rows}x{cols} images to {shape[0]}x{shape[1]}")


# ---- train ---------------------------------------------------------------------

def resolve_train_config(args):
    """Flags override the config file, which overrides the (toy) defaults."""
    file_values = {}
    if args.config:
        try:
            raw = parse_config(Path(args.config).read_text())
        except ValueError as exc:
            raise UsageError(f"{args.config}: {exc}") from exc
        for key, value in raw.items():
            key = key.replace("-", "_")
            if key not in TRAIN_DEFAULTS:
                raise UsageError(f"{args.config}: unknown key {key!r}")
            file_values[key] = parse_value(value)
    toy = args.toy if args.toy is not None else file_values.get("toy", TRAIN_DEFAULTS["toy"])
    resolved = dict(TRAIN_DEFAULTS)
    if toy:
        resolved.update(TOY_OVERRIDES)
    resolved.update(file_values)
    for key in TRAIN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    resolved["toy"] = bool(toy)
    if resolved["loss"] not in {k.value for k in LossKind}:
        raise UsageError(f"unknown loss {resolved['loss']!r}")
    if resolved["arch"] not in ("lstm-qgan", "patchgan-baseline"):
        raise UsageError(f"unknown architecture {resolved['arch']!r}")
    return resolved


def build_model(cfg, image_shape):
    common = dict(
        image_shape=tuple(image_shape), loss=cfg["loss"], lambda_gp=float(cfg["lambda_gp"]),
        critic_steps=cfg["critic_steps"], learning_rate=float(cfg["lr"]),
        batch_size=int(cfg["batch_size"]), epochs=int(cfg["epochs"]), random_state=int(cfg["seed"]),
    )
    if cfg["arch"] == "lstm-qgan":
        return LSTMQGAN(n_patches=int(cfg["patches"]), n_qubits=int(cfg["qubits"]), reps=int(cfg["reps"]),
                        n_layers=int(cfg["layers"]), hidden_mode=cfg["hidden_mode"], **common)
    return PatchQGAN(n_qubits=int(cfg["qubits"]), patch_pixels=int(cfg["patch_pixels"]),
                     reps=int(cfg["reps"]), **common)


def _write_metrics(path, rows, append, timing):
    mode = "a" if append and path.exists() else "w"
    with open(path, mode, newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if mode == "w":
            writer.writerow(METRICS_FIELDS)
        for r in rows:
            wall = f"{r['wall_seconds']:.6f}" if timing else "0"
            writer.writerow([r["epoch"], repr(r["gl"]), repr(r["dl"]), repr(r["penalty"]), wall])


def cmd_train(args):
    cfg = resolve_train_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = load_dataset(args.data_dir, cfg["toy"], cfg["digits"], cfg["limit"])
    if len(ds) == 0:
        raise RuntimeError("no images selected")
    if args.resume:
        model = load_checkpoint(args.resume)
        model.set_params(epochs=int(cfg["epochs"]))
        ds = match_shape(ds, model.image_shape)
    else:
        model = build_model(cfg, ds.source_dims)
        model._initialize()
    (out / "config.txt").write_text(
        format_config(sorted(cfg.items()) + [("data_dir", args.data_dir), ("images", len(ds))])
    )
    patches = model._patches(ds.images)
    metrics_path = out / "metrics.csv"
    append = bool(args.resume)
    every = max(1, int(cfg["save_every"]))
    sample_rng_seed = int(cfg["seed"])
    while model.n_epochs_done_ < model.epochs:
        row = model._run_epoch(patches)
        _write_metrics(metrics_path, [row], append, cfg["timing"])
        append = True
        print("epoch {epoch}: GL={gl:.6f} DL={dl:.6f} penalty={penalty:.6f}".format(**row))
        done = model.n_epochs_done_
        if done % every == 0 or done == model.epochs:
            save_checkpoint(model, out / f"checkpoint-{done:04d}.qlg")
            save_checkpoint(model, out / "checkpoint.qlg")
            grid = image_grid(model.sample(16, random_state=sample_rng_seed), model.image_shape)
            write_pgm(out / f"samples-{done:04d}.pgm", grid)
    if not metrics_path.exists():
        _write_metrics(metrics_path, [], False, cfg["timing"])
        save_checkpoint(model, out / "checkpoint.qlg")
    return 0


# ---- generate ------------------------------------------------------------------

def cmd_generate(args):
    model = load_checkpoint(args.checkpoint)
    if args.n < 0:
        raise UsageError("-n must be >= 0")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.n == 0:
        return 0
    images = model.sample(args.n, random_state=args.seed)
    for k, img in enumerate(images):
        write_pgm(out / f"sample-{k:05d}.pgm", img.reshape(model.image_shape))
    print(f"wrote {args.n} images to {out}")
    return 0


# ---- fid -----------------------------------------------------------------------

def _read_image_dir(path):
    files = sorted(Path(path).glob("*.pgm"))
    if not files:
        return np.zeros((0, 0)), None
    imgs = [read_pgm(f) for f in files]
    shape = imgs[0].shape
    if any(i.shape != shape for i in imgs):
        raise RuntimeError(f"{path}: images differ in size")
    return np.stack([i.ravel() for i in imgs]) / 255.0, shape


def _class_dirs(path):
    return {p.name: p for p in sorted(Path(path).iterdir()) if p.is_dir() and p.name.isdigit()}


def _pick(images, n, rng):
    if len(images) <= n:
        return images
    return images[np.sort(rng.choice(len(images), size=n, replace=False))]


def _score(real, gen, args, rng):
    real, gen = _pick(real, args.n, rng), _pick(gen, args.n, rng)
    if len(real) < 2 or len(gen) < 2:
        raise RuntimeError(f"insufficient samples: {len(real)} real, {len(gen)} generated (need >= 2)")
    fmap = FeatureMap(args.features, args.k).fit(real)
    return frechet_distance(fmap(real), fmap(gen))


def cmd_fid(args):
    rng = stream(args.seed, "sample")
    groups = []  # (label, real images, generated images)
    if args.checkpoint:
        if args.per_class:
            raise UsageError("--per-class needs a directory of class-labelled generated images")
        model = load_checkpoint(args.checkpoint)
        gen_all, gen_shape = model.sample(args.n, random_state=args.seed), tuple(model.image_shape)
    else:
        gen_all, gen_shape = None, None

    if args.real_data:
        ds = load_dir(args.real_data)
        if gen_shape is None and args.gen:
            probe = _class_dirs(args.gen) if args.per_class else {}
            probe_dir = next(iter(probe.values())) if probe else args.gen
            gen_shape = _read_image_dir(probe_dir)[1]
        if gen_shape is not None:
            ds = match_shape(ds, gen_shape)
        if args.per_class:
            for label, path in _class_dirs(args.gen).items():
                groups.append((label, ds.images[ds.labels == int(label)], _read_image_dir(path)[0]))
        else:
            gen = gen_all if gen_all is not None else _read_image_dir(args.gen)[0]
            groups.append(("all", ds.images, gen))
    else:
        if args.per_class:
            real_dirs, gen_dirs = _class_dirs(args.real), _class_dirs(args.gen)
            for label in sorted(set(real_dirs) & set(gen_dirs), key=int):
                real = _read_image_dir(real_dirs[label])[0]
                groups.append((label, real, _read_image_dir(gen_dirs[label])[0]))
        else:
            real = _read_image_dir(args.real)[0]
            gen = gen_all if gen_all is not None else _read_image_dir(args.gen)[0]
            groups.append(("all", real, gen))
    if not groups:
        raise RuntimeError("no class subdirectories in common")

    rows = []
    for label, real, gen in groups:
        if real.size and gen.size and real.shape[1] != gen.shape[1]:
            raise RuntimeError(f"image sizes differ: {real.shape[1]} vs {gen.shape[1]} pixels")
        score = _score(real, gen, args, rng)
        rows.append((label, score.value, score.n_real, score.n_gen))
    if args.per_class:
        rows.append(("mean", float(np.mean([r[1] for r in rows])), "", ""))
    for label, value, n_real, n_gen in rows:
        print(f"{label}\t{value:.6f}\t{n_real}\t{n_gen}")
    if args.csv:
        path = Path(args.csv)
        new = not path.exists()
        with open(path, "a", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            if new:
                writer.writerow(["label", "fid", "n_real", "n_gen", "features"])
            for row in rows:
                writer.writerow([row[0], repr(row[1]), row[2], row[3], args.features])
    return 0


# ---- pca-study -------------------------------------------------------------------

def cmd_pca_study(args):
    ds = load_dataset(args.data_dir, limit=args.limit)
    model = StandardizedPCA(args.k).fit(ds.images)
    images = random_inverse_study(model, args.n_images, seed=args.seed)
    noise = stream(args.seed, "study", 1).uniform(size=images.shape)
    shape = ds.source_dims
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k, img in enumerate(images):
        write_pgm(out / f"random-inverse-{k:03d}.pgm", img.reshape(shape))
    write_pgm(out / "random-inverse-grid.pgm", image_grid(images, shape))
    recon = np.clip(model.inverse_transform(model.transform(ds.images[:8])), 0, 1)
    write_pgm(out / "reconstruction-grid.pgm", image_grid(np.vstack([ds.images[:8], recon]), shape))
    corr_pca = nearest_neighbor_correlation(images, ds.images)
    corr_noise = nearest_neighbor_correlation(noise, ds.images)
    print("eigenvalues\t" + "\t".join(f"{v:.6f}" for v in model.eigenvalues_))
    print(f"nn_correlation_random_inverse\t{corr_pca:.6f}")
    print(f"nn_correlation_uniform_noise\t{corr_noise:.6f}")
    return 0


# ---- resources -------------------------------------------------------------------

RESOURCE_ROWS = (
    ("Qubits per QNN", "qubits_per_qnn"),
    ("Number of QNNs", "qnn_count"),
    ("Total Number of Qubits", "total_qubits"),
    ("Total Number of 1QG", "total_1qg"),
    ("Total Number of 2QG", "total_2qg"),
)


def cmd_resources(args):
    report = count_resources(args.arch, n_qubits=args.qubits, reps=args.reps, qnn_count=args.qnns).as_dict()
    width = max(len(label) for label, _ in RESOURCE_ROWS)
    print(f"architecture: {args.arch}")
    for label, key in RESOURCE_ROWS:
        print(f"{label:<{width}}  {report[key]:>6}")
    print()
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["arch"] + [key for _, key in RESOURCE_ROWS])
    writer.writerow([args.arch] + [report[key] for _, key in RESOURCE_ROWS])
    return 0


# ---- parser ----------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="lstmqgan", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a generator")
    p.add_argument("--config", help="key=value config file (flags take precedence)")
    p.add_argument("--data-dir", default=_default_data_dir())
    p.add_argument("--out", default="runs/train")
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--arch", choices=["lstm-qgan", "patchgan-baseline"])
    p.add_argument("--qubits", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--patches", type=int, help="row strips (time steps) per image")
    p.add_argument("--patch-pixels", type=int, help="pixels per baseline sub-generator")
    p.add_argument("--hidden-mode", choices=["probabilities", "pauliz"])
    p.add_argument("--loss", choices=[k.value for k in LossKind])
    p.add_argument("--lambda-gp", type=float)
    p.add_argument("--critic-steps", type=int)
    p.add_argument("--epochs", type=int, help="total epochs (a resumed run continues up to this)")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--digits", help="comma-separated labels to keep, e.g. 0,1")
    p.add_argument("--limit", type=int, help="use at most this many images")
    p.add_argument("--save-every", type=int)
    p.add_argument("--toy", action="store_true", default=None,
                   help="desk-scale profile: 8x8 images, 3 qubits, 4 strips")
    p.add_argument("--no-timing", dest="timing", action="store_false", default=None,
                   help="write wall_seconds as 0 so reruns are byte-identical")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="write generated images as PGM files")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("-n", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs/generated")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fid", help="Fréchet distance between real and generated images")
    real = p.add_mutually_exclusive_group(required=True)
    real.add_argument("--real", help="directory of real PGM images")
    real.add_argument("--real-data", help="IDX dataset directory")
    gen = p.add_mutually_exclusive_group(required=True)
    gen.add_argument("--gen", help="directory of generated PGM images")
    gen.add_argument("--checkpoint", help="generate images from this checkpoint")
    p.add_argument("--features", choices=["raw", "pca"], default="raw")
    p.add_argument("--k", type=int, default=32, help="components for --features pca")
    p.add_argument("-n", type=int, default=500, help="images per side")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-class", action="store_true",
                   help="score each class subdirectory (0..9) separately and add a mean row")
    p.add_argument("--csv", help="append result rows to this CSV file")
    p.set_defaults(func=cmd_fid)

    p = sub.add_parser("pca-study", help="decode random score vectors through inverse PCA")
    p.add_argument("--data-dir", default=_default_data_dir())
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n-images", type=int, default=16)
    p.add_argument("--limit", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs/pca-study")
    p.set_defaults(func=cmd_pca_study)

    p = sub.add_parser("resources", help="native-gate resource table")
    p.add_argument("arch", choices=["lstm-qgan", "patchgan"])
    p.add_argument("--qubits", type=int)
    p.add_argument("--reps", type=int, default=2)
    p.add_argument("--qnns", type=int)
    p.set_defaults(func=cmd_resources)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (CorruptCheckpoint, FileNotFoundError, RuntimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
