"""MNIST ingestion (IDX format), row-strip patching and desk-scale shrinking."""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049


class IdxFormatError(ValueError):
    pass


@dataclass
class ImageDataset:
    images: np.ndarray  # (n, rows * cols), values in [0, 1]
    labels: np.ndarray  # (n,)
    source_dims: tuple

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.images.ndim != 2 or self.images.shape[1] != self.source_dims[0] * self.source_dims[1]:
            raise ValueError(f"images of shape {self.images.shape} do not match dims {self.source_dims}")
        if len(self.images) != len(self.labels):
            raise ValueError("image and label counts differ")
        if self.images.size and (self.images.min() < 0 or self.images.max() > 1):
            raise ValueError("pixels must lie in [0, 1]")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() > 9):
            raise ValueError("labels must lie in 0..9")

    def __len__(self):
        return len(self.labels)

    def subset(self, index):
        return ImageDataset(self.images[index], self.labels[index], self.source_dims)

    def select(self, digits=None, limit=None):
        """Keep only ``digits`` (iterable of labels) and at most ``limit`` images."""
        keep = np.arange(len(self))
        if digits is not None:
            keep = keep[np.isin(self.labels, list(digits))]
        if limit is not None:
            keep = keep[:limit]
        return self.subset(keep)


def _read(path):
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def _parse(raw, magic, path):
    if len(raw) < 8:
        raise IdxFormatError(f"{path}: truncated header")
    found, count = struct.unpack(">II", raw[:8])
    if found != magic:
        raise IdxFormatError(f"{path}: bad magic {found}, expected {magic}")
    if magic == IMAGE_MAGIC:
        if len(raw) < 16:
            raise IdxFormatError(f"{path}: truncated header")
        rows, cols = struct.unpack(">II", raw[8:16])
        body, shape = raw[16:], (count, rows, cols)
    else:
        body, shape = raw[8:], (count,)
    expected = int(np.prod(shape))
    if len(body) < expected:
        raise IdxFormatError(f"{path}: truncated file ({len(body)} of {expected} bytes)")
    return np.frombuffer(body, dtype=np.uint8, count=expected).reshape(shape)


def load_idx(images_path, labels_path) -> ImageDataset:
    """Read an IDX image/label pair (optionally gzipped); pixels are scaled to [0, 1]."""
    images = _parse(_read(images_path), IMAGE_MAGIC, images_path)
    labels = _parse(_read(labels_path), LABEL_MAGIC, labels_path)
    if len(images) != len(labels):
        raise IdxFormatError(f"count mismatch: {len(images)} images vs {len(labels)} labels")
    n, rows, cols = images.shape
    return ImageDataset(images.reshape(n, rows * cols) / 255.0, labels.astype(np.int64), (rows, cols))


def find_idx_pair(directory):
    """Locate ``*images-idx3-ubyte[.gz]`` and ``*labels-idx1-ubyte[.gz]`` in a directory.

    ``train-*`` files win over others when several are present.
    """
    directory = Path(directory)
    found = []
    for kind in ("images-idx3-ubyte", "labels-idx1-ubyte"):
        hits = sorted(directory.glob(f"*{kind}*"), key=lambda p: (not p.name.startswith("train"), p.name))
        if not hits:
            raise FileNotFoundError(f"no *{kind}* file in {directory}")
        found.append(hits[0])
    return tuple(found)


def load_dir(directory) -> ImageDataset:
    return load_idx(*find_idx_pair(directory))


@dataclass(frozen=True)
class PatchLayout:
    strips: int
    rows: int
    cols: int

    def __post_init__(self):
        if self.strips < 1 or self.rows % self.strips:
            raise ValueError(f"{self.rows} rows cannot be split into {self.strips} whole-row strips")

    @property
    def patch_dim(self):
        return self.rows // self.strips * self.cols

    @property
    def image_dim(self):
        return self.rows * self.cols


def _pixels(data):
    return data.images if isinstance(data, ImageDataset) else np.atleast_2d(np.asarray(data))


def extract_patches(data, layout: PatchLayout) -> np.ndarray:
    """``(n, T, patch_dim)`` horizontal strips, top to bottom."""
    images = _pixels(data)
    if images.shape[-1] != layout.image_dim:
        raise ValueError(f"images have {images.shape[-1]} pixels, layout expects {layout.image_dim}")
    return images.reshape(images.shape[0], layout.strips, layout.patch_dim)


def reassemble_patches(patches, layout: PatchLayout) -> np.ndarray:
    patches = np.asarray(patches)
    if patches.shape[-2:] != (layout.strips, layout.patch_dim):
        raise ValueError(f"patches {patches.shape} do not match layout {layout}")
    return patches.reshape(patches.shape[:-2] + (layout.image_dim,))


def downscale(dataset: ImageDataset, factor: int) -> ImageDataset:
    """Block-mean pooling by ``factor`` in both directions."""
    rows, cols = dataset.source_dims
    if factor < 1 or rows % factor or cols % factor:
        raise ValueError(f"factor {factor} does not divide image dims {rows}x{cols}")
    r, c = rows // factor, cols // factor
    pooled = dataset.images.reshape(-1, r, factor, c, factor).mean(axis=(2, 4))
    return ImageDataset(pooled.reshape(-1, r * c), dataset.labels, (r, c))


def center_crop(dataset: ImageDataset, size: int) -> ImageDataset:
    rows, cols = dataset.source_dims
    if size > min(rows, cols):
        raise ValueError(f"crop {size} larger than {rows}x{cols}")
    top, left = (rows - size) // 2, (cols - size) // 2
    imgs = dataset.images.reshape(-1, rows, cols)[:, top: top + size, left: left + size]
    return ImageDataset(imgs.reshape(-1, size * size), dataset.labels, (size, size))


def toy_profile(dataset: ImageDataset) -> ImageDataset:
    """28x28 -> center 24x24 -> 3x3 block mean -> 8x8."""
    return downscale(center_crop(dataset, 24), 3)
