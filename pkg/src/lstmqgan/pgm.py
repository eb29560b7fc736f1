"""Binary 8-bit PGM ("P5") read/write."""
from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np


def to_bytes(image):
    """Map [0, 1] pixels to 0..255, rounding half up; out-of-range values are clamped."""
    image = np.asarray(image, dtype=np.float64)
    if image.size and (image.min() < 0 or image.max() > 1):
        warnings.warn("pixels outside [0, 1] clamped before export", RuntimeWarning, stacklevel=3)
        image = np.clip(image, 0.0, 1.0)
    return np.floor(image * 255.0 + 0.5).astype(np.uint8)


def write_pgm(path, image):
    """Write a 2-D image with values in [0, 1]."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {image.shape}")
    rows, cols = image.shape
    data = to_bytes(image)
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (cols, rows))
        f.write(data.tobytes())


def read_pgm(path):
    """Return the raw 0..255 pixel grid of a binary PGM file."""
    raw = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        if pos >= len(raw):
            raise ValueError(f"{path}: truncated header")
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        fields.append(raw[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows, maxval = (int(x) for x in fields[1:])
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM supported")
    body = raw[pos + 1: pos + 1 + rows * cols]
    if len(body) != rows * cols:
        raise ValueError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(rows, cols)


def image_grid(images, shape, ncols=8, pad=1):
    """Tile flat images of ``shape`` into one grid image (padding is black)."""
    images = np.asarray(images).reshape((-1,) + tuple(shape))
    n = len(images)
    ncols = max(1, min(ncols, n))
    nrows = -(-n // ncols)
    r, c = shape
    grid = np.zeros((nrows * (r + pad) + pad, ncols * (c + pad) + pad))
    for k, img in enumerate(images):
        i, j = divmod(k, ncols)
        grid[pad + i * (r + pad): pad + i * (r + pad) + r, pad + j * (c + pad): pad + j * (c + pad) + c] = img
    return grid
