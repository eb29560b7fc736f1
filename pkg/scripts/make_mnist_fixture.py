"""Convert the digit JSON shipped with the npm ``mnist`` package into IDX files.

The npm package (cazala/mnist, v1.1.0) bundles 10 000 MNIST digits as
``src/digits/<label>.json`` with pixels already divided by 255 and rounded to
three decimals. We undo the scaling, interleave the classes with a fixed
permutation and write gzipped big-endian IDX files.

Usage::

    npm pack mnist && tar xzf mnist-1.1.0.tgz
    python scripts/make_mnist_fixture.py package/src/digits data/mnist
"""
import gzip
import json
import struct
import sys
from pathlib import Path

import numpy as np


def main(src, dst):
    src, dst = Path(src), Path(dst)
    images, labels = [], []
    for label in range(10):
        flat = json.loads((src / f"{label}.json").read_text())["data"]
        digits = np.asarray(flat, dtype=np.float64).reshape(-1, 784)
        images.append(np.clip(np.rint(digits * 255.0), 0, 255).astype(np.uint8))
        labels.append(np.full(len(digits), label, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(0).permutation(len(labels))
    images, labels = images[order], labels[order]

    dst.mkdir(parents=True, exist_ok=True)
    with gzip.GzipFile(dst / "mnist10k-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 2051, len(images), 28, 28))
        f.write(images.tobytes())
    with gzip.GzipFile(dst / "mnist10k-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.tobytes())
    print(f"wrote {len(labels)} digits to {dst}")


if __name__ == "__main__":
    main(*sys.argv[1:3])
