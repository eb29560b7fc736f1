import gzip
import os
import struct

import numpy as np
import pytest

from lstmqgan.data import (
    IdxFormatError,
    ImageDataset,
    PatchLayout,
    center_crop,
    downscale,
    extract_patches,
    find_idx_pair,
    load_dir,
    load_idx,
    reassemble_patches,
    toy_profile,
)


def write_idx(path, magic, dims, payload):
    # written with struct alone, independent of the reader
    with open(path, "wb") as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(bytes(payload))


@pytest.fixture
def fixture_pair(tmp_path):
    pixels = list(range(0, 256, 32)) + [255, 0, 7, 128, 64, 3, 250, 1]  # 2 images of 2x4
    write_idx(tmp_path / "t-images-idx3-ubyte", 2051, (2, 2, 4), pixels)
    write_idx(tmp_path / "t-labels-idx1-ubyte", 2049, (2,), [3, 9])
    return tmp_path, pixels


def test_fixture_pixels_exact(fixture_pair):
    d, pixels = fixture_pair
    ds = load_idx(d / "t-images-idx3-ubyte", d / "t-labels-idx1-ubyte")
    assert ds.source_dims == (2, 4)
    assert ds.images.shape == (2, 8)
    np.testing.assert_array_equal(ds.images.ravel() * 255, pixels)
    np.testing.assert_array_equal(ds.labels, [3, 9])


def test_gzip_fixture(fixture_pair, tmp_path):
    d, pixels = fixture_pair
    for name in ("t-images-idx3-ubyte", "t-labels-idx1-ubyte"):
        (d / (name + ".gz")).write_bytes(gzip.compress((d / name).read_bytes()))
    ds = load_idx(d / "t-images-idx3-ubyte.gz", d / "t-labels-idx1-ubyte.gz")
    np.testing.assert_array_equal(ds.images.ravel() * 255, pixels)


def test_labels_with_image_magic(tmp_path, fixture_pair):
    d, _ = fixture_pair
    write_idx(tmp_path / "bad-labels", 2051, (2,), [1, 2])
    with pytest.raises(IdxFormatError, match="bad magic"):
        load_idx(d / "t-images-idx3-ubyte", tmp_path / "bad-labels")


def test_truncated(tmp_path, fixture_pair):
    d, _ = fixture_pair
    raw = (d / "t-images-idx3-ubyte").read_bytes()
    (tmp_path / "short").write_bytes(raw[:-3])
    with pytest.raises(IdxFormatError, match="truncated"):
        load_idx(tmp_path / "short", d / "t-labels-idx1-ubyte")
    (tmp_path / "tiny").write_bytes(raw[:5])
    with pytest.raises(IdxFormatError, match="truncated"):
        load_idx(tmp_path / "tiny", d / "t-labels-idx1-ubyte")


def test_count_mismatch(tmp_path, fixture_pair):
    d, _ = fixture_pair
    write_idx(tmp_path / "three-labels", 2049, (3,), [1, 2, 3])
    with pytest.raises(IdxFormatError, match="count mismatch"):
        load_idx(d / "t-images-idx3-ubyte", tmp_path / "three-labels")


def test_find_prefers_train(tmp_path, fixture_pair):
    d, _ = fixture_pair
    for name in ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"):
        (d / name).write_bytes((d / ("t-" + name.split("-", 1)[1])).read_bytes())
    imgs, labels = find_idx_pair(d)
    assert imgs.name.startswith("train") and labels.name.startswith("train")
    (tmp_path / "empty").mkdir()
    with pytest.raises(FileNotFoundError):
        find_idx_pair(tmp_path / "empty")


def test_bundled_mnist(mnist):
    assert len(mnist) == 10000
    assert mnist.source_dims == (28, 28)
    assert set(np.unique(mnist.labels)) == set(range(10))
    assert mnist.images.min() == 0.0 and mnist.images.max() == 1.0


def test_dataset_validation():
    with pytest.raises(ValueError):
        ImageDataset(np.full((1, 4), 1.5), [0], (2, 2))
    with pytest.raises(ValueError):
        ImageDataset(np.zeros((2, 4)), [0], (2, 2))
    with pytest.raises(ValueError):
        ImageDataset(np.zeros((1, 4)), [10], (2, 2))
    with pytest.raises(ValueError):
        ImageDataset(np.zeros((1, 5)), [0], (2, 2))


def test_select():
    ds = ImageDataset(np.zeros((6, 1)), [0, 1, 2, 1, 0, 1], (1, 1))
    np.testing.assert_array_equal(ds.select(digits=[1]).labels, [1, 1, 1])
    assert len(ds.select(digits=[0, 1], limit=2)) == 2
    assert len(ds.select(limit=4)) == 4


# ---- patches ---------------------------------------------------------------

def test_mnist_layout_196():
    layout = PatchLayout(4, 28, 28)
    assert layout.patch_dim == 196


def test_strip_rows(rng):
    img = rng.uniform(size=(1, 784))
    patches = extract_patches(img, PatchLayout(4, 28, 28))
    assert patches.shape == (1, 4, 196)
    grid = img.reshape(28, 28)
    for t in range(4):
        np.testing.assert_array_equal(patches[0, t], grid[7 * t: 7 * (t + 1)].ravel())


def test_single_strip(rng):
    img = rng.uniform(size=(3, 64))
    np.testing.assert_array_equal(extract_patches(img, PatchLayout(1, 8, 8))[:, 0], img)


def test_layout_errors(rng):
    with pytest.raises(ValueError):
        PatchLayout(3, 28, 28)
    with pytest.raises(ValueError):
        extract_patches(rng.uniform(size=(1, 10)), PatchLayout(4, 28, 28))
    with pytest.raises(ValueError):
        reassemble_patches(np.zeros((1, 4, 195)), PatchLayout(4, 28, 28))


def test_roundtrip_all_mnist(mnist):
    layout = PatchLayout(4, 28, 28)
    back = reassemble_patches(extract_patches(mnist, layout), layout)
    assert np.array_equal(back, mnist.images)


# ---- shrinking -------------------------------------------------------------

def test_downscale_constant():
    ds = ImageDataset(np.full((2, 784), 0.37), [0, 1], (28, 28))
    small = downscale(ds, 2)
    assert small.source_dims == (14, 14)
    np.testing.assert_allclose(small.images, 0.37, atol=1e-15)


def test_downscale_checker():
    grid = np.indices((28, 28)).sum(axis=0) % 2
    ds = ImageDataset(grid.reshape(1, -1).astype(float), [0], (28, 28))
    np.testing.assert_array_equal(downscale(ds, 2).images, 0.5)


def test_downscale_bad_factor():
    ds = ImageDataset(np.zeros((1, 784)), [0], (28, 28))
    with pytest.raises(ValueError):
        downscale(ds, 3)


def test_toy_profile(mnist):
    small = toy_profile(mnist.subset(slice(0, 5)))
    assert small.source_dims == (8, 8)
    crop = center_crop(mnist.subset(slice(0, 5)), 24).images.reshape(5, 24, 24)
    np.testing.assert_allclose(small.images.reshape(5, 8, 8)[:, 2, 5], crop[:, 6:9, 15:18].mean(axis=(1, 2)))


@pytest.mark.skipif("LSTMQGAN_MNIST_FULL" not in os.environ, reason="set LSTMQGAN_MNIST_FULL to the official files")
def test_official_train_files():
    ds = load_dir(os.environ["LSTMQGAN_MNIST_FULL"])
    assert len(ds) == 60000 and ds.source_dims == (28, 28)
