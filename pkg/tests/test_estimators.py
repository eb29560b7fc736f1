import struct

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lstmqgan import LSTMQGAN, PatchQGAN
from lstmqgan.checkpoint import CorruptCheckpoint, load_checkpoint, parse_config, save_checkpoint
from lstmqgan.data import toy_profile
from lstmqgan.gan.training import generator_gradient


@pytest.fixture(scope="module")
def toy_images():
    from lstmqgan.data import load_dir
    from conftest import MNIST_DIR

    return toy_profile(load_dir(MNIST_DIR).select(limit=64)).images


def small(**kw):
    base = dict(n_qubits=2, n_layers=1, reps=1, batch_size=32, epochs=1, learning_rate=1e-3)
    base.update(kw)
    return LSTMQGAN(**base)


def test_get_params_and_clone():
    model = small(random_state=4)
    params = model.get_params()
    assert params["n_qubits"] == 2 and params["random_state"] == 4
    assert clone(model).get_params() == params


def test_input_validation(toy_images):
    with pytest.raises(ValueError, match="pixels"):
        small().fit(toy_images[:, :10])
    with pytest.raises(ValueError, match="range|lie in"):
        small().fit(toy_images * 3)
    with pytest.raises(ValueError):
        small(loss="hinge").fit(toy_images)
    with pytest.raises(NotFittedError):
        small().sample(2)


def test_fit_history_and_sample(toy_images):
    model = small(epochs=2).fit(toy_images)
    assert model.n_epochs_done_ == 2
    assert [h["epoch"] for h in model.history_] == [0, 1]
    imgs = model.sample(5, random_state=1)
    assert imgs.shape == (5, 64) and imgs.min() >= 0 and imgs.max() <= 1
    assert np.array_equal(imgs, model.sample(5, random_state=1))
    assert not np.array_equal(imgs, model.sample(5, random_state=2))
    assert model.sample(0).shape == (0, 64)


def test_fit_deterministic(toy_images):
    a = small(epochs=2).fit(toy_images)
    b = small(epochs=2).fit(toy_images)
    for x, y in zip(a.generator_.params.arrays(), b.generator_.params.arrays()):
        assert np.array_equal(x, y)
    assert a.history_[-1]["dl"] == b.history_[-1]["dl"]


def test_partial_fit_equals_fit(toy_images):
    full = small(epochs=2).fit(toy_images)
    stepwise = small(epochs=2).partial_fit(toy_images).partial_fit(toy_images)
    assert np.array_equal(full.sample(3), stepwise.sample(3))


def test_patchgan_estimator(toy_images):
    model = PatchQGAN(n_qubits=3, patch_pixels=8, reps=1, batch_size=32, epochs=1).fit(toy_images)
    assert model.generator_.n_patches == 8
    assert model.sample(2).shape == (2, 64)
    with pytest.raises(ValueError, match="tile"):
        PatchQGAN(patch_pixels=7).fit(toy_images)


@pytest.mark.parametrize("cls", [LSTMQGAN, PatchQGAN])
def test_checkpoint_roundtrip(tmp_path, toy_images, cls):
    kw = dict(reps=1, batch_size=32, epochs=1)
    model = (small(**kw) if cls is LSTMQGAN else PatchQGAN(**kw)).fit(toy_images)
    save_checkpoint(model, tmp_path / "m.qlg")
    loaded = load_checkpoint(tmp_path / "m.qlg")
    assert type(loaded) is cls
    assert loaded.get_params() == model.get_params()
    assert loaded.n_epochs_done_ == 1 and loaded.gen_opt_.t == model.gen_opt_.t
    before = model.discriminator_.arrays() + model.disc_opt_.v
    for x, y in zip(before, loaded.discriminator_.arrays() + loaded.disc_opt_.v):
        assert np.array_equal(x, y)
    assert np.array_equal(model.sample(4), loaded.sample(4))
    save_checkpoint(loaded, tmp_path / "again.qlg")
    assert (tmp_path / "m.qlg").read_bytes() == (tmp_path / "again.qlg").read_bytes()


def test_resumed_loss_equals_fresh_forward(tmp_path, toy_images):
    model = small().fit(toy_images)
    save_checkpoint(model, tmp_path / "m.qlg")
    loaded = load_checkpoint(tmp_path / "m.qlg")
    z = np.random.default_rng(0).normal(size=(8, 4, 2))
    a, _ = generator_gradient(model.generator_, model.discriminator_, z, "wgan-gp")
    b, _ = generator_gradient(loaded.generator_, loaded.discriminator_, z, "wgan-gp")
    assert a == b


def test_resume_continues_identically(tmp_path, toy_images):
    straight = small(epochs=3).fit(toy_images)
    first = small(epochs=3).partial_fit(toy_images)
    save_checkpoint(first, tmp_path / "m.qlg")
    resumed = load_checkpoint(tmp_path / "m.qlg")
    resumed.partial_fit(toy_images).partial_fit(toy_images)
    assert resumed.n_epochs_done_ == 3
    assert np.array_equal(straight.sample(4), resumed.sample(4))


def test_corrupt_checkpoints(tmp_path, toy_images):
    model = small().fit(toy_images)
    save_checkpoint(model, tmp_path / "m.qlg")
    raw = (tmp_path / "m.qlg").read_bytes()
    cases = {
        "magic": b"XXXX" + raw[4:],
        "version": raw[:4] + struct.pack("<I", 9) + raw[8:],
        "truncated": raw[:-16],
        "short": raw[:6],
    }
    for name, data in cases.items():
        (tmp_path / name).write_bytes(data)
        with pytest.raises(CorruptCheckpoint, match="corrupt checkpoint"):
            load_checkpoint(tmp_path / name)


def test_parse_config():
    cfg = parse_config("# comment\n\nlr = 0.01  # trailing\nloss=bce\n")
    assert cfg == {"lr": "0.01", "loss": "bce"}
    with pytest.raises(ValueError):
        parse_config("novalue\n")
