"""Versioned binary checkpoints.

Layout::

    b"QLG1"                      magic
    uint32 LE                    format version (1)
    uint32 LE + bytes            config block: UTF-8 ``key=value`` lines
    uint64 LE                    number of float64 values that follow
    float64 LE ...               generator, discriminator, generator ADAM m, v,
                                 discriminator ADAM m, v; each in declared field order
"""
from __future__ import annotations

import ast
import struct
from pathlib import Path

import numpy as np

from .estimators import ESTIMATORS

MAGIC = b"QLG1"
VERSION = 1


class CorruptCheckpoint(ValueError):
    pass


def format_config(items):
    return "".join(f"{k}={v}\n" for k, v in items)


def parse_value(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config(text):
    """Flat ``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _state_arrays(model):
    return (
        model.generator_.params.arrays()
        + model.discriminator_.arrays()
        + model.gen_opt_.m + model.gen_opt_.v
        + model.disc_opt_.m + model.disc_opt_.v
    )


def save_checkpoint(model, path):
    items = [("arch", model.arch)]
    items += sorted(model.get_params().items())
    items += [
        ("epochs_done", model.n_epochs_done_),
        ("gen_adam_t", model.gen_opt_.t),
        ("disc_adam_t", model.disc_opt_.t),
    ]
    config = format_config(items).encode()
    values = np.concatenate([a.ravel() for a in _state_arrays(model)]).astype("<f8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(config)))
        f.write(config)
        f.write(struct.pack("<Q", values.size))
        f.write(values.tobytes())


def load_checkpoint(path):
    """Rebuild a fitted estimator (including optimizer state) from ``path``."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise CorruptCheckpoint(f"corrupt checkpoint {path}: bad magic")
    try:
        version, clen = struct.unpack("<II", raw[4:12])
        if version != VERSION:
            raise CorruptCheckpoint(f"corrupt checkpoint {path}: unsupported version {version}")
        config = {k: parse_value(v) for k, v in parse_config(raw[12:12 + clen].decode()).items()}
        pos = 12 + clen
        (count,) = struct.unpack("<Q", raw[pos:pos + 8])
        values = np.frombuffer(raw, dtype="<f8", count=count, offset=pos + 8)
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        if isinstance(exc, CorruptCheckpoint):
            raise
        raise CorruptCheckpoint(f"corrupt checkpoint {path}: {exc}") from exc
    cls = ESTIMATORS.get(config.pop("arch", None))
    if cls is None:
        raise CorruptCheckpoint(f"corrupt checkpoint {path}: unknown architecture")
    epochs_done = config.pop("epochs_done")
    gen_t, disc_t = config.pop("gen_adam_t"), config.pop("disc_adam_t")
    model = cls(**config)._initialize()
    targets = _state_arrays(model)
    if sum(a.size for a in targets) != values.size:
        raise CorruptCheckpoint(f"corrupt checkpoint {path}: array sizes do not match config")
    pos = 0
    for a in targets:
        a[...] = values[pos:pos + a.size].reshape(a.shape)
        pos += a.size
    model.gen_opt_.t, model.disc_opt_.t = gen_t, disc_t
    model.n_epochs_done_ = epochs_done
    return model
