"""Tiny helpers for parameter containers made of numpy arrays."""
from __future__ import annotations

import dataclasses

import numpy as np


class ArrayParams:
    """Mixin for dataclasses whose fields are float arrays (or lists of ArrayParams).

    ``arrays()`` flattens in declared field order; checkpoints and the
    optimizer rely on that order.
    """

    def arrays(self):
        out = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, list):
                for item in value:
                    out.extend(item.arrays())
            else:
                out.append(value)
        return out

    def map(self, fn):
        kwargs = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, list):
                kwargs[f.name] = [item.map(fn) for item in value]
            else:
                kwargs[f.name] = fn(value)
        return type(self)(**kwargs)

    def copy(self):
        return self.map(np.copy)

    def zeros_like(self):
        return self.map(np.zeros_like)

    def load_arrays(self, arrays):
        """Copy values from ``arrays`` (same order and shapes) into this container."""
        mine = self.arrays()
        if len(mine) != len(arrays):
            raise ValueError(f"expected {len(mine)} arrays, got {len(arrays)}")
        for dst, src in zip(mine, arrays):
            src = np.asarray(src, dtype=np.float64)
            if dst.shape != src.shape:
                raise ValueError(f"shape mismatch: {dst.shape} vs {src.shape}")
            dst[...] = src
        return self

    def size(self):
        return sum(a.size for a in self.arrays())

    def flat(self):
        return np.concatenate([a.ravel() for a in self.arrays()])


def uniform_fan_in(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)
