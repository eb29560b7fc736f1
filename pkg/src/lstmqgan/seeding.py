"""Named random sub-streams derived from one root seed."""
import zlib

import numpy as np

STREAMS = ("init", "shuffle", "noise", "epsilon", "sample", "study")


def stream(seed, name, *keys):
    """Independent generator for ``(seed, name, *keys)``.

    Streams are keyed, not consumed, so resuming at epoch k reproduces the
    exact draws an uninterrupted run would have made.
    """
    tag = zlib.crc32(name.encode())
    return np.random.default_rng([int(seed), tag, *[int(k) for k in keys]])
