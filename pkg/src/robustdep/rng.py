"""Counter-based random streams.

Every stream is a Philox generator keyed by ``(seed, index)``, so the draws
of replication ``index`` depend on nothing but those two integers.  This is
what makes Monte Carlo output independent of chunking and worker count.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

_U64 = 2**64


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for replication ``index`` under ``seed``."""
    if not (0 <= int(seed) < _U64 and 0 <= int(index) < _U64):
        raise ConfigError(f"seed and index must be unsigned 64-bit integers, got {seed}, {index}")
    key = np.array([int(seed), int(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def open_uniform(gen: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniforms on the open interval (0, 1)."""
    u = gen.random(n)
    u[u == 0.0] = 2.0**-54
    return u
