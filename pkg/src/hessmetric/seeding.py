"""Deterministic seed streams.

Every stochastic operation draws from its own generator, derived from the
master seed by a documented counter scheme: the spawn key is
(crc32(operation), crc32(scenario key), counter).  Identical master seeds
therefore reproduce identical streams regardless of call order.
"""

from __future__ import annotations

import zlib

import numpy as np


def _tag(s: str) -> int:
    return zlib.crc32(s.encode("utf-8"))


def stream(master_seed: int, operation: str, scenario_key: str = "",
           counter: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(master_seed),
                                spawn_key=(_tag(operation), _tag(scenario_key),
                                           int(counter)))
    return np.random.default_rng(ss)
