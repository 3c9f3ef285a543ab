"""Deterministic seed derivation for parallel and restarted runs.

Every random draw in the package flows through a generator built here, so a
result depends only on the root seed and the integer key path, never on
worker count or scheduling order.
"""

from __future__ import annotations

import numpy as np


def child_rng(root_seed, *key):
    """Generator for the child stream identified by an integer key path."""
    ss = np.random.SeedSequence(entropy=root_seed, spawn_key=tuple(key))
    return np.random.default_rng(ss)
