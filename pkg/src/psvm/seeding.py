"""Deterministic sub-seed derivation.

All randomness in a run flows from one user seed. Each consumer (splitter,
working-pair selection, CV folds, ...) gets its own stream derived here, so
components are reproducible independently of each other and of execution
order. Streams are numpy PCG64 generators keyed by
``SeedSequence([seed, purpose, *indices])``.
"""

from __future__ import annotations

import numpy as np

# Purpose tags. Frozen: changing them changes every derived stream.
SPLIT = 1
SOLVER_PAIR_J = 2
CV_FOLDS = 3
LEARNING_CURVE = 4


def rng_for(seed: int, purpose: int, *indices: int) -> np.random.Generator:
    """Return the PCG64 generator for (seed, purpose, indices)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, purpose, *indices])))
