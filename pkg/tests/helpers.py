"""Random instance builders shared by the tests; all draws are caller-seeded."""

from __future__ import annotations

import numpy as np

from ibnaming import Distribution, MeaningSpace, NamingSystem


def random_space(rng: np.random.Generator, n_meanings: int | None = None,
                 n_universe: int | None = None, sparse: bool = False) -> MeaningSpace:
    n_m = int(n_meanings if n_meanings is not None else rng.integers(2, 7))
    n_u = int(n_universe if n_universe is not None else rng.integers(2, 8))
    reps = rng.dirichlet(np.ones(n_u), size=n_m)
    if sparse:
        # knock out some cells but keep at least one per row
        mask = rng.random(reps.shape) < 0.3
        for i in range(n_m):
            if mask[i].all():
                mask[i, rng.integers(n_u)] = False
        reps = np.where(mask, 0.0, reps)
        reps /= reps.sum(axis=1, keepdims=True)
    need = rng.dirichlet(np.ones(n_m))
    labels = tuple(f"m{i}" for i in range(n_m))
    return MeaningSpace.create(
        reps, tuple(f"u{i}" for i in range(n_u)), labels,
        Distribution.create(need, labels),
    )


def random_system(rng: np.random.Generator, space: MeaningSpace,
                  n_words: int | None = None) -> NamingSystem:
    n_w = int(n_words if n_words is not None else rng.integers(1, 6))
    enc = rng.dirichlet(np.ones(n_w), size=space.num_meanings)
    return NamingSystem.create(enc, tuple(f"w{i}" for i in range(n_w)),
                               space.meaning_labels)


def identity_system(space: MeaningSpace) -> NamingSystem:
    n = space.num_meanings
    return NamingSystem.create(np.eye(n), tuple(f"w{i}" for i in range(n)),
                               space.meaning_labels)


def single_word_system(space: MeaningSpace) -> NamingSystem:
    return NamingSystem.create(np.ones((space.num_meanings, 1)), ("w0",),
                               space.meaning_labels)
