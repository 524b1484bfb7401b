"""Counter-based permutation streams.

Permutation ``i`` for a given seed comes from its own Philox counter block,
so it does not depend on how many permutations were drawn before it or on
which worker drew it.
"""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

_MASK64 = (1 << 64) - 1


def permutation_generator(seed: int, index: int) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    key = seed & ((1 << 128) - 1)
    counter = [0, 0, index & _MASK64, (index >> 64) & _MASK64]
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def permutation(seed: int, index: int, n: int) -> np.ndarray:
    return permutation_generator(seed, index).permutation(n)


def permutation_block(seed: int, start: int, stop: int, n: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the seeded permutation stream, shape ``(stop-start, n)``."""
    out = np.empty((stop - start, n), dtype=np.intp)
    for row, i in enumerate(range(start, stop)):
        out[row] = permutation(seed, i, n)
    return out


def distinct_arrangements(codes: np.ndarray) -> Iterator[np.ndarray]:
    """Every distinct rearrangement of an integer label vector (multiset permutations)."""
    codes = np.asarray(codes)
    labels, sizes = np.unique(codes, return_counts=True)
    n = codes.size

    def rec(remaining: tuple[int, ...], g: int, current: np.ndarray):
        if g == len(labels) - 1:
            out = current.copy()
            out[list(remaining)] = labels[g]
            yield out
            return
        for chosen in itertools.combinations(remaining, sizes[g]):
            cur = current.copy()
            cur[list(chosen)] = labels[g]
            rest = tuple(i for i in remaining if i not in chosen)
            yield from rec(rest, g + 1, cur)

    yield from rec(tuple(range(n)), 0, np.empty(n, dtype=codes.dtype))
