"""Ground sets, seeded randomness and the Bernoulli sampling step."""
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable

import numpy as np

from .errors import DomainError, ParameterError

ElementId = int
ElementSet = FrozenSet[int]

EMPTY: ElementSet = frozenset()

_MASK64 = (1 << 64) - 1


@dataclass
class RngState:
    """Reproducible generator for one (seed, stream) pair.

    Owned by a single trial; never share one between threads.
    """

    seed: int
    stream: int
    generator: np.random.Generator = field(repr=False, compare=False)


def seeded_rng(seed: int, stream: int = 0) -> RngState:
    seed &= _MASK64
    stream &= _MASK64
    seq = np.random.SeedSequence(seed, spawn_key=(stream,))
    return RngState(seed=seed, stream=stream, generator=np.random.Generator(np.random.PCG64(seq)))


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed for trial `index`; `seeded_rng(derive_seed(m, i))` replays that trial alone."""
    seq = np.random.SeedSequence(master_seed & _MASK64, spawn_key=(index & _MASK64,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def as_element_set(members: Iterable[int], n: int) -> ElementSet:
    out = frozenset(int(u) for u in members)
    for u in out:
        if u < 0 or u >= n:
            raise DomainError(f"element id {u} outside ground set [0, {n})")
    return out


def sample_subset(n: int, p: float, rng: RngState) -> ElementSet:
    """Include each of 0..n-1 independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"sampling probability must lie in [0, 1], got {p}")
    if n < 0:
        raise ParameterError(f"ground-set size must be non-negative, got {n}")
    # one uniform draw per element keeps the stream position independent of p
    draws = rng.generator.random(n)
    return frozenset(int(u) for u in np.flatnonzero(draws < p))
