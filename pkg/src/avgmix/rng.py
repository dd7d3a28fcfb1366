"""Counter-based random streams for reproducible, parallel trials.

Every stream is a Philox4x64 generator keyed by ``(seed, stream)``.  Draws
are taken from the raw 64-bit output so that the sequence of values does not
depend on how callers chunk their requests: drawing 10 indices at once gives
the same numbers as drawing them one at a time.

Index mapping (frozen): a raw word ``u`` maps to ``floor((u >> 11) * 2**-53 * m)``
clipped to ``m - 1``.  The bias is at most ``m / 2**53``.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_WORDS_PER_BLOCK = 4
_INV53 = 2.0 ** -53


class RngStream:
    """A reproducible stream of draws identified by ``(seed, stream)``.

    ``counter`` is the number of 64-bit words consumed so far; two streams
    with the same ``(seed, stream, counter)`` produce identical draws.
    """

    def __init__(self, seed: int, stream: int = 0, counter: int = 0):
        if counter < 0:
            raise ValueError("counter must be non-negative")
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        block, skip = divmod(int(counter), _WORDS_PER_BLOCK)
        self._bitgen = np.random.Philox(
            key=np.array([self.seed, self.stream], dtype=np.uint64),
            counter=np.array([block, 0, 0, 0], dtype=np.uint64),
        )
        self.counter = block * _WORDS_PER_BLOCK
        if skip:
            self.raw(skip)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream={self.stream}, counter={self.counter})"

    def spawn(self, stream: int) -> "RngStream":
        """Return a fresh stream with the same master seed and id ``stream``."""
        return RngStream(self.seed, stream)

    def raw(self, size: int) -> np.ndarray:
        out = self._bitgen.random_raw(size)
        self.counter += int(size)
        return np.asarray(out, dtype=np.uint64)

    def integers(self, high: int, size: int | None = None):
        """Uniform integers in ``[0, high)``; scalar when ``size`` is None."""
        if high < 1:
            raise ValueError("high must be >= 1")
        k = 1 if size is None else int(size)
        u = (self.raw(k) >> np.uint64(11)).astype(np.float64) * _INV53
        idx = np.minimum((u * high).astype(np.int64), high - 1)
        return int(idx[0]) if size is None else idx

    def uniform(self, size: int | None = None):
        """Uniform floats in ``[0, 1)`` with 53 random bits."""
        k = 1 if size is None else int(size)
        u = (self.raw(k) >> np.uint64(11)).astype(np.float64) * _INV53
        return float(u[0]) if size is None else u

    def generator(self) -> np.random.Generator:
        """A numpy Generator seeded from this stream (consumes two words).

        Use it for non-hot-path sampling (random graphs, random test states);
        the simulation kernels draw through :meth:`integers` instead.
        """
        words = self.raw(2)
        return np.random.Generator(np.random.Philox(key=words))


def trial_streams(seed: int, trials: int, first: int = 0) -> list[RngStream]:
    """Independent streams for trials ``first .. first + trials - 1``."""
    return [RngStream(seed, first + k) for k in range(trials)]
