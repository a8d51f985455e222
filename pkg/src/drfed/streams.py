"""Per-run random streams derived from one master seed.

Every run owns three kinds of stream, all spawned from
``SeedSequence(seed)`` with fixed spawn keys and backed by the counter-based
Philox generator:

* ``(0,)``      environment graph stream
* ``(1, m)``    reward stream of client ``m``
* ``(2, m)``    decision stream of client ``m`` (random fallback arm choice)

Reward and decision streams are consumed one uniform per client per round,
drawn in fixed-size blocks.  Because block size and consumption order never
depend on how many runs are simulated together, a run's trajectory is a pure
function of its seed.
"""

from __future__ import annotations

import numpy as np

BLOCK = 1024

GRAPH_KEY = 0
REWARD_KEY = 1
DECISION_KEY = 2


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Return the Philox generator for ``seed`` and spawn key ``key``."""
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def graph_stream(seed: int) -> np.random.Generator:
    return make_rng(seed, GRAPH_KEY)


def reward_stream(seed: int, m: int) -> np.random.Generator:
    return make_rng(seed, REWARD_KEY, m)


def decision_stream(seed: int, m: int) -> np.random.Generator:
    return make_rng(seed, DECISION_KEY, m)


class UniformFeed:
    """Sequential per-round uniforms for ``M`` clients from ``M`` streams.

    ``next()`` returns an array of shape ``(M,)`` holding the next uniform of
    each client's stream.
    """

    def __init__(self, rngs: list[np.random.Generator], block: int = BLOCK):
        self._rngs = rngs
        self._block = block
        self._buf = np.empty((len(rngs), 0))
        self._pos = 0

    def next(self) -> np.ndarray:
        if self._pos >= self._buf.shape[1]:
            self._buf = np.stack([r.random(self._block) for r in self._rngs]) if self._rngs else np.empty((0, self._block))
            self._pos = 0
        out = self._buf[:, self._pos]
        self._pos += 1
        return out


def reward_feed(seed: int, M: int) -> UniformFeed:
    return UniformFeed([reward_stream(seed, m) for m in range(M)])


def decision_feed(seed: int, M: int) -> UniformFeed:
    return UniformFeed([decision_stream(seed, m) for m in range(M)])


class BatchUniformFeed:
    """:class:`UniformFeed` for many runs in lockstep; ``next()`` is ``(R, M)``."""

    def __init__(self, rngs: list[list[np.random.Generator]], block: int = BLOCK):
        self._rngs = rngs
        self._block = block
        self._buf = np.empty((len(rngs), len(rngs[0]) if rngs else 0, 0))
        self._pos = 0

    def next(self) -> np.ndarray:
        if self._pos >= self._buf.shape[2]:
            self._buf = np.array([[r.random(self._block) for r in run] for run in self._rngs]).reshape(
                len(self._rngs), -1, self._block
            )
            self._pos = 0
        out = self._buf[:, :, self._pos]
        self._pos += 1
        return out
