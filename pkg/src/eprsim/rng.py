"""Counter-based random streams (Philox4x32-10).

Every uniform variate is a pure function of ``(seed, setting_index,
pair_index, block)``, so any subset of pairs can be generated in any order,
in any number of workers, and still reproduce the same numbers.
"""

from __future__ import annotations

import numpy as np

_MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_ROUNDS = 10

# 2**-53, for 53-bit doubles in [0, 1)
_TWO_M53 = 1.0 / 9007199254740992.0


def philox4x32(counter, key):
    """Apply Philox4x32-10 to a batch of 128-bit counters.

    ``counter`` is a sequence of four uint32 word arrays (broadcastable) and
    ``key`` a pair of Python ints. Returns four uint64 arrays holding the
    32-bit output words.
    """
    c0, c1, c2, c3 = (np.asarray(w, dtype=np.uint64) & _MASK32 for w in counter)
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for r in range(_ROUNDS):
        if r:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> np.uint64(32)) ^ c1 ^ np.uint64(k0),
            p1 & _MASK32,
            (p0 >> np.uint64(32)) ^ c3 ^ np.uint64(k1),
            p0 & _MASK32,
        )
    return c0, c1, c2, c3


def _seed_key(seed: int) -> tuple[int, int]:
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed & 0xFFFFFFFF, seed >> 32


def _to_unit(hi, lo):
    """Two 32-bit words -> double in [0, 1) with 53 random bits."""
    bits = ((hi << np.uint64(21)) ^ (lo >> np.uint64(11))) & np.uint64((1 << 53) - 1)
    return bits.astype(np.float64) * _TWO_M53


def uniform_block(seed: int, setting_index, pair_index, block: int):
    """Two uniform [0, 1) arrays for counter block ``block`` of each pair.

    The counter layout is ``(pair_index lo, pair_index hi, setting_index,
    block)``; indices may be arrays.
    """
    pair_index = np.asarray(pair_index, dtype=np.uint64)
    setting_index = np.asarray(setting_index, dtype=np.uint64)
    out = philox4x32(
        (pair_index & _MASK32, pair_index >> np.uint64(32), setting_index, block),
        _seed_key(seed),
    )
    return _to_unit(out[0], out[1]), _to_unit(out[2], out[3])


class CounterStream:
    """Sequential view of the stream owned by one (setting, pair) counter.

    Draw ``k`` comes from block ``k // 2``, slot ``k % 2``; this matches the
    layout the vectorised engine uses, so a pair drawn through a stream and
    the same pair drawn in bulk are identical.
    """

    def __init__(self, seed: int, setting_index: int, pair_index: int):
        if setting_index < 0 or pair_index < 0:
            raise ValueError("stream indices must be nonnegative")
        _seed_key(seed)
        self.seed = seed
        self.setting_index = setting_index
        self.pair_index = pair_index
        self._draws = 0

    def random(self) -> float:
        block, slot = divmod(self._draws, 2)
        self._draws += 1
        u = uniform_block(self.seed, self.setting_index, self.pair_index, block)
        return float(u[slot])

    def raw_block(self, block: int) -> tuple[int, int, int, int]:
        """The four raw 32-bit output words of one counter block."""
        pi = self.pair_index
        words = philox4x32(
            (pi & 0xFFFFFFFF, pi >> 32, self.setting_index, block), _seed_key(self.seed)
        )
        return tuple(int(w) for w in words)


def substream(seed: int, setting_index: int, pair_index: int) -> CounterStream:
    return CounterStream(seed, setting_index, pair_index)
