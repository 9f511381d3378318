"""Counter-addressed random streams.

Every random quantity in the package is addressed, not drawn: a value is a
pure function of (master seed, purpose tag, replica, lane, index).  Streams
are backed by the Philox bit generator, whose raw output at 256-bit counter
``c`` is a block of four 64-bit words independent of any other counter.  We
lay values out as

    key     = sha256(master_seed | purpose | replica)[:16]
    counter = [word_index, lane, tag, 0]

where ``lane`` is usually a particle index, ``tag`` an optional extra
coordinate (a grid step for bridge refinements), and ``word_index`` walks the
flat 64-bit word sequence of that lane.  Bulk generation reads a contiguous
word range in one call; single-value queries rebuild the generator at the
enclosing counter, so any entry is recomputable in isolation and results do
not depend on generation order or thread schedule.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numpy.random import Philox

__all__ = ["CounterStream", "BrownianStream", "derive_seed"]

_UINT64_MAX = 2**64 - 1

# (x >> 11) keeps the top 53 bits; +0.5 centers in (0, 1), never hitting 0 or 1.
_UNIT_SCALE = 2.0**-53


def _digest(*parts) -> bytes:
    payload = "spinlab|" + "|".join(str(p) for p in parts)
    return hashlib.sha256(payload.encode("utf-8")).digest()


def derive_seed(master_seed: int, *parts) -> int:
    """Derive a child 64-bit seed from a master seed and a label path."""
    return int.from_bytes(_digest(master_seed, *parts)[:8], "little")


def _unit_open(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to doubles strictly inside (0, 1)."""
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _UNIT_SCALE


def _box_muller(w0: np.ndarray, w1: np.ndarray) -> np.ndarray:
    u1 = _unit_open(w0)
    u2 = _unit_open(w1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


class CounterStream:
    """Addressed stream of raw words, uniforms, and normals.

    Parameters
    ----------
    seed : int
        64-bit unsigned seed.
    purpose : str
        Domain-separation tag; streams with different purposes are
        independent even under the same seed.
    replica : int
        Replica coordinate mixed into the key.
    """

    def __init__(self, seed: int, purpose: str, replica: int = 0):
        if not 0 <= int(seed) <= _UINT64_MAX:
            raise ValueError(f"seed must be a uint64, got {seed!r}")
        self.seed = int(seed)
        self.purpose = purpose
        self.replica = int(replica)
        d = _digest(self.seed, purpose, self.replica)
        self._key = np.frombuffer(d[:16], dtype=np.uint64)

    def _bitgen(self, word_index: int, lane: int, tag: int) -> Philox:
        counter = np.array([word_index, lane, tag, 0], dtype=np.uint64)
        return Philox(key=self._key, counter=counter)

    def raw(self, lane: int, start: int, count: int, tag: int = 0) -> np.ndarray:
        """Words ``start .. start+count-1`` of the given lane."""
        base, offset = divmod(start, 4)
        block = self._bitgen(base, lane, tag).random_raw(offset + count)
        return block[offset : offset + count]

    def uniforms(self, lane: int, count: int, tag: int = 0) -> np.ndarray:
        """``count`` uniforms in the open interval (0, 1), one word each."""
        return _unit_open(self.raw(lane, 0, count, tag))

    def normals(self, lane: int, count: int, tag: int = 0) -> np.ndarray:
        """``count`` standard normals; value ``v`` consumes words 2v, 2v+1."""
        words = self.raw(lane, 0, 2 * count, tag)
        return _box_muller(words[0::2], words[1::2])

    def normal_at(self, lane: int, index: int, tag: int = 0) -> float:
        """The same normal ``normals(lane, n)[index]`` would yield, in isolation."""
        words = self.raw(lane, 2 * index, 2, tag)
        return float(_box_muller(words[:1], words[1:])[0])

    def normal_block(self, n_lanes: int, count: int, tag: int = 0) -> np.ndarray:
        """Shape (n_lanes, count) of standard normals, lanes independent."""
        out = np.empty((n_lanes, count))
        for lane in range(n_lanes):
            out[lane] = self.normals(lane, count, tag)
        return out


class BrownianStream:
    """Brownian increments addressed by (master seed, replica, particle, step).

    The increment for particle ``i`` at grid step ``g`` is ``sqrt(h)`` times
    a standard normal at (lane=i, index=g) and never depends on how many
    particles or steps any given run asked for.
    """

    PURPOSE = "brownian"

    def __init__(self, master_seed: int, replica: int = 0):
        self.master_seed = int(master_seed)
        self.replica = int(replica)
        self._stream = CounterStream(master_seed, self.PURPOSE, replica)

    def increments(self, n_particles: int, n_steps: int, grid_step: float) -> np.ndarray:
        """Shape (n_particles, n_steps) of Normal(0, grid_step) increments."""
        z = self._stream.normal_block(n_particles, n_steps)
        return z * np.sqrt(grid_step)

    def increment_at(self, particle: int, step: int, grid_step: float) -> float:
        return self._stream.normal_at(particle, step) * float(np.sqrt(grid_step))
