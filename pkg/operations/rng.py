#
# rng.py
#
# Per-node deterministic randomness. Every draw is a pure function of (master seed, node name,
# time step), so lazy activation and evaluation order can never change the outcome of a run.
#

from __future__ import annotations
from functools import lru_cache
import hashlib
from typing import NamedTuple


_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / (1 << 53)


class RngContext(NamedTuple):
    master_seed: int
    node_name: str
    t: int

    def draw(self) -> float:
        return node_draw(self.master_seed, self.node_name, self.t)


@lru_cache(maxsize=1 << 17)
def _node_key(master_seed: int, node_name: str) -> int:
    # Stable across processes (never Python's hash(), which is salted per interpreter)
    digest = hashlib.blake2b(f"{master_seed}:{node_name}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big", signed=False)

def node_draw(master_seed: int, node_name: str, t: int) -> float:
    """
    Uniform draw in [0, 1) for one node at one time step.

    The node key is a 64-bit hash of (seed, name); the time step indexes a splitmix64 sequence
    from that key, so consecutive steps of one node are decorrelated and different nodes use
    unrelated sequences.
    """
    z = (_node_key(master_seed, node_name) + (t + 1) * _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return (z >> 11) * _INV_2_53
