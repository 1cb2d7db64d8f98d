"""Deterministic randomness.

Simulations and the CLI must replay bit-exactly from a seed, so every party
draws from a Drbg: a SHAKE-256 counter stream keyed by the seed.  Children
derived with distinct labels are independent streams, which lets one master
seed drive clients, the server and the service provider without their draws
interleaving.  `Drbg.system()` backs the stream with `secrets` entropy for
non-reproducible use.
"""

from __future__ import annotations

import hashlib
import secrets
from typing import Union

from .errors import ParameterError
from .group import Q

_Seed = Union[int, bytes, str]


def _seed_bytes(seed: _Seed) -> bytes:
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, str):
        return seed.encode()
    if isinstance(seed, int):
        return seed.to_bytes(32, "big", signed=False) if seed >= 0 else str(seed).encode()
    raise ParameterError(f"unsupported seed type {type(seed).__name__}")


class Drbg:
    """Deterministic byte stream with labelled child derivation."""

    __slots__ = ("_key", "_counter")

    def __init__(self, key: bytes):
        self._key = key
        self._counter = 0

    @classmethod
    def from_seed(cls, seed: _Seed) -> "Drbg":
        return cls(hashlib.sha256(b"fedpop/drbg" + _seed_bytes(seed)).digest())

    @classmethod
    def system(cls) -> "Drbg":
        return cls(secrets.token_bytes(32))

    def child(self, *labels: _Seed) -> "Drbg":
        h = hashlib.sha256()
        h.update(b"fedpop/drbg-child")
        h.update(self._key)
        for label in labels:
            raw = _seed_bytes(label)
            h.update(len(raw).to_bytes(4, "big"))
            h.update(raw)
        return Drbg(h.digest())

    def bytes(self, n: int) -> bytes:
        block = self._key + self._counter.to_bytes(8, "big")
        self._counter += 1
        return hashlib.shake_256(block).digest(n)

    def scalar(self, nonzero: bool = False) -> int:
        """Uniform element of Z_q (or Z_q \\ {0})."""
        while True:
            value = int.from_bytes(self.bytes(64), "big") % Q
            if value or not nonzero:
                return value

    def randbelow(self, bound: int) -> int:
        if bound <= 0:
            raise ParameterError("bound must be positive")
        # 64-byte draws make the modular bias negligible for any bound < 2^256
        return int.from_bytes(self.bytes(64), "big") % bound

    def shuffle_index(self, length: int) -> int:
        return self.randbelow(length)

    def sample_indices(self, count: int, population: int) -> list[int]:
        """`count` distinct values from 1..population (seeded Fisher-Yates prefix)."""
        if count > population:
            raise ParameterError("cannot sample more indices than the population")
        pool = list(range(1, population + 1))
        for i in range(count):
            j = i + self.randbelow(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[:count])
