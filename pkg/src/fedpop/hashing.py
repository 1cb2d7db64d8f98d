"""Tagged hashing and mask expansion.

Every hash in the protocol is domain separated by a tag and an unambiguous
length-prefixed framing of its parts, so H(M), H2(x, y), challenge hashes and
PRG seeds can never collide across uses.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, List

from .errors import ParameterError
from .group import Q

DIGEST_BYTES = 32  # lambda = 256

# Domain tags used across the protocol.
TAG_H2 = b"fedpop/H2"
TAG_MODEL = b"fedpop/model"
TAG_PAIR = b"fedpop/pair"
TAG_SELF = b"fedpop/self"
TAG_PRG = b"fedpop/prg"
TAG_ALT_WITNESS = b"fedpop/altK"
TAG_TS_BINDING = b"fedpop/ts-bind"
TAG_TS_CHALLENGE = b"fedpop/ts-chal"


def _frame(tag: bytes, parts: Iterable[bytes]) -> bytes:
    if isinstance(tag, str):
        tag = tag.encode()
    chunks = [len(tag).to_bytes(4, "big"), tag]
    for part in parts:
        if not isinstance(part, (bytes, bytearray)):
            raise ParameterError(f"hash parts must be bytes, got {type(part).__name__}")
        chunks.append(len(part).to_bytes(8, "big"))
        chunks.append(bytes(part))
    return b"".join(chunks)


def hash_to_digest(tag: bytes, parts: Iterable[bytes]) -> bytes:
    """Domain-separated SHA-256 over length-prefixed parts (32 bytes out)."""
    return hashlib.sha256(_frame(tag, parts)).digest()


def hash_to_scalar(tag: bytes, parts: Iterable[bytes]) -> int:
    """Uniform scalar in Z_q from a 64-byte SHAKE-256 read."""
    wide = hashlib.shake_256(_frame(tag, parts)).digest(64)
    return int.from_bytes(wide, "big") % Q


def prg_expand(seed: bytes, dimension: int) -> List[int]:
    """Expand a 32-byte seed into `dimension` field elements.

    A single SHAKE-256 stream is read 64 bytes per coordinate, so shorter
    expansions are prefixes of longer ones from the same seed.
    """
    if dimension < 1:
        raise ParameterError("dimension must be >= 1")
    if len(seed) != DIGEST_BYTES:
        raise ParameterError(f"seed must be {DIGEST_BYTES} bytes")
    stream = hashlib.shake_256(_frame(TAG_PRG, [seed])).digest(64 * dimension)
    return [
        int.from_bytes(stream[64 * i: 64 * (i + 1)], "big") % Q
        for i in range(dimension)
    ]
