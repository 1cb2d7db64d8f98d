"""Fixed-point encoding of real vectors into Z_q and the ModelVector type.

Reals in [-B, B] are scaled by 2^f and rounded; negatives wrap as q - |.|.
Because q is ~2^256 and practical parameters keep f + log2(B) + log2(n) tiny
by comparison, sums of many encodings never wrap, so field addition of
encodings is real addition of the underlying values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence

from .errors import DecodeError, DeserializationError, EncodingError, ParameterError
from .group import Q, SCALAR_BYTES

# Headroom guard: parameters must leave room for 2^32 summed encodings.
_SUM_HEADROOM_BITS = 32


@dataclass(frozen=True)
class FixedPointParams:
    fractional_bits: int = 16
    clamp: float = 64.0

    def __post_init__(self):
        if self.fractional_bits < 1:
            raise EncodingError("fractional_bits must be >= 1")
        if self.clamp <= 0:
            raise EncodingError("clamp bound must be positive")
        need = self.fractional_bits + math.ceil(math.log2(self.clamp)) + _SUM_HEADROOM_BITS
        if need >= Q.bit_length() - 1:
            raise EncodingError("encoding parameters risk wraparound in the field")

    @property
    def scale(self) -> int:
        return 1 << self.fractional_bits

    @property
    def magnitude_bound(self) -> int:
        """Largest |encoded value| a single clamped coordinate can take."""
        return round(self.clamp * self.scale)


class ModelVector:
    """A dimension-d vector of field elements plus its encoding parameters.

    `summands` counts how many single-client encodings were added together;
    it widens the window decode accepts, and makes an un-unmasked vector
    fail decoding loudly instead of producing garbage reals.
    """

    __slots__ = ("coords", "params", "summands")

    def __init__(self, coords: Sequence[int], params: FixedPointParams, summands: int = 1):
        self.coords = tuple(c % Q for c in coords)
        self.params = params
        self.summands = summands

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModelVector):
            return NotImplemented
        return self.coords == other.coords and self.params == other.params

    def __add__(self, other: "ModelVector") -> "ModelVector":
        if not isinstance(other, ModelVector):
            return NotImplemented
        if other.params != self.params or other.dimension != self.dimension:
            raise ParameterError("cannot add vectors with mismatched shape or encoding")
        coords = [(a + b) % Q for a, b in zip(self.coords, other.coords)]
        return ModelVector(coords, self.params, self.summands + other.summands)

    def add_mask(self, mask: Sequence[int], sign: int = 1) -> "ModelVector":
        """Add (+1) or remove (-1) a mask vector; summand count is unchanged."""
        if len(mask) != self.dimension:
            raise ParameterError("mask dimension mismatch")
        if sign == 1:
            coords = [(a + m) % Q for a, m in zip(self.coords, mask)]
        elif sign == -1:
            coords = [(a - m) % Q for a, m in zip(self.coords, mask)]
        else:
            raise ParameterError("sign must be +1 or -1")
        return ModelVector(coords, self.params, self.summands)

    # Canonical serialization: 4-byte big-endian dimension, then d fixed-width
    # big-endian field elements.  This exact byte string feeds H(M).
    def to_bytes(self) -> bytes:
        out = [self.dimension.to_bytes(4, "big")]
        out.extend(c.to_bytes(SCALAR_BYTES, "big") for c in self.coords)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, params: FixedPointParams, summands: int = 1) -> "ModelVector":
        if len(data) < 4:
            raise DeserializationError("model vector truncated")
        dim = int.from_bytes(data[:4], "big")
        if len(data) != 4 + dim * SCALAR_BYTES:
            raise DeserializationError("model vector length mismatch")
        coords = [
            int.from_bytes(data[4 + i * SCALAR_BYTES: 4 + (i + 1) * SCALAR_BYTES], "big")
            for i in range(dim)
        ]
        if any(c >= Q for c in coords):
            raise DeserializationError("model coordinate not reduced mod q")
        return cls(coords, params, summands)


def encode_fixed_point(
    values: Iterable[float],
    params: FixedPointParams = FixedPointParams(),
) -> ModelVector:
    """Encode reals, clamping each coordinate into [-B, B] first."""
    bound = params.clamp
    coords = []
    for x in values:
        x = min(max(float(x), -bound), bound)
        fixed = round(x * params.scale)
        coords.append(fixed % Q)
    return ModelVector(coords, params)


def decode_fixed_point(vector: ModelVector) -> List[float]:
    """Invert encoding; coordinates outside the summand window raise DecodeError."""
    window = vector.summands * vector.params.magnitude_bound
    scale = vector.params.scale
    values = []
    for c in vector.coords:
        if c <= window:
            lifted = c
        elif c >= Q - window:
            lifted = c - Q
        else:
            raise DecodeError(
                "coordinate outside decodable window; masks were not fully removed"
            )
        values.append(lifted / scale)
    return values
