"""Shamir secret sharing over Z_q (the signature scalar field).

Sharing evaluates a random degree-(t-1) polynomial with constant term equal
to the secret.  Evaluation points default to 1..n but can be any distinct
nonzero indices, which lets aggregation shares land on global client ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import ParameterError, ReconstructionError
from .group import Q
from .rng import Drbg


@dataclass(frozen=True)
class ShamirShare:
    index: int
    value: int

    def __post_init__(self):
        if self.index <= 0:
            raise ParameterError("share index must be a positive integer")


def _poly_eval(coefficients: Sequence[int], x: int, modulus: int) -> int:
    # Horner on f(x) = secret + a_1 x + ... + a_{t-1} x^{t-1}
    acc = 0
    for coeff in reversed(coefficients):
        acc = (acc * x + coeff) % modulus
    return acc


def shamir_share(
    secret: int,
    threshold: int,
    count: int,
    rng: Drbg,
    *,
    modulus: int = Q,
    indices: Optional[Sequence[int]] = None,
    coefficients: Optional[Sequence[int]] = None,
) -> list[ShamirShare]:
    """Split `secret` into `count` shares, any `threshold` of which recover it.

    `indices` overrides the default evaluation points 1..count.
    `coefficients` is a test seam fixing the t-1 random coefficients.
    """
    if threshold < 1 or threshold > count:
        raise ParameterError(f"need 1 <= t <= n, got t={threshold} n={count}")
    if count >= modulus:
        raise ParameterError("share count must be below the field size")
    if indices is None:
        indices = range(1, count + 1)
    else:
        if len(indices) != count:
            raise ParameterError("index list length must equal share count")
        if len(set(indices)) != count or any(i <= 0 or i >= modulus for i in indices):
            raise ParameterError("indices must be distinct nonzero field points")
    if coefficients is None:
        coefficients = [rng.scalar() % modulus for _ in range(threshold - 1)]
    elif len(coefficients) != threshold - 1:
        raise ParameterError("test coefficients must have length t-1")
    poly = [secret % modulus, *[c % modulus for c in coefficients]]
    return [ShamirShare(i, _poly_eval(poly, i, modulus)) for i in indices]


def shamir_reconstruct(
    shares: Iterable[ShamirShare],
    threshold: int,
    *,
    modulus: int = Q,
) -> int:
    """Lagrange interpolation at x = 0 over all supplied shares."""
    shares = list(shares)
    if len(shares) < threshold:
        raise ReconstructionError(
            f"insufficient shares: got {len(shares)}, threshold {threshold}"
        )
    indices = [s.index for s in shares]
    if len(set(indices)) != len(indices):
        raise ReconstructionError("duplicate share indices")
    secret = 0
    for share in shares:
        num, den = 1, 1
        for other in indices:
            if other == share.index:
                continue
            num = num * other % modulus
            den = den * (other - share.index) % modulus
        lam = num * pow(den, -1, modulus) % modulus
        secret = (secret + share.value * lam) % modulus
    return secret
