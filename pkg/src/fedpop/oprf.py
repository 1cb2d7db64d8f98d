"""Blinded Diffie-Hellman PRF: F_K(x) = H2(x, H1(x)^K).

The key holder acts as sender, the input holder as receiver.  The receiver
blinds H1(x) with a fresh exponent rho, the sender raises the blind to K, and
unblinding with 1/rho recovers H1(x)^K without the sender ever seeing x or
the receiver ever seeing K.  Membership checks on both alpha and beta are
mandatory: evaluating on a non-group or identity value would leak key bits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MembershipError, ParameterError, SingleUseError
from .group import Q, GroupElement, hash_to_group, scalar_invert
from .hashing import TAG_H2, hash_to_digest
from .rng import Drbg


@dataclass(frozen=True)
class OprfKey:
    """PRF key K; zero is unrepresentable because g^0 evaluations are useless
    and 1/K must exist."""

    value: int

    def __post_init__(self):
        if not 0 < self.value < Q:
            raise ParameterError("PRF key must lie in Z_q \\ {0}")

    @classmethod
    def generate(cls, rng: Drbg) -> "OprfKey":
        return cls(rng.scalar(nonzero=True))


def _require_member(point: GroupElement, label: str) -> None:
    if not isinstance(point, GroupElement):
        raise MembershipError(f"{label} is not a group element")
    if point.is_identity:
        raise MembershipError(f"{label} is the identity element")


def oprf_direct(key: OprfKey, data: bytes) -> bytes:
    """Unblinded evaluation, used by the key holder itself."""
    return hash_to_digest(TAG_H2, [data, (hash_to_group(data) * key.value).to_bytes()])


class BlindState:
    """Receiver-side state for one blinded query.  Single use."""

    __slots__ = ("rho", "data", "alpha", "used")

    def __init__(self, rho: int, data: bytes, alpha: GroupElement):
        self.rho = rho
        self.data = data
        self.alpha = alpha
        self.used = False


def oprf_blind(data: bytes, rng: Drbg) -> BlindState:
    """alpha = H1(x)^rho for fresh rho in Z_q \\ {0}."""
    rho = rng.scalar(nonzero=True)
    return BlindState(rho, data, hash_to_group(data) * rho)


def oprf_evaluate(alpha: GroupElement, key: OprfKey) -> GroupElement:
    """beta = alpha^K, refusing anything outside G."""
    _require_member(alpha, "alpha")
    return alpha * key.value


def oprf_unblind(beta: GroupElement, state: BlindState) -> bytes:
    """H2(x, beta^(1/rho)); equals oprf_direct(K, x) for honest beta."""
    if state.used:
        raise SingleUseError("blind state already consumed")
    _require_member(beta, "beta")
    state.used = True
    unblinded = beta * scalar_invert(state.rho)
    return hash_to_digest(TAG_H2, [state.data, unblinded.to_bytes()])
