"""(t, n)-threshold Schnorr signatures with two-round nonce commitments.

A dealer Shamir-shares the group secret; any t signers jointly produce one
plain Schnorr signature (R, z) under the group key VK.  Signing follows the
nonce-commitment pattern: each signer publishes a hiding/binding commitment
pair (D_i, E_i) = (g^d_i, g^e_i); the coordinator fixes the participant set
in a SigningSession; each signer's response folds in a binding value

    rho_i = H(session, msg, i, all commitments)

and its Lagrange coefficient, so partials from one session cannot be replayed
in another or against a different message.  The aggregate carries nothing
derived from the participant set beyond (R, z) itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Sequence, Tuple

from .errors import (
    DeserializationError,
    InvalidPartialError,
    MembershipError,
    ParameterError,
    SingleUseError,
    StateError,
    ThresholdError,
)
from .group import (
    ELEMENT_BYTES,
    Q,
    SCALAR_BYTES,
    GroupElement,
    generator_pow,
    scalar_from_bytes,
    scalar_to_bytes,
)
from .hashing import DIGEST_BYTES, TAG_TS_BINDING, TAG_TS_CHALLENGE, hash_to_scalar
from .rng import Drbg
from .shamir import shamir_share

SESSION_ID_BYTES = 16
SIGNATURE_BYTES = ELEMENT_BYTES + SCALAR_BYTES


@dataclass(frozen=True)
class SignerKeys:
    """One signer's share of the group key material."""

    index: int
    signing_share: int          # sk_i, a point on the dealer polynomial
    verification_share: GroupElement  # vk_i = g^sk_i
    group_key: GroupElement     # VK = g^secret
    threshold: int
    signer_count: int


def ts_keygen(threshold: int, count: int, rng: Drbg) -> Tuple[GroupElement, list[SignerKeys]]:
    """Dealer keygen: VK = g^s with s Shamir-shared at threshold t.

    The dealer's polynomial exists only inside this call.
    """
    if threshold < 1 or threshold > count:
        raise ParameterError(f"need 1 <= t <= n, got t={threshold} n={count}")
    secret = rng.scalar(nonzero=True)
    shares = shamir_share(secret, threshold, count, rng)
    group_key = generator_pow(secret)
    keys = [
        SignerKeys(
            index=s.index,
            signing_share=s.value,
            verification_share=generator_pow(s.value),
            group_key=group_key,
            threshold=threshold,
            signer_count=count,
        )
        for s in shares
    ]
    return group_key, keys


def lagrange_at_zero(indices: Iterable[int], i: int) -> int:
    """lambda_i = prod_{j != i} j / (j - i) mod q."""
    num, den = 1, 1
    for j in indices:
        if j == i:
            continue
        num = num * j % Q
        den = den * (j - i) % Q
    return num * pow(den, -1, Q) % Q


@dataclass(frozen=True)
class NonceCommitment:
    index: int
    hiding: GroupElement   # D_i = g^d_i
    binding: GroupElement  # E_i = g^e_i

    def to_bytes(self) -> bytes:
        return self.index.to_bytes(4, "big") + self.hiding.to_bytes() + self.binding.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "NonceCommitment":
        if len(data) != 4 + 2 * ELEMENT_BYTES:
            raise DeserializationError("nonce commitment has wrong length")
        index = int.from_bytes(data[:4], "big")
        hiding = GroupElement.from_bytes(data[4:4 + ELEMENT_BYTES])
        binding = GroupElement.from_bytes(data[4 + ELEMENT_BYTES:])
        return cls(index, hiding, binding)


class SecretNonce:
    """Signer-held nonce pair; consumed by exactly one partial signature."""

    __slots__ = ("index", "hiding_scalar", "binding_scalar", "used")

    def __init__(self, index: int, hiding_scalar: int, binding_scalar: int):
        self.index = index
        self.hiding_scalar = hiding_scalar
        self.binding_scalar = binding_scalar
        self.used = False


def generate_nonce(index: int, rng: Drbg) -> Tuple[SecretNonce, NonceCommitment]:
    d = rng.scalar(nonzero=True)
    e = rng.scalar(nonzero=True)
    return (
        SecretNonce(index, d, e),
        NonceCommitment(index, generator_pow(d), generator_pow(e)),
    )


class SigningSession:
    """Coordinator-fixed context for one aggregate signature.

    Freezing the participant set and their commitments up front realizes the
    pre-agreed-message contract: every partial is bound to this exact session.
    """

    def __init__(
        self,
        session_id: bytes,
        message: bytes,
        threshold: int,
        commitments: Sequence[NonceCommitment],
    ):
        if len(session_id) != SESSION_ID_BYTES:
            raise ParameterError(f"session id must be {SESSION_ID_BYTES} bytes")
        if len(message) != DIGEST_BYTES:
            raise ParameterError("message must be a digest")
        indices = [c.index for c in commitments]
        if len(set(indices)) != len(indices):
            raise ParameterError("duplicate signer in session")
        if len(commitments) < threshold:
            raise ThresholdError(
                f"session needs >= t={threshold} participants, got {len(commitments)}"
            )
        self.session_id = session_id
        self.message = message
        self.threshold = threshold
        self.commitments: Dict[int, NonceCommitment] = {
            c.index: c for c in sorted(commitments, key=lambda c: c.index)
        }
        self.participants: Tuple[int, ...] = tuple(sorted(self.commitments))

    def _commitment_blob(self) -> bytes:
        return b"".join(self.commitments[i].to_bytes() for i in self.participants)

    def binding_value(self, index: int) -> int:
        """rho_i ties a response to (session, msg, signer, commitment list)."""
        if index not in self.commitments:
            raise MembershipError(f"signer {index} not in session")
        return hash_to_scalar(
            TAG_TS_BINDING,
            [
                self.session_id,
                self.message,
                index.to_bytes(4, "big"),
                self._commitment_blob(),
            ],
        )

    def group_commitment(self) -> GroupElement:
        """R = sum_i (D_i + rho_i * E_i) over the participant set."""
        acc = GroupElement.identity()
        for i in self.participants:
            c = self.commitments[i]
            acc = acc + c.hiding + c.binding * self.binding_value(i)
        return acc

    def challenge(self, group_key: GroupElement) -> int:
        return schnorr_challenge(self.group_commitment(), group_key, self.message)

    def to_bytes(self) -> bytes:
        out = [
            self.session_id,
            self.message,
            self.threshold.to_bytes(4, "big"),
            len(self.participants).to_bytes(4, "big"),
        ]
        out.extend(self.commitments[i].to_bytes() for i in self.participants)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SigningSession":
        head = SESSION_ID_BYTES + DIGEST_BYTES + 8
        if len(data) < head:
            raise DeserializationError("signing session truncated")
        session_id = data[:SESSION_ID_BYTES]
        message = data[SESSION_ID_BYTES:SESSION_ID_BYTES + DIGEST_BYTES]
        threshold = int.from_bytes(data[head - 8:head - 4], "big")
        count = int.from_bytes(data[head - 4:head], "big")
        stride = 4 + 2 * ELEMENT_BYTES
        if len(data) != head + count * stride:
            raise DeserializationError("signing session length mismatch")
        commitments = [
            NonceCommitment.from_bytes(data[head + k * stride: head + (k + 1) * stride])
            for k in range(count)
        ]
        return cls(session_id, message, threshold, commitments)


def schnorr_challenge(commitment: GroupElement, group_key: GroupElement, message: bytes) -> int:
    """c = H(R, VK, msg); shared by signing, aggregation and verification."""
    return hash_to_scalar(
        TAG_TS_CHALLENGE, [commitment.to_bytes(), group_key.to_bytes(), message]
    )


@dataclass(frozen=True)
class PartialSignature:
    index: int
    response: int  # z_i

    def to_bytes(self) -> bytes:
        return self.index.to_bytes(4, "big") + scalar_to_bytes(self.response)

    @classmethod
    def from_bytes(cls, data: bytes) -> "PartialSignature":
        if len(data) != 4 + SCALAR_BYTES:
            raise DeserializationError("partial signature has wrong length")
        return cls(int.from_bytes(data[:4], "big"), scalar_from_bytes(data[4:]))


@dataclass(frozen=True)
class ThresholdSignature:
    """Aggregated signature (R, z); verifies as plain Schnorr under VK and
    carries no trace of which subset signed."""

    commitment: GroupElement
    response: int

    def to_bytes(self) -> bytes:
        return self.commitment.to_bytes() + scalar_to_bytes(self.response)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ThresholdSignature":
        if len(data) != SIGNATURE_BYTES:
            raise DeserializationError(f"signature must be {SIGNATURE_BYTES} bytes")
        return cls(
            GroupElement.from_bytes(data[:ELEMENT_BYTES]),
            scalar_from_bytes(data[ELEMENT_BYTES:]),
        )


def ts_sign(
    session: SigningSession,
    keys: SignerKeys,
    nonce: SecretNonce,
    message: bytes,
) -> PartialSignature:
    """z_i = d_i + e_i * rho_i + lambda_i * sk_i * c, consuming the nonce."""
    if keys.index not in session.participants:
        raise MembershipError(f"signer {keys.index} not in session participant set")
    if message != session.message:
        raise StateError("message does not match the session digest")
    if nonce.index != keys.index:
        raise StateError("nonce belongs to a different signer")
    if nonce.used:
        raise SingleUseError(f"nonce of signer {keys.index} already consumed")
    recorded = session.commitments[keys.index]
    if (
        recorded.hiding != generator_pow(nonce.hiding_scalar)
        or recorded.binding != generator_pow(nonce.binding_scalar)
    ):
        raise StateError("session commitment does not match this nonce")
    nonce.used = True
    rho = session.binding_value(keys.index)
    lam = lagrange_at_zero(session.participants, keys.index)
    c = session.challenge(keys.group_key)
    z = (nonce.hiding_scalar + nonce.binding_scalar * rho + lam * keys.signing_share * c) % Q
    return PartialSignature(keys.index, z)


def ts_verify_partial(
    session: SigningSession,
    partial: PartialSignature,
    verification_share: GroupElement,
    group_key: GroupElement,
) -> bool:
    """g^z_i == D_i + rho_i*E_i + (lambda_i*c)*vk_i."""
    if partial.index not in session.participants:
        return False
    c = session.challenge(group_key)
    rho = session.binding_value(partial.index)
    lam = lagrange_at_zero(session.participants, partial.index)
    commitment = session.commitments[partial.index]
    expected = (
        commitment.hiding
        + commitment.binding * rho
        + verification_share * (lam * c % Q)
    )
    return generator_pow(partial.response) == expected


def ts_sign_agg(
    session: SigningSession,
    partials: Sequence[PartialSignature],
    verification_shares: Mapping[int, GroupElement],
    group_key: GroupElement,
) -> ThresholdSignature:
    """Check every partial against its vk_i, then sum responses into (R, z).

    A bad partial is rejected attributably (InvalidPartialError carries the
    signer index); fewer than t partials is a ThresholdError.  The session's
    group commitment and Lagrange weights are fixed over its full participant
    set, so a response from every participant is required; a coordinator that
    lost a participant mid-session must retry with a fresh, smaller session.
    """
    indices = [p.index for p in partials]
    if len(set(indices)) != len(indices):
        dup = next(i for i in indices if indices.count(i) > 1)
        raise InvalidPartialError(dup, f"duplicate partial from signer {dup}")
    if len(partials) < session.threshold:
        raise ThresholdError(
            f"got {len(partials)} partials, threshold is {session.threshold}"
        )
    missing = set(session.participants) - set(indices)
    if missing:
        raise StateError(f"session incomplete: no partial from {sorted(missing)}")
    for partial in partials:
        if partial.index not in session.participants:
            raise MembershipError(f"partial from non-participant {partial.index}")
        share = verification_shares.get(partial.index)
        if share is None:
            raise ParameterError(f"no verification share for signer {partial.index}")
        if not ts_verify_partial(session, partial, share, group_key):
            raise InvalidPartialError(partial.index)
    z = 0
    for partial in partials:
        z = (z + partial.response) % Q
    return ThresholdSignature(session.group_commitment(), z)


def ts_verify(signature: ThresholdSignature, message: bytes, group_key: GroupElement) -> bool:
    """Plain Schnorr verification: g^z == R + c*VK, reject is a value."""
    if signature.commitment.is_identity or group_key.is_identity:
        return False
    if not 0 <= signature.response < Q:
        return False
    c = schnorr_challenge(signature.commitment, group_key, message)
    return generator_pow(signature.response) == signature.commitment + group_key * c
