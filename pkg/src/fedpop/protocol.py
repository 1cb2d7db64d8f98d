"""Party state machines and the Setup / Generate / Reveal / Prove phases.

Generate runs over the simulator transport: the server broadcasts model
parameters, clients train and mask, the server classifies online clients at
a quiescence timeout, recovers masks from shares, broadcasts the aggregate,
then coordinates a two-round threshold signing of H(M).  Survivors end the
round holding a ProofBundle (H(M), sigma, K); the server keeps (M, VK, R)
for Reveal.  Prove is a four-message exchange between an anonymous prover
and the service provider: hash comparison, OPRF blind, (sigma, beta)
response, decision.  Reject is always a 0 decision on both sides, never an
exception.
"""

from __future__ import annotations

import json
import math
import struct
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .encoding import FixedPointParams, ModelVector
from .errors import (
    DeserializationError,
    FedPopError,
    InvalidPartialError,
    MembershipError,
    ParameterError,
    RoundLookupError,
    ThresholdError,
    UnmaskableRoundError,
    WitnessError,
)
from .group import ELEMENT_BYTES, GroupElement, scalar_from_bytes, scalar_to_bytes
from .hashing import DIGEST_BYTES, TAG_ALT_WITNESS, TAG_MODEL, hash_to_digest, hash_to_scalar
from .oprf import OprfKey, oprf_blind, oprf_direct, oprf_evaluate, oprf_unblind
from .rng import Drbg
from .secagg import (
    SAClientState,
    SAParams,
    SAServerState,
    default_degree,
    sa_aggregate,
    sa_protect,
    sa_setup,
)
from .shamir import ShamirShare
from .simulator import (
    MSG_AGGREGATE_MODEL,
    MSG_BUNDLE,
    MSG_MASKED_UPDATE,
    MSG_MODEL_PARAMS,
    MSG_NONCE_COMMITMENT,
    MSG_PARTIAL_SIG,
    MSG_PROVE_ABORT,
    MSG_PROVE_ALPHA,
    MSG_PROVE_DECISION,
    MSG_PROVE_HASH,
    MSG_PROVE_RESPONSE,
    MSG_RECOVERY_SHARES,
    MSG_SHARE_REQUEST,
    MSG_SIGN_REQUEST,
    DropoutSchedule,
    Message,
    Transcript,
    Transport,
    run_round,
)
from .threshold import (
    SESSION_ID_BYTES,
    SIGNATURE_BYTES,
    PartialSignature,
    SecretNonce,
    SignerKeys,
    SigningSession,
    ThresholdSignature,
    generate_nonce,
    ts_keygen,
    ts_sign,
    ts_sign_agg,
    ts_verify,
)
from .trainer import TrainerSpec, local_train

SERVER = "server"
PROVER = "prover"
VERIFIER = "verifier"

STATUS_OK = "ok"
STATUS_THRESHOLD = "threshold-error"
STATUS_UNMASKABLE = "unmaskable"


def client_address(index: int) -> str:
    return f"client:{index}"


def model_digest(model: ModelVector) -> bytes:
    """H(M) over the canonical serialization; signed and compared everywhere."""
    return hash_to_digest(TAG_MODEL, [model.to_bytes()])


# ---------------------------------------------------------------------------
# Durable objects

@dataclass(frozen=True)
class ProofBundle:
    """What a participating client keeps: digest, sigma, group witness."""

    round_id: int
    model_digest: bytes
    signature: ThresholdSignature
    witness: OprfKey

    def to_json(self) -> dict:
        return {
            "l": self.round_id,
            "mhash": self.model_digest.hex(),
            "sigma": self.signature.to_bytes().hex(),
            "K": scalar_to_bytes(self.witness.value).hex(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProofBundle":
        try:
            return cls(
                round_id=int(data["l"]),
                model_digest=bytes.fromhex(data["mhash"]),
                signature=ThresholdSignature.from_bytes(bytes.fromhex(data["sigma"])),
                witness=OprfKey(scalar_from_bytes(bytes.fromhex(data["K"]))),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DeserializationError(f"malformed proof bundle: {exc}") from exc


@dataclass(frozen=True)
class GlobalToken:
    """Public per-round verification token: (VK, R = F_K(VK))."""

    round_id: int
    group_key: GroupElement
    prf_value: bytes

    def to_json(self) -> dict:
        return {
            "l": self.round_id,
            "VK": self.group_key.to_bytes().hex(),
            "R": self.prf_value.hex(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GlobalToken":
        try:
            return cls(
                round_id=int(data["l"]),
                group_key=GroupElement.from_bytes(bytes.fromhex(data["VK"])),
                prf_value=bytes.fromhex(data["R"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DeserializationError(f"malformed token: {exc}") from exc


@dataclass(frozen=True)
class ClientKeyMaterial:
    """Everything one client holds after Setup.  The index is local routing
    state only; Prove messages never carry it."""

    index: int
    sa: SAClientState
    signer: SignerKeys


@dataclass
class ServerKeyMaterial:
    n: int
    n_drop: int
    threshold: int
    params: SAParams
    sa: SAServerState
    group_key: GroupElement
    verification_shares: Dict[int, GroupElement]
    rounds: Dict[int, "RevealPackage"] = field(default_factory=dict)


@dataclass(frozen=True)
class RevealPackage:
    """What Reveal delivers to the service provider."""

    model: ModelVector
    token: GlobalToken

    @property
    def digest(self) -> bytes:
        return model_digest(self.model)


@dataclass
class RoundOutcome:
    status: str
    round_id: int
    bundles: Dict[int, ProofBundle]
    model: Optional[ModelVector]
    token: Optional[GlobalToken]
    transcript: Transcript
    timings: Dict[str, object]
    reason: str = ""


@dataclass
class ProveOutcome:
    client_decision: int
    sp_decision: int
    transcript: Transcript
    timings: Dict[str, float]


# ---------------------------------------------------------------------------
# Setup

def recovery_threshold_default(degree: int, threshold: int) -> int:
    """t_sa capped by t-1 so a tolerated dropout pattern stays recoverable."""
    return max(1, min(math.ceil(2 * degree / 3), threshold - 1)) if threshold > 1 else 1


def setup_phase(
    n: int,
    n_drop: int,
    rng: Drbg,
    *,
    dimension: int = 16,
    fixed_point: FixedPointParams = FixedPointParams(),
    degree: Optional[int] = None,
    t_sa: Optional[int] = None,
) -> Tuple[Dict[int, ClientKeyMaterial], ServerKeyMaterial]:
    """Dealer keygen plus aggregation setup; threshold t = n - n_drop."""
    if not 0 <= n_drop < n:
        raise ParameterError(f"need 0 <= n_drop < n, got n_drop={n_drop} n={n}")
    threshold = n - n_drop
    if degree is None:
        degree = default_degree(n)
    if t_sa is None:
        t_sa = recovery_threshold_default(degree, threshold)
    params = SAParams(n, degree, t_sa, dimension, fixed_point)
    group_key, signer_keys = ts_keygen(threshold, n, rng.child("ts-keygen"))
    sa_clients, sa_server = sa_setup(params, rng.child("sa-setup"))
    clients = {
        i: ClientKeyMaterial(index=i, sa=sa_clients[i], signer=keys)
        for i, keys in ((k.index, k) for k in signer_keys)
    }
    server = ServerKeyMaterial(
        n=n,
        n_drop=n_drop,
        threshold=threshold,
        params=params,
        sa=sa_server,
        group_key=group_key,
        verification_shares={k.index: k.verification_share for k in signer_keys},
    )
    return clients, server


# ---------------------------------------------------------------------------
# Payload helpers

def _pack_floats(values: Sequence[float]) -> bytes:
    return len(values).to_bytes(4, "big") + struct.pack(f">{len(values)}d", *values)


def _unpack_floats(data: bytes) -> List[float]:
    count = int.from_bytes(data[:4], "big")
    return list(struct.unpack(f">{count}d", data[4:]))


def _shares_to_json(b_out: Mapping[int, ShamirShare], k_out: Mapping[int, ShamirShare]) -> bytes:
    doc = {
        "b": {str(owner): [s.index, scalar_to_bytes(s.value).hex()] for owner, s in b_out.items()},
        "k": {str(owner): [s.index, scalar_to_bytes(s.value).hex()] for owner, s in k_out.items()},
    }
    return json.dumps(doc, sort_keys=True).encode()


def _shares_from_json(payload: bytes) -> Tuple[Dict[int, ShamirShare], Dict[int, ShamirShare]]:
    doc = json.loads(payload.decode())
    b_out = {
        int(owner): ShamirShare(index, scalar_from_bytes(bytes.fromhex(value)))
        for owner, (index, value) in doc["b"].items()
    }
    k_out = {
        int(owner): ShamirShare(index, scalar_from_bytes(bytes.fromhex(value)))
        for owner, (index, value) in doc["k"].items()
    }
    return b_out, k_out


# ---------------------------------------------------------------------------
# Generate-phase parties

class ClientParty:
    """Client state machine for one Generate round."""

    def __init__(
        self,
        material: ClientKeyMaterial,
        trainer_spec: TrainerSpec,
        round_id: int,
        rng: Drbg,
        alt_witness: bool = False,
        retain_model: bool = False,
    ):
        self.material = material
        self.trainer_spec = trainer_spec
        self.round_id = round_id
        self.rng = rng
        self.alt_witness = alt_witness
        self.retain_model = retain_model
        self.address = client_address(material.index)
        self.model_digest: Optional[bytes] = None
        self.model: Optional[ModelVector] = None
        self.bundle: Optional[ProofBundle] = None
        self.bundle_rejected: bool = False
        self._nonce: Optional[SecretNonce] = None
        self.timings: Dict[str, float] = {"sa_train": 0.0, "ts_sign": 0.0}

    def start(self) -> List[Message]:
        return []

    def pending_timeout(self) -> bool:
        return False

    def on_timeout(self) -> List[Message]:
        return []

    def _send(self, mtype: str, payload: bytes) -> List[Message]:
        return [Message(self.round_id, self.address, SERVER, mtype, payload)]

    def handle(self, msg: Message) -> List[Message]:
        if msg.mtype == MSG_MODEL_PARAMS:
            return self._on_model_params(msg)
        if msg.mtype == MSG_SHARE_REQUEST:
            return self._on_share_request(msg)
        if msg.mtype == MSG_AGGREGATE_MODEL:
            return self._on_aggregate(msg)
        if msg.mtype == MSG_SIGN_REQUEST:
            return self._on_sign_request(msg)
        if msg.mtype == MSG_BUNDLE:
            return self._on_bundle(msg)
        raise FedPopError(f"client {self.material.index}: unexpected message {msg.mtype}")

    def _on_model_params(self, msg: Message) -> List[Message]:
        params = _unpack_floats(msg.payload)
        started = time.perf_counter()
        update = local_train(self.trainer_spec, self.material.index, params)
        from .encoding import encode_fixed_point

        encoded = encode_fixed_point(update, self.material.sa.params.fixed_point)
        masked = sa_protect(self.material.sa, encoded)
        self.timings["sa_train"] += time.perf_counter() - started
        return self._send(MSG_MASKED_UPDATE, masked.to_bytes())

    def _on_share_request(self, msg: Message) -> List[Message]:
        doc = json.loads(msg.payload.decode())
        b_out, k_out = self.material.sa.recovery_shares(doc["online"], doc["dropped"])
        return self._send(MSG_RECOVERY_SHARES, _shares_to_json(b_out, k_out))

    def _on_aggregate(self, msg: Message) -> List[Message]:
        model = ModelVector.from_bytes(
            msg.payload, self.material.sa.params.fixed_point
        )
        self.model_digest = model_digest(model)
        if self.retain_model:
            self.model = model
        started = time.perf_counter()
        self._nonce, commitment = generate_nonce(
            self.material.index, self.rng.child("nonce", self.rng.bytes(8))
        )
        self.timings["ts_sign"] += time.perf_counter() - started
        return self._send(MSG_NONCE_COMMITMENT, commitment.to_bytes())

    def _on_sign_request(self, msg: Message) -> List[Message]:
        session = SigningSession.from_bytes(msg.payload)
        started = time.perf_counter()
        partial = ts_sign(session, self.material.signer, self._nonce, self.model_digest)
        self.timings["ts_sign"] += time.perf_counter() - started
        payload = partial.to_bytes()
        if self.alt_witness:
            r_i = self.rng.child("alt-witness").scalar(nonzero=True)
            contribution = self.material.signer.verification_share * r_i
            payload += contribution.to_bytes()
        return self._send(MSG_PARTIAL_SIG, payload)

    def _on_bundle(self, msg: Message) -> List[Message]:
        signature = ThresholdSignature.from_bytes(msg.payload[:SIGNATURE_BYTES])
        witness = OprfKey(scalar_from_bytes(msg.payload[SIGNATURE_BYTES:]))
        if not ts_verify(signature, self.model_digest, self.material.signer.group_key):
            self.bundle_rejected = True  # never store a bundle that fails verification
            return []
        self.bundle = ProofBundle(self.round_id, self.model_digest, signature, witness)
        return []


class ServerParty:
    """FL server: classification, recovery, aggregation, signing coordinator."""

    _STAGES = ("collect-updates", "collect-shares", "collect-nonces", "collect-partials")

    def __init__(
        self,
        material: ServerKeyMaterial,
        round_id: int,
        rng: Drbg,
        model_params: Optional[Sequence[float]] = None,
        alt_witness: bool = False,
    ):
        self.material = material
        self.round_id = round_id
        self.rng = rng
        self.alt_witness = alt_witness
        self.model_params = list(model_params) if model_params is not None else (
            [0.0] * material.params.dimension
        )
        self.stage = "init"
        self.outcome: Optional[str] = None
        self.reason = ""
        self.masked: Dict[int, ModelVector] = {}
        self.b_shares: Dict[int, List[ShamirShare]] = {}
        self.k_shares: Dict[int, List[ShamirShare]] = {}
        self.online: List[int] = []
        self.commitments: List = []
        self.partials: List[PartialSignature] = []
        self.contributions: Dict[int, GroupElement] = {}
        self.session: Optional[SigningSession] = None
        self.eligible: Optional[set] = None
        self.retries = 0
        self.model: Optional[ModelVector] = None
        self.digest: Optional[bytes] = None
        self.signature: Optional[ThresholdSignature] = None
        self.token: Optional[GlobalToken] = None
        self.timings: Dict[str, float] = {"sa_agg": 0.0, "ts_agg": 0.0}

    # -- engine protocol -----------------------------------------------------

    def start(self) -> List[Message]:
        self.stage = "collect-updates"
        payload = _pack_floats(self.model_params)
        return [
            Message(self.round_id, SERVER, client_address(i), MSG_MODEL_PARAMS, payload)
            for i in sorted(self.material.sa.graph)
        ]

    def pending_timeout(self) -> bool:
        return self.outcome is None and self.stage in self._STAGES

    def handle(self, msg: Message) -> List[Message]:
        index = int(msg.sender.split(":", 1)[1])
        if msg.mtype == MSG_MASKED_UPDATE:
            self.masked[index] = ModelVector.from_bytes(
                msg.payload, self.material.params.fixed_point
            )
        elif msg.mtype == MSG_RECOVERY_SHARES:
            b_out, k_out = _shares_from_json(msg.payload)
            for owner, share in b_out.items():
                self.b_shares.setdefault(owner, []).append(share)
            for owner, share in k_out.items():
                self.k_shares.setdefault(owner, []).append(share)
        elif msg.mtype == MSG_NONCE_COMMITMENT:
            from .threshold import NonceCommitment

            commitment = NonceCommitment.from_bytes(msg.payload)
            if self.eligible is None or commitment.index in self.eligible:
                self.commitments.append(commitment)
        elif msg.mtype == MSG_PARTIAL_SIG:
            partial = PartialSignature.from_bytes(msg.payload[: 4 + 32])
            rest = msg.payload[4 + 32:]
            if rest:
                self.contributions[partial.index] = GroupElement.from_bytes(rest)
            self.partials.append(partial)
        else:
            raise FedPopError(f"server: unexpected message {msg.mtype}")
        return []

    def on_timeout(self) -> List[Message]:
        if self.stage == "collect-updates":
            return self._classify()
        if self.stage == "collect-shares":
            return self._aggregate()
        if self.stage == "collect-nonces":
            return self._open_session()
        if self.stage == "collect-partials":
            return self._finalize()
        return []

    # -- stages ---------------------------------------------------------------

    def _fail(self, status: str, reason: str) -> List[Message]:
        self.outcome = status
        self.reason = reason
        self.stage = "done"
        return []

    def _classify(self) -> List[Message]:
        # quiescence models the protect-stage timeout
        self.online = sorted(self.masked)
        if not self.online:
            return self._fail(STATUS_THRESHOLD, "no client sent a masked update")
        dropped = set(self.material.sa.graph) - set(self.online)
        self.stage = "collect-shares"
        out = []
        for i in self.online:
            neighbors = self.material.sa.graph[i]
            doc = {
                "online": [j for j in neighbors if j not in dropped],
                "dropped": [j for j in neighbors if j in dropped],
            }
            out.append(
                Message(
                    self.round_id,
                    SERVER,
                    client_address(i),
                    MSG_SHARE_REQUEST,
                    json.dumps(doc, sort_keys=True).encode(),
                )
            )
        return out

    def _aggregate(self) -> List[Message]:
        started = time.perf_counter()
        try:
            self.model = sa_aggregate(
                self.material.sa, self.masked, self.b_shares, self.k_shares
            )
        except UnmaskableRoundError as exc:
            self.timings["sa_agg"] += time.perf_counter() - started
            return self._fail(STATUS_UNMASKABLE, str(exc))
        self.timings["sa_agg"] += time.perf_counter() - started
        self.digest = model_digest(self.model)
        self.eligible = set(self.online)
        return self._request_signing()

    def _request_signing(self) -> List[Message]:
        self.stage = "collect-nonces"
        self.commitments = []
        self.partials = []
        self.contributions = {}
        payload = self.model.to_bytes()
        return [
            Message(self.round_id, SERVER, client_address(i), MSG_AGGREGATE_MODEL, payload)
            for i in sorted(self.eligible)
        ]

    def _open_session(self) -> List[Message]:
        started = time.perf_counter()
        if len(self.commitments) < self.material.threshold:
            self.timings["ts_agg"] += time.perf_counter() - started
            return self._fail(
                STATUS_THRESHOLD,
                f"{len(self.commitments)} signers online, threshold "
                f"{self.material.threshold}",
            )
        try:
            self.session = SigningSession(
                self.rng.child("session", self.retries).bytes(SESSION_ID_BYTES),
                self.digest,
                self.material.threshold,
                self.commitments,
            )
        except ThresholdError as exc:
            self.timings["ts_agg"] += time.perf_counter() - started
            return self._fail(STATUS_THRESHOLD, str(exc))
        self.timings["ts_agg"] += time.perf_counter() - started
        self.stage = "collect-partials"
        payload = self.session.to_bytes()
        return [
            Message(self.round_id, SERVER, client_address(i), MSG_SIGN_REQUEST, payload)
            for i in self.session.participants
        ]

    def _retry_signing(self, exclude: Iterable[int], reason: str) -> List[Message]:
        if self.retries >= 1:
            return self._fail(STATUS_THRESHOLD, f"signing retry exhausted: {reason}")
        self.retries += 1
        self.eligible = set(self.eligible) - set(exclude)
        if len(self.eligible) < self.material.threshold:
            return self._fail(STATUS_THRESHOLD, reason)
        return self._request_signing()

    def _finalize(self) -> List[Message]:
        started = time.perf_counter()
        senders = {p.index for p in self.partials}
        missing = set(self.session.participants) - senders
        if missing:
            self.timings["ts_agg"] += time.perf_counter() - started
            if len(senders) >= self.material.threshold:
                return self._retry_signing(missing, f"no partial from {sorted(missing)}")
            return self._fail(
                STATUS_THRESHOLD,
                f"{len(senders)} partial signatures, threshold {self.material.threshold}",
            )
        try:
            self.signature = ts_sign_agg(
                self.session,
                self.partials,
                self.material.verification_shares,
                self.material.group_key,
            )
        except InvalidPartialError as exc:
            self.timings["ts_agg"] += time.perf_counter() - started
            return self._retry_signing([exc.index], str(exc))
        except ThresholdError as exc:
            self.timings["ts_agg"] += time.perf_counter() - started
            return self._fail(STATUS_THRESHOLD, str(exc))
        witness = self._derive_witness()
        token = GlobalToken(
            self.round_id,
            self.material.group_key,
            oprf_direct(witness, self.material.group_key.to_bytes()),
        )
        self.token = token
        self.material.rounds[self.round_id] = RevealPackage(self.model, token)
        self.timings["ts_agg"] += time.perf_counter() - started
        self.outcome = STATUS_OK
        self.stage = "done"
        payload = self.signature.to_bytes() + scalar_to_bytes(witness.value)
        return [
            Message(self.round_id, SERVER, client_address(i), MSG_BUNDLE, payload)
            for i in self.session.participants
        ]

    def _derive_witness(self) -> OprfKey:
        if not self.alt_witness:
            return OprfKey.generate(self.rng.child("witness"))
        return derive_group_witness(self.contributions, self.session.participants)


# ---------------------------------------------------------------------------
# Group witness from client contributions (alternative path)

def witness_contribution(keys: SignerKeys, rng: Drbg, exponent: Optional[int] = None) -> GroupElement:
    """K_i = vk_i^(r_i) for fresh r_i; `exponent` is a test seam."""
    r_i = rng.scalar(nonzero=True) if exponent is None else exponent
    return keys.verification_share * r_i


def derive_group_witness(
    contributions: Mapping[int, GroupElement],
    expected: Iterable[int],
) -> OprfKey:
    """K = H(prod K_i) as a nonzero scalar; every online client must contribute.

    The product lives in G while the PRF key must be an exponent, so the
    product's canonical encoding is hashed into Z_q \\ {0}.
    """
    missing = set(expected) - set(contributions)
    if missing:
        raise WitnessError(f"missing witness contribution from clients {sorted(missing)}")
    product = GroupElement.identity()
    for index in sorted(contributions):
        product = product + contributions[index]
    counter = 0
    while True:
        value = hash_to_scalar(
            TAG_ALT_WITNESS, [product.to_bytes(), counter.to_bytes(4, "big")]
        )
        if value:
            return OprfKey(value)
        counter += 1


# ---------------------------------------------------------------------------
# Generate / Reveal

def generate_phase(
    clients: Mapping[int, ClientKeyMaterial],
    server_material: ServerKeyMaterial,
    trainer_spec: TrainerSpec,
    schedule: DropoutSchedule,
    round_id: int,
    rng: Drbg,
    *,
    model_params: Optional[Sequence[float]] = None,
    alt_witness: bool = False,
    retain_model: bool = False,
    order: str = "fifo",
    order_seed: int = 0,
) -> RoundOutcome:
    """Run one Generate round over the simulated transport."""
    server = ServerParty(
        server_material,
        round_id,
        rng.child("server"),
        model_params=model_params,
        alt_witness=alt_witness,
    )
    client_parties = {
        i: ClientParty(
            material,
            trainer_spec,
            round_id,
            rng.child("client", i),
            alt_witness=alt_witness,
            retain_model=retain_model,
        )
        for i, material in clients.items()
    }
    parties = {SERVER: server}
    parties.update({p.address: p for p in client_parties.values()})
    transport = Transport(schedule=schedule, order=order, seed=order_seed)
    transcript = run_round(parties, transport, complete=lambda: server.outcome is not None)
    bundles = {
        i: p.bundle for i, p in client_parties.items() if p.bundle is not None
    }
    timings = {
        "sa_train": {i: p.timings["sa_train"] for i, p in client_parties.items()},
        "ts_sign": {i: p.timings["ts_sign"] for i, p in client_parties.items()},
        "sa_agg": server.timings["sa_agg"],
        "ts_agg": server.timings["ts_agg"],
    }
    return RoundOutcome(
        status=server.outcome,
        round_id=round_id,
        bundles=bundles,
        model=server.model if server.outcome == STATUS_OK else None,
        token=server.token,
        transcript=transcript,
        timings=timings,
        reason=server.reason,
    )


def reveal(server_material: ServerKeyMaterial, round_id: int) -> RevealPackage:
    """Hand (M_l, tk_l) to the service provider.  Idempotent."""
    try:
        return server_material.rounds[round_id]
    except KeyError:
        raise RoundLookupError(f"round {round_id} was never completed") from None


# ---------------------------------------------------------------------------
# Prove-phase parties

class ProverParty:
    """Anonymous client side of Prove; speaks only through the prover role."""

    def __init__(self, bundle: ProofBundle, round_id: int = 0):
        self.bundle = bundle
        self.round_id = round_id
        self.decision: Optional[int] = None
        self.timings: Dict[str, float] = {"prove_client": 0.0}

    def start(self) -> List[Message]:
        return [
            Message(self.round_id, PROVER, VERIFIER, MSG_PROVE_HASH, self.bundle.model_digest)
        ]

    def pending_timeout(self) -> bool:
        return False

    def on_timeout(self) -> List[Message]:
        return []

    def handle(self, msg: Message) -> List[Message]:
        if msg.mtype == MSG_PROVE_ALPHA:
            started = time.perf_counter()
            try:
                alpha = GroupElement.from_bytes(msg.payload)
                beta = oprf_evaluate(alpha, self.bundle.witness)
            except (DeserializationError, MembershipError):
                # a malformed or identity alpha: refuse to evaluate, output 0
                self.decision = 0
                self.timings["prove_client"] += time.perf_counter() - started
                return [Message(self.round_id, PROVER, VERIFIER, MSG_PROVE_ABORT, b"\x00")]
            payload = self.bundle.signature.to_bytes() + beta.to_bytes()
            self.timings["prove_client"] += time.perf_counter() - started
            return [Message(self.round_id, PROVER, VERIFIER, MSG_PROVE_RESPONSE, payload)]
        if msg.mtype == MSG_PROVE_DECISION:
            self.decision = msg.payload[0]
            return []
        raise FedPopError(f"prover: unexpected message {msg.mtype}")


class VerifierParty:
    """Service provider side of Prove."""

    def __init__(self, package: RevealPackage, rng: Drbg, round_id: int = 0):
        self.package = package
        self.rng = rng
        self.round_id = round_id
        self.expected_digest = package.digest
        self.decision: Optional[int] = None
        self._blind = None
        self.timings: Dict[str, float] = {"prove_sp": 0.0}

    def start(self) -> List[Message]:
        return []

    def pending_timeout(self) -> bool:
        return False

    def on_timeout(self) -> List[Message]:
        return []

    def _decide(self, bit: int) -> List[Message]:
        self.decision = bit
        return [
            Message(self.round_id, VERIFIER, PROVER, MSG_PROVE_DECISION, bytes([bit]))
        ]

    def handle(self, msg: Message) -> List[Message]:
        if msg.mtype == MSG_PROVE_HASH:
            started = time.perf_counter()
            if msg.payload != self.expected_digest:
                self.timings["prove_sp"] += time.perf_counter() - started
                return self._decide(0)
            self._blind = oprf_blind(
                self.package.token.group_key.to_bytes(), self.rng.child("blind")
            )
            self.timings["prove_sp"] += time.perf_counter() - started
            return [
                Message(
                    self.round_id, VERIFIER, PROVER, MSG_PROVE_ALPHA,
                    self._blind.alpha.to_bytes(),
                )
            ]
        if msg.mtype == MSG_PROVE_RESPONSE:
            started = time.perf_counter()
            bit = self._check_response(msg.payload)
            self.timings["prove_sp"] += time.perf_counter() - started
            return self._decide(bit)
        if msg.mtype == MSG_PROVE_ABORT:
            self.decision = 0
            return []
        raise FedPopError(f"verifier: unexpected message {msg.mtype}")

    def _check_response(self, payload: bytes) -> int:
        try:
            signature = ThresholdSignature.from_bytes(payload[:SIGNATURE_BYTES])
            beta = GroupElement.from_bytes(payload[SIGNATURE_BYTES:])
        except (DeserializationError, MembershipError):
            return 0
        token = self.package.token
        if not ts_verify(signature, self.expected_digest, token.group_key):
            return 0
        try:
            prf_value = oprf_unblind(beta, self._blind)
        except (MembershipError, FedPopError):
            return 0
        return 1 if prf_value == token.prf_value else 0


def prove_phase(
    bundle: ProofBundle,
    package: RevealPackage,
    verifier_rng: Drbg,
    *,
    order: str = "fifo",
    order_seed: int = 0,
) -> ProveOutcome:
    """One Prove execution; both sides return 0/1 decisions, never exceptions."""
    prover = ProverParty(bundle, round_id=bundle.round_id)
    verifier = VerifierParty(package, verifier_rng, round_id=package.token.round_id)
    parties = {PROVER: prover, VERIFIER: verifier}
    transport = Transport(order=order, seed=order_seed)
    transcript = run_round(
        parties,
        transport,
        complete=lambda: prover.decision is not None and verifier.decision is not None,
    )
    return ProveOutcome(
        client_decision=prover.decision,
        sp_decision=verifier.decision,
        transcript=transcript,
        timings={
            "prove_client": prover.timings["prove_client"],
            "prove_sp": verifier.timings["prove_sp"],
        },
    )
