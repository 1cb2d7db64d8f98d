"""Deterministic in-process transport for party state machines.

Messages are delivered one at a time, either FIFO or in a seeded-shuffle
order; every delivered message lands in the transcript.  A dropout schedule
names, per client, the protocol step after which it stops responding; the
transport silently discards anything addressed to a client past its drop
step, which is exactly how an unresponsive peer looks to the others.  When
no message is in flight, parties waiting on a timeout get fired, modeling
the server's classification timers without wall clocks.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Mapping, Optional, Protocol, Tuple

from .errors import ParameterError, SimulatorError
from .rng import Drbg

DROP_BEFORE_PROTECT = "before-protect"
DROP_AFTER_PROTECT = "after-protect"
DROP_BEFORE_SIGN = "before-sign"
DROP_STEPS = (DROP_BEFORE_PROTECT, DROP_AFTER_PROTECT, DROP_BEFORE_SIGN)

# Protocol stage each inbound message type belongs to; a client whose drop
# step precedes the stage never sees the message.
MSG_MODEL_PARAMS = "model-params"
MSG_MASKED_UPDATE = "masked-update"
MSG_SHARE_REQUEST = "share-request"
MSG_RECOVERY_SHARES = "recovery-shares"
MSG_AGGREGATE_MODEL = "aggregate-model"
MSG_NONCE_COMMITMENT = "nonce-commitment"
MSG_SIGN_REQUEST = "sign-request"
MSG_PARTIAL_SIG = "partial-signature"
MSG_BUNDLE = "bundle"
MSG_PROVE_HASH = "prove-hash"
MSG_PROVE_ALPHA = "prove-alpha"
MSG_PROVE_RESPONSE = "prove-response"
MSG_PROVE_DECISION = "prove-decision"
MSG_PROVE_ABORT = "prove-abort"

_STAGE_OF_MESSAGE = {
    MSG_MODEL_PARAMS: 1,
    MSG_SHARE_REQUEST: 2,
    MSG_AGGREGATE_MODEL: 4,
    MSG_SIGN_REQUEST: 4,
    MSG_BUNDLE: 4,
}

# Highest inbound stage a client with the given drop step still receives.
_LAST_STAGE = {
    DROP_BEFORE_PROTECT: 0,
    DROP_AFTER_PROTECT: 1,
    DROP_BEFORE_SIGN: 3,
}


@dataclass(frozen=True)
class Message:
    round_id: int
    sender: str
    receiver: str
    mtype: str
    payload: bytes

    def to_wire_json(self) -> str:
        """The on-the-wire envelope."""
        return json.dumps(
            {"round": self.round_id, "type": self.mtype, "payload": self.payload.hex()},
            sort_keys=True,
        )


@dataclass(frozen=True)
class TranscriptEntry:
    round_id: int
    sender: str
    receiver: str
    mtype: str
    payload: bytes


class Transcript:
    """Append-only record of every delivered message."""

    def __init__(self):
        self.entries: List[TranscriptEntry] = []

    def append(self, msg: Message) -> None:
        self.entries.append(
            TranscriptEntry(msg.round_id, msg.sender, msg.receiver, msg.mtype, msg.payload)
        )

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {
                    "round": e.round_id,
                    "sender": e.sender,
                    "receiver": e.receiver,
                    "type": e.mtype,
                    "payload": e.payload.hex(),
                },
                sort_keys=True,
            )
            for e in self.entries
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    def payload_bytes(self, sender_prefix: str, receiver_prefix: str) -> int:
        return sum(
            len(e.payload)
            for e in self.entries
            if e.sender.startswith(sender_prefix) and e.receiver.startswith(receiver_prefix)
        )

    def structure(self) -> List[Tuple[str, str, str, int]]:
        """(sender, receiver, type, payload length) per entry, for shape checks."""
        return [(e.sender, e.receiver, e.mtype, len(e.payload)) for e in self.entries]


@dataclass(frozen=True)
class DropoutSchedule:
    """Client index -> named drop step, immutable for the round."""

    drops: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for index, step in self.drops.items():
            if step not in DROP_STEPS:
                raise ParameterError(f"unknown drop step {step!r} for client {index}")

    @classmethod
    def none(cls) -> "DropoutSchedule":
        return cls({})

    @classmethod
    def uniform(cls, indices: Iterable[int], step: str) -> "DropoutSchedule":
        return cls({i: step for i in indices})

    @property
    def dropped(self) -> frozenset[int]:
        return frozenset(self.drops)

    def last_stage(self, index: int) -> Optional[int]:
        step = self.drops.get(index)
        return None if step is None else _LAST_STAGE[step]


def sample_dropout(
    rate: float, n: int, seed, step: str = DROP_BEFORE_PROTECT
) -> DropoutSchedule:
    """floor(rate * n) distinct clients, seeded, all dropping at `step`."""
    if not 0 <= rate < 1:
        raise ParameterError("dropout rate must satisfy 0 <= rate < 1")
    count = int(rate * n)
    indices = Drbg.from_seed(seed).child("dropout").sample_indices(count, n)
    return DropoutSchedule.uniform(indices, step)


class Party(Protocol):
    def start(self) -> List[Message]: ...
    def handle(self, msg: Message) -> List[Message]: ...
    def pending_timeout(self) -> bool: ...
    def on_timeout(self) -> List[Message]: ...


def _client_index(address: str) -> Optional[int]:
    if address.startswith("client:"):
        return int(address.split(":", 1)[1])
    return None


class Transport:
    """Message queue with delivery-order policy, drop filtering, transcript."""

    def __init__(
        self,
        schedule: DropoutSchedule = DropoutSchedule.none(),
        order: str = "fifo",
        seed=0,
        transcript: Optional[Transcript] = None,
    ):
        if order not in ("fifo", "seeded-shuffle"):
            raise ParameterError("delivery order must be fifo or seeded-shuffle")
        self.schedule = schedule
        self.order = order
        self._shuffle_rng = random.Random(f"fedpop-transport-{seed}")
        self.transcript = transcript if transcript is not None else Transcript()
        self._queue: List[Message] = []

    def send(self, messages: Iterable[Message]) -> None:
        self._queue.extend(messages)

    def _discard(self, msg: Message) -> bool:
        index = _client_index(msg.receiver)
        if index is None:
            return False
        last = self.schedule.last_stage(index)
        if last is None:
            return False
        stage = _STAGE_OF_MESSAGE.get(msg.mtype, 1)
        return stage > last

    def pop(self) -> Optional[Message]:
        while self._queue:
            if self.order == "fifo":
                msg = self._queue.pop(0)
            else:
                msg = self._queue.pop(self._shuffle_rng.randrange(len(self._queue)))
            if self._discard(msg):
                continue
            self.transcript.append(msg)
            return msg
        return None


def run_round(
    parties: Mapping[str, Party],
    transport: Transport,
    complete: "Callable[[], bool]",
    max_deliveries: int = 1_000_000,
) -> Transcript:
    """Step all parties to quiescence.

    `complete` decides whether the protocol reached an outcome (success or a
    declared failure); quiescence without completion is a deadlock and raises
    SimulatorError with last-step diagnostics.  Stalled clients alone are not
    a deadlock: a failed round legitimately leaves them waiting.
    """
    for party in parties.values():
        transport.send(party.start())
    deliveries = 0
    last: Optional[Message] = None
    while True:
        msg = transport.pop()
        if msg is None:
            fired = False
            for party in parties.values():
                if party.pending_timeout():
                    transport.send(party.on_timeout())
                    fired = True
                    break
            if fired:
                continue
            break
        if msg.receiver not in parties:
            raise SimulatorError(f"message addressed to unknown party {msg.receiver!r}")
        deliveries += 1
        if deliveries > max_deliveries:
            raise SimulatorError("delivery budget exhausted; protocol is looping")
        transport.send(parties[msg.receiver].handle(msg))
        last = msg
    if not complete():
        detail = f"after {last.mtype} to {last.receiver}" if last else "before any delivery"
        raise SimulatorError(f"deadlock: protocol incomplete, quiesced {detail}")
    return transport.transcript
