import json

import pytest

from fedpop.encoding import FixedPointParams
from fedpop.errors import ParameterError, SimulatorError
from fedpop.protocol import generate_phase, setup_phase
from fedpop.rng import Drbg
from fedpop.simulator import (
    DROP_AFTER_PROTECT,
    DROP_BEFORE_PROTECT,
    DROP_BEFORE_SIGN,
    DropoutSchedule,
    Message,
    Transport,
    run_round,
    sample_dropout,
)
from fedpop.trainer import TrainerSpec

FP = FixedPointParams(fractional_bits=16, clamp=64.0)
SPEC = TrainerSpec(kind="synthetic", dimension=4, data_seed=1)


def run_generate(n, n_drop, schedule, seed=5, **kwargs):
    rng = Drbg.from_seed(seed)
    clients, server = setup_phase(n, n_drop, rng.child("setup"), dimension=4, fixed_point=FP)
    return generate_phase(
        clients, server, SPEC, schedule, round_id=1, rng=rng.child("round"), **kwargs
    )


def test_empty_schedule_all_bundles():
    outcome = run_generate(5, 1, DropoutSchedule.none())
    assert outcome.status == "ok"
    assert sorted(outcome.bundles) == [1, 2, 3, 4, 5]


def test_paper_rate_70_percent_t_030():
    # 7 of 10 drop, threshold 3: round succeeds with 3 bundles
    schedule = DropoutSchedule.uniform([1, 2, 3, 4, 5, 6, 7], DROP_BEFORE_PROTECT)
    outcome = run_generate(10, 7, schedule)
    assert outcome.status == "ok"
    assert sorted(outcome.bundles) == [8, 9, 10]


def test_same_seed_byte_identical_transcripts():
    schedule = sample_dropout(0.3, 6, seed=2)
    a = run_generate(6, 2, schedule, seed=11, order="seeded-shuffle", order_seed=3)
    b = run_generate(6, 2, schedule, seed=11, order="seeded-shuffle", order_seed=3)
    assert a.transcript.to_jsonl() == b.transcript.to_jsonl()
    assert a.model.to_bytes() == b.model.to_bytes()


def test_shuffled_delivery_same_outcome():
    schedule = DropoutSchedule.uniform([2], DROP_BEFORE_PROTECT)
    fifo = run_generate(5, 1, schedule, seed=8)
    shuffled = run_generate(5, 1, schedule, seed=8, order="seeded-shuffle", order_seed=77)
    assert fifo.status == shuffled.status == "ok"
    assert fifo.model.to_bytes() == shuffled.model.to_bytes()
    assert sorted(fifo.bundles) == sorted(shuffled.bundles)


def test_drop_before_protect_contributes_nothing():
    schedule = DropoutSchedule.uniform([3], DROP_BEFORE_PROTECT)
    outcome = run_generate(4, 1, schedule)
    assert outcome.status == "ok"
    updates = [
        e for e in outcome.transcript.entries if e.mtype == "masked-update"
    ]
    assert sorted(int(e.sender.split(":")[1]) for e in updates) == [1, 2, 4]
    assert 3 not in outcome.bundles


def test_drop_after_protect_contributes_update_but_no_shares_or_signature():
    schedule = DropoutSchedule.uniform([3], DROP_AFTER_PROTECT)
    outcome = run_generate(4, 1, schedule)
    assert outcome.status == "ok"
    updates = {int(e.sender.split(":")[1]) for e in outcome.transcript.entries
               if e.mtype == "masked-update"}
    shares = {int(e.sender.split(":")[1]) for e in outcome.transcript.entries
              if e.mtype == "recovery-shares"}
    partials = {int(e.sender.split(":")[1]) for e in outcome.transcript.entries
                if e.mtype == "partial-signature"}
    assert 3 in updates
    assert 3 not in shares
    assert 3 not in partials
    assert 3 not in outcome.bundles


def test_drop_before_sign_contributes_shares_but_no_signature():
    schedule = DropoutSchedule.uniform([2], DROP_BEFORE_SIGN)
    outcome = run_generate(4, 1, schedule)
    assert outcome.status == "ok"
    shares = {int(e.sender.split(":")[1]) for e in outcome.transcript.entries
              if e.mtype == "recovery-shares"}
    partials = {int(e.sender.split(":")[1]) for e in outcome.transcript.entries
                if e.mtype == "partial-signature"}
    assert 2 in shares
    assert 2 not in partials
    assert 2 not in outcome.bundles


def test_too_many_drops_is_threshold_error():
    schedule = DropoutSchedule.uniform([1, 2], DROP_BEFORE_PROTECT)
    outcome = run_generate(10, 1, schedule)  # t = 9, only 8 can sign
    assert outcome.status == "threshold-error"
    assert outcome.bundles == {}
    assert outcome.token is None


def test_unrecoverable_round_aborts_closed():
    # t_sa = 4 but only 3 clients still answer share requests
    rng = Drbg.from_seed(3)
    clients, server = setup_phase(
        6, 1, rng.child("setup"), dimension=4, fixed_point=FP, t_sa=4
    )
    schedule = DropoutSchedule.uniform([1, 2, 3], DROP_AFTER_PROTECT)
    outcome = generate_phase(clients, server, SPEC, schedule, 1, rng.child("round"))
    assert outcome.status == "unmaskable"
    assert outcome.model is None
    assert outcome.bundles == {}
    # aborting before signing: no sign requests on the wire
    assert not [e for e in outcome.transcript.entries if e.mtype == "sign-request"]


def test_sample_dropout_properties():
    assert sample_dropout(0.0, 10, seed=1).dropped == frozenset()
    schedule = sample_dropout(0.5, 10, seed=1)
    assert len(schedule.dropped) == 5
    assert schedule.drops == sample_dropout(0.5, 10, seed=1).drops
    assert sample_dropout(0.5, 10, seed=2).drops != schedule.drops
    with pytest.raises(ParameterError):
        sample_dropout(1.0, 10, seed=1)


def test_schedule_validation():
    with pytest.raises(ParameterError):
        DropoutSchedule({1: "sometime"})


def test_transcript_jsonl_and_wire_envelope():
    outcome = run_generate(4, 1, DropoutSchedule.none())
    lines = outcome.transcript.to_jsonl().strip().split("\n")
    assert len(lines) == len(outcome.transcript.entries)
    first = json.loads(lines[0])
    assert set(first) == {"round", "sender", "receiver", "type", "payload"}
    entry = outcome.transcript.entries[0]
    wire = json.loads(
        Message(entry.round_id, entry.sender, entry.receiver, entry.mtype, entry.payload)
        .to_wire_json()
    )
    assert set(wire) == {"round", "type", "payload"}


def test_deadlock_detection():
    class Mute:
        def start(self):
            return []

        def handle(self, msg):
            return []

        def pending_timeout(self):
            return False

        def on_timeout(self):
            return []

    with pytest.raises(SimulatorError, match="deadlock"):
        run_round({"server": Mute()}, Transport(), complete=lambda: False)


def test_unknown_receiver_detected():
    class Chatty:
        def start(self):
            return [Message(0, "server", "nowhere", "prove-hash", b"")]

        def handle(self, msg):
            return []

        def pending_timeout(self):
            return False

        def on_timeout(self):
            return []

    with pytest.raises(SimulatorError, match="unknown party"):
        run_round({"server": Chatty()}, Transport(), complete=lambda: True)
