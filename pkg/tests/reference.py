"""Trusted-party reference of the ideal functionality, used as the
conformance oracle.

It performs the task a trusted third party would: collect plaintext updates,
sum them directly, record which clients finished the round, and answer Prove
queries by record lookup.  No cryptography: outcomes follow purely from the
scenario script, so agreement with the real pipeline is meaningful.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from fedpop.encoding import FixedPointParams, ModelVector, encode_fixed_point
from fedpop.simulator import (
    DROP_AFTER_PROTECT,
    DROP_BEFORE_PROTECT,
    DROP_BEFORE_SIGN,
    DropoutSchedule,
)
from fedpop.trainer import TrainerSpec, local_train


@dataclass
class IdealRound:
    status: str
    model: Optional[ModelVector]
    holders: Set[int]


@dataclass
class IdealFunctionality:
    """Record-keeping stand-in for the protocol."""

    n: int
    threshold: int
    t_sa: int
    graph: Dict[int, tuple]
    fixed_point: FixedPointParams
    rounds: Dict[int, IdealRound] = field(default_factory=dict)
    revealed: Dict[int, int] = field(default_factory=dict)  # sp view: round -> round

    def generate(
        self,
        round_id: int,
        trainer_spec: TrainerSpec,
        schedule: DropoutSchedule,
        model_params: Optional[List[float]] = None,
    ) -> IdealRound:
        everyone = set(range(1, self.n + 1))
        drops = dict(schedule.drops)
        contributors = sorted(
            i for i in everyone if drops.get(i) != DROP_BEFORE_PROTECT
        )
        finishers = {i for i in everyone if i not in drops}
        outcome = self._classify(contributors, drops, finishers)
        if outcome is not None:
            record = IdealRound(outcome, None, set())
        else:
            total = None
            for i in contributors:
                update = local_train(trainer_spec, i, model_params)
                encoded = encode_fixed_point(update, self.fixed_point)
                total = encoded if total is None else total + encoded
            record = IdealRound("ok", total, finishers)
        self.rounds[round_id] = record
        return record

    def _classify(self, contributors, drops, finishers) -> Optional[str]:
        """Mirror the real pipeline's failure taxonomy from the script alone."""
        if not contributors:
            return "threshold-error"
        # a needed secret is recoverable when enough share-holding neighbors
        # still answer share requests (anyone not dropped at/before that step)
        responsive = {
            i
            for i in range(1, self.n + 1)
            if drops.get(i) not in (DROP_BEFORE_PROTECT, DROP_AFTER_PROTECT)
        }
        online = set(contributors)
        for i in sorted(online):  # self-mask of every contributor
            providers = [j for j in self.graph[i] if j in responsive]
            if len(providers) < self.t_sa:
                return "unmaskable"
        for j in sorted(set(self.graph) - online):  # keys of dropped clients
            if not any(i in online for i in self.graph[j]):
                continue
            providers = [i for i in self.graph[j] if i in responsive]
            if len(providers) < self.t_sa:
                return "unmaskable"
        if len(finishers) < self.threshold:
            return "threshold-error"
        return None

    def reveal(self, round_id: int) -> Optional[IdealRound]:
        record = self.rounds.get(round_id)
        if record is None or record.status != "ok":
            return None
        self.revealed[round_id] = round_id
        return record

    def prove(self, client: int, client_round: int, sp_round: int, tampered: bool = False) -> int:
        """1 iff the untampered client tuple is on record for the round whose
        token the service provider holds."""
        if tampered:
            return 0
        record = self.rounds.get(client_round)
        sp_record = self.rounds.get(sp_round)
        if record is None or sp_record is None:
            return 0
        if record.status != "ok" or sp_record.status != "ok":
            return 0
        if client not in record.holders:
            return 0
        if record.model.to_bytes() != sp_record.model.to_bytes():
            return 0
        if client_round != sp_round:
            # the sp token binds a specific round's key material
            return 0
        return 1
