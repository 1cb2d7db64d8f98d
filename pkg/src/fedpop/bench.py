"""Benchmark grid over client counts and dropout rates.

The measured methodology mirrors the experimental setup the numbers come
from: per scenario (n, rate) a randomly chosen active cohort of n - n_drop
clients runs the full round (inactive clients never join, so the signature
threshold t equals the cohort size), and reported times decompose into the
per-client SA-train and TS-sign averages plus the server's SA-agg and TS-agg
shares, with one Prove execution measured per repetition.
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass, field
from statistics import mean
from typing import Iterable, List, Optional, Sequence

from .encoding import FixedPointParams
from .errors import FedPopError
from .protocol import generate_phase, prove_phase, reveal, setup_phase
from .rng import Drbg
from .simulator import DropoutSchedule
from .trainer import TrainerSpec

CSV_COLUMNS = [
    "n",
    "ndrop",
    "t",
    "sa_train_s",
    "ts_sign_s",
    "sa_agg_s",
    "ts_agg_s",
    "prove_client_s",
    "prove_sp_s",
    "bytes_sp_to_client",
    "bytes_client_to_sp",
]

DEFAULT_CLIENT_COUNTS = (10, 25, 50, 100)
DEFAULT_DROPOUT_RATES = (0.10, 0.30, 0.50, 0.70)


@dataclass
class BenchRecord:
    n: int
    ndrop: int
    t: int
    sa_train_s: Optional[float] = None
    ts_sign_s: Optional[float] = None
    sa_agg_s: Optional[float] = None
    ts_agg_s: Optional[float] = None
    prove_client_s: Optional[float] = None
    prove_sp_s: Optional[float] = None
    bytes_sp_to_client: Optional[int] = None
    bytes_client_to_sp: Optional[int] = None
    failures: List[str] = field(default_factory=list)  # not a CSV column
    rep_samples: dict = field(default_factory=dict)    # raw per-rep values

    def to_row(self) -> List[str]:
        row = []
        for column in CSV_COLUMNS:
            value = getattr(self, column)
            if value is None:
                row.append("")
            elif isinstance(value, float):
                row.append(f"{value:.6f}")
            else:
                row.append(str(value))
        return row


def run_scenario(
    n: int,
    rate: float,
    reps: int,
    dimension: int,
    seed,
    trainer_kind: str = "synthetic",
) -> BenchRecord:
    """Average `reps` measured rounds of the (n, rate) scenario."""
    ndrop = int(rate * n)
    cohort = n - ndrop
    record = BenchRecord(n=n, ndrop=ndrop, t=cohort)
    samples: dict = {key: [] for key in CSV_COLUMNS[3:]}
    for rep in range(reps):
        rng = Drbg.from_seed(seed).child("bench", n, int(rate * 100), rep)
        try:
            spec = TrainerSpec(kind=trainer_kind, dimension=dimension, data_seed=rep)
            clients, server = setup_phase(
                cohort, 0, rng.child("setup"), dimension=dimension
            )
            outcome = generate_phase(
                clients,
                server,
                spec,
                DropoutSchedule.none(),
                round_id=rep,
                rng=rng.child("round"),
            )
            if outcome.status != "ok":
                raise FedPopError(f"round failed: {outcome.status} ({outcome.reason})")
            package = reveal(server, rep)
            prover_index = sorted(outcome.bundles)[0]
            prove = prove_phase(
                outcome.bundles[prover_index], package, rng.child("sp")
            )
            if (prove.client_decision, prove.sp_decision) != (1, 1):
                raise FedPopError("prove rejected an honest bundle")
        except FedPopError as exc:
            record.failures.append(f"rep {rep}: {exc}")
            continue
        samples["sa_train_s"].append(mean(outcome.timings["sa_train"].values()))
        samples["ts_sign_s"].append(mean(outcome.timings["ts_sign"].values()))
        samples["sa_agg_s"].append(outcome.timings["sa_agg"])
        samples["ts_agg_s"].append(outcome.timings["ts_agg"])
        samples["prove_client_s"].append(prove.timings["prove_client"])
        samples["prove_sp_s"].append(prove.timings["prove_sp"])
        samples["bytes_sp_to_client"].append(
            prove.transcript.payload_bytes("verifier", "prover")
        )
        samples["bytes_client_to_sp"].append(
            prove.transcript.payload_bytes("prover", "verifier")
        )
    record.rep_samples = samples
    if samples["sa_train_s"]:
        for key in ("sa_train_s", "ts_sign_s", "sa_agg_s", "ts_agg_s",
                    "prove_client_s", "prove_sp_s"):
            setattr(record, key, mean(samples[key]))
        for key in ("bytes_sp_to_client", "bytes_client_to_sp"):
            setattr(record, key, int(mean(samples[key])))
    return record


def run_grid(
    client_counts: Sequence[int] = DEFAULT_CLIENT_COUNTS,
    dropout_rates: Sequence[float] = DEFAULT_DROPOUT_RATES,
    reps: int = 10,
    dimension: int = 64,
    seed=0,
    trainer_kind: str = "synthetic",
    log=sys.stderr,
) -> List[BenchRecord]:
    records = []
    for n in client_counts:
        for rate in dropout_rates:
            record = run_scenario(n, rate, reps, dimension, seed, trainer_kind)
            for failure in record.failures:
                print(f"bench n={n} rate={rate}: {failure}", file=log)
            records.append(record)
    return records


def write_csv(records: Iterable[BenchRecord], path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.to_row())
