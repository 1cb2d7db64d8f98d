"""Command-line front end: setup, generate, prove, bench.

Exit codes: 0 accept/success, 10 proof rejected, 2 usage or parse error,
3 round failure (threshold or unmaskable).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import DEFAULT_CLIENT_COUNTS, DEFAULT_DROPOUT_RATES, run_grid, write_csv
from .encoding import ModelVector
from .errors import FedPopError, ParameterError
from .protocol import (
    GlobalToken,
    ProofBundle,
    RevealPackage,
    generate_phase,
    prove_phase,
    reveal,
    setup_phase,
)
from .rng import Drbg
from .simulator import sample_dropout
from .store import client_file, load_store, save_store
from .trainer import KINDS, TrainerSpec

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ROUND_FAILURE = 3
EXIT_REJECT = 10


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedpop",
        description="Federated rounds with threshold-signed participation proofs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_setup = sub.add_parser("setup", help="generate per-party key files")
    p_setup.add_argument("--n", type=int, required=True, help="number of clients")
    p_setup.add_argument("--ndrop", type=int, required=True, help="tolerated dropouts")
    p_setup.add_argument("--dim", type=int, default=16, help="model dimension")
    p_setup.add_argument("--seed", type=int, default=0, help="master seed")
    p_setup.add_argument("--out", type=Path, required=True, help="key-store directory")

    p_gen = sub.add_parser("generate", help="run one aggregation + proof round")
    p_gen.add_argument("--store", type=Path, required=True, help="key-store directory")
    p_gen.add_argument("--dropout-rate", type=float, default=0.0)
    p_gen.add_argument("--trainer", choices=KINDS, default="synthetic")
    p_gen.add_argument("--alt-witness", action="store_true",
                       help="derive the group witness from client contributions")
    p_gen.add_argument("--round", type=int, default=1)

    p_prove = sub.add_parser("prove", help="verify a participation proof")
    p_prove.add_argument("--bundle", type=Path, required=True)
    p_prove.add_argument("--token", type=Path, required=True)
    p_prove.add_argument("--model", type=Path, default=None,
                         help="model file revealed with the token "
                              "(default: model.bin next to the token)")

    p_bench = sub.add_parser("bench", help="run the benchmark grid, write CSV")
    p_bench.add_argument("--grid-file", type=Path, default=None,
                         help="JSON file with n/rates/reps/dim/seed overrides")
    p_bench.add_argument("--reps", type=int, default=10)
    p_bench.add_argument("--csv", type=Path, required=True)
    p_bench.add_argument("--dim", type=int, default=64)
    p_bench.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_setup(args) -> int:
    try:
        rng = Drbg.from_seed(args.seed).child("setup")
        clients, server = setup_phase(args.n, args.ndrop, rng, dimension=args.dim)
    except ParameterError as exc:
        print(f"setup: {exc}", file=sys.stderr)
        return EXIT_PARSE
    config = {
        "n": args.n,
        "ndrop": args.ndrop,
        "t": server.threshold,
        "dim": args.dim,
        "seed": args.seed,
    }
    save_store(args.out, clients, server, config)
    print(f"wrote {len(clients)} client files + server file to {args.out} (t={server.threshold})")
    return EXIT_OK


def _cmd_generate(args) -> int:
    try:
        clients, server, config = load_store(args.store)
    except FedPopError as exc:
        print(f"generate: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if not 0 <= args.dropout_rate < 1:
        print("generate: dropout rate must be in [0, 1)", file=sys.stderr)
        return EXIT_PARSE
    seed = config.get("seed", 0)
    spec = TrainerSpec(kind=args.trainer, dimension=config["dim"],
                       data_seed=seed + args.round)
    schedule = sample_dropout(args.dropout_rate, config["n"], seed=f"{seed}/{args.round}")
    rng = Drbg.from_seed(seed).child("generate", args.round)
    outcome = generate_phase(
        clients, server, spec, schedule, args.round, rng,
        alt_witness=args.alt_witness,
    )
    out_dir = args.store / f"round_{args.round:03d}"
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "transcript.jsonl").write_text(outcome.transcript.to_jsonl())
    if outcome.status != "ok":
        print(f"round {args.round} failed: {outcome.status} ({outcome.reason})")
        return EXIT_ROUND_FAILURE
    package = reveal(server, args.round)
    (out_dir / "model.bin").write_bytes(package.model.to_bytes())
    (out_dir / "token.json").write_text(
        json.dumps(package.token.to_json(), sort_keys=True, indent=2) + "\n"
    )
    for index, bundle in sorted(outcome.bundles.items()):
        path = out_dir / f"bundle_{client_file(index)}"
        path.write_text(json.dumps(bundle.to_json(), sort_keys=True, indent=2) + "\n")
    dropped = sorted(schedule.dropped)
    print(
        f"round {args.round}: {len(outcome.bundles)} bundles, "
        f"dropped={dropped}, outputs in {out_dir}"
    )
    return EXIT_OK


def _cmd_prove(args) -> int:
    try:
        bundle = ProofBundle.from_json(json.loads(args.bundle.read_text()))
        token = GlobalToken.from_json(json.loads(args.token.read_text()))
        model_path = args.model if args.model is not None else args.token.parent / "model.bin"
        from .encoding import FixedPointParams

        model = ModelVector.from_bytes(model_path.read_bytes(), FixedPointParams())
    except (OSError, ValueError, FedPopError) as exc:
        print(f"prove: {exc}", file=sys.stderr)
        return EXIT_PARSE
    package = RevealPackage(model=model, token=token)
    result = prove_phase(bundle, package, Drbg.system())
    sp_to_client = result.transcript.payload_bytes("verifier", "prover")
    client_to_sp = result.transcript.payload_bytes("prover", "verifier")
    print(
        f"decision: client={result.client_decision} sp={result.sp_decision} "
        f"(sp->client {sp_to_client} B, client->sp {client_to_sp} B)"
    )
    return EXIT_OK if result.sp_decision == 1 else EXIT_REJECT


def _cmd_bench(args) -> int:
    counts = list(DEFAULT_CLIENT_COUNTS)
    rates = list(DEFAULT_DROPOUT_RATES)
    reps, dim, seed = args.reps, args.dim, args.seed
    if args.grid_file is not None:
        try:
            grid = json.loads(args.grid_file.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"bench: {exc}", file=sys.stderr)
            return EXIT_PARSE
        counts = list(grid.get("n", counts))
        rates = list(grid.get("rates", rates))
        reps = int(grid.get("reps", reps))
        dim = int(grid.get("dim", dim))
        seed = grid.get("seed", seed)
    records = run_grid(counts, rates, reps=reps, dimension=dim, seed=seed)
    write_csv(records, args.csv)
    failed = sum(1 for r in records if r.failures)
    print(f"wrote {len(records)} rows to {args.csv}" +
          (f" ({failed} rows had failed reps)" if failed else ""))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "setup": _cmd_setup,
        "generate": _cmd_generate,
        "prove": _cmd_prove,
        "bench": _cmd_bench,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
