import csv
import json
from pathlib import Path

import pytest

from fedpop.cli import EXIT_OK, EXIT_PARSE, EXIT_REJECT, EXIT_ROUND_FAILURE, main
from fedpop.store import load_store


def run(argv):
    return main([str(a) for a in argv])


def setup_store(tmp_path, n=6, ndrop=1, dim=4, seed=9) -> Path:
    store = tmp_path / "store"
    assert run(["setup", "--n", n, "--ndrop", ndrop, "--dim", dim,
                "--seed", seed, "--out", store]) == EXIT_OK
    return store


def test_setup_writes_expected_files(tmp_path):
    store = setup_store(tmp_path, n=10, ndrop=1)
    client_files = sorted(p.name for p in store.glob("client_*.json"))
    assert len(client_files) == 10
    assert (store / "server.json").exists()
    config = json.loads((store / "config.json").read_text())
    assert config["t"] == 9


def test_setup_rerun_same_seed_identical_files(tmp_path):
    store_a = tmp_path / "a"
    store_b = tmp_path / "b"
    for store in (store_a, store_b):
        assert run(["setup", "--n", 4, "--ndrop", 1, "--dim", 4,
                    "--seed", 5, "--out", store]) == EXIT_OK
    for name in [p.name for p in store_a.iterdir()]:
        assert (store_a / name).read_bytes() == (store_b / name).read_bytes()


def test_setup_parameter_error_exit_code(tmp_path):
    assert run(["setup", "--n", 4, "--ndrop", 4, "--dim", 4,
                "--seed", 0, "--out", tmp_path / "x"]) == EXIT_PARSE


def test_generate_and_prove_roundtrip(tmp_path, capsys):
    store = setup_store(tmp_path)
    assert run(["generate", "--store", store, "--dropout-rate", 0.0,
                "--trainer", "synthetic", "--round", 1]) == EXIT_OK
    round_dir = store / "round_001"
    bundles = sorted(round_dir.glob("bundle_client_*.json"))
    assert len(bundles) == 6
    assert (round_dir / "token.json").exists()
    assert (round_dir / "model.bin").exists()
    assert (round_dir / "transcript.jsonl").exists()
    code = run(["prove", "--bundle", bundles[0], "--token", round_dir / "token.json"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "client=1 sp=1" in out


def test_generate_dropout_gives_fewer_bundles(tmp_path):
    store = setup_store(tmp_path, n=10, ndrop=3)
    assert run(["generate", "--store", store, "--dropout-rate", 0.3,
                "--round", 2]) == EXIT_OK
    bundles = list((store / "round_002").glob("bundle_client_*.json"))
    assert len(bundles) == 7


def test_generate_threshold_failure_exit_code(tmp_path):
    store = setup_store(tmp_path, n=10, ndrop=1)  # t = 9
    assert run(["generate", "--store", store, "--dropout-rate", 0.7,
                "--round", 1]) == EXIT_ROUND_FAILURE
    assert not list((store / "round_001").glob("bundle_*.json"))


def test_generate_alt_witness_prove_accepts(tmp_path):
    store = setup_store(tmp_path, n=5, ndrop=1)
    assert run(["generate", "--store", store, "--alt-witness", "--round", 3]) == EXIT_OK
    round_dir = store / "round_003"
    bundle = sorted(round_dir.glob("bundle_client_*.json"))[0]
    assert run(["prove", "--bundle", bundle, "--token", round_dir / "token.json"]) == EXIT_OK


def test_prove_cross_round_token_rejected(tmp_path):
    store = setup_store(tmp_path)
    assert run(["generate", "--store", store, "--round", 1]) == EXIT_OK
    assert run(["generate", "--store", store, "--round", 2]) == EXIT_OK
    bundle_r1 = sorted((store / "round_001").glob("bundle_client_*.json"))[0]
    token_r2 = store / "round_002" / "token.json"
    assert run(["prove", "--bundle", bundle_r1, "--token", token_r2]) == EXIT_REJECT


def test_prove_truncated_bundle_is_parse_error(tmp_path):
    store = setup_store(tmp_path)
    assert run(["generate", "--store", store, "--round", 1]) == EXIT_OK
    round_dir = store / "round_001"
    bundle = sorted(round_dir.glob("bundle_client_*.json"))[0]
    broken = tmp_path / "broken.json"
    broken.write_text(bundle.read_text()[:40])
    assert run(["prove", "--bundle", broken, "--token", round_dir / "token.json"]) == EXIT_PARSE


def test_store_roundtrip_preserves_material(tmp_path):
    store = setup_store(tmp_path, n=4, ndrop=1)
    clients, server, config = load_store(store)
    assert server.threshold == 3
    assert sorted(clients) == [1, 2, 3, 4]
    assert clients[1].signer.group_key == server.group_key
    assert clients[2].sa.neighbor_publics[1] == clients[1].sa.dh_public
    assert clients[2].sa.held_b_shares[1].index == 2


def test_bench_single_cell_grid(tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"n": [4], "rates": [0.25], "reps": 2, "dim": 4}))
    out = tmp_path / "bench.csv"
    assert run(["bench", "--grid-file", grid, "--csv", out]) == EXIT_OK
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == [
        "n", "ndrop", "t", "sa_train_s", "ts_sign_s", "sa_agg_s", "ts_agg_s",
        "prove_client_s", "prove_sp_s", "bytes_sp_to_client", "bytes_client_to_sp",
    ]
    assert len(rows) == 2
    assert rows[1][:3] == ["4", "1", "3"]
    assert int(rows[1][9]) <= 400
    assert int(rows[1][10]) <= 1300


def test_bench_byte_columns_stable_across_reps(tmp_path):
    from fedpop.bench import run_scenario

    record = run_scenario(4, 0.25, reps=3, dimension=4, seed=42)
    assert len(set(record.rep_samples["bytes_sp_to_client"])) == 1
    assert len(set(record.rep_samples["bytes_client_to_sp"])) == 1
    assert not record.failures
