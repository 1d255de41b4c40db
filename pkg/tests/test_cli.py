import json
from pathlib import Path

import pytest

from nftsquat.cli import main

DEMO = Path(__file__).resolve().parent.parent / "demo"
DEMO_CONFIG = str(DEMO / "config.json")


def run_cli(*args):
    return main([str(a) for a in args])


def read_lines(path):
    return Path(path).read_text().splitlines()


@pytest.fixture(scope="module")
def demo_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo_out")
    assert run_cli("-c", DEMO_CONFIG, "pipeline", "--output-dir", out) == 0
    return out


def test_pipeline_produces_all_outputs(demo_out):
    expected = [
        "corpus.jsonl",
        "matches.jsonl",
        "transfers.jsonl",
        "trades.jsonl",
        "hashes.jsonl",
        "theft.jsonl",
        "verdicts.jsonl",
        "campaigns.jsonl",
        "cluster_summary.json",
        "profits.jsonl",
        "victims.jsonl",
        "stats.jsonl",
        "report.json",
    ]
    for name in expected:
        assert (demo_out / name).exists(), name


def test_pipeline_report_names_campaigns(demo_out):
    report = json.loads((demo_out / "report.json").read_text())
    assert report["campaigns"]["campaign_count"] >= 1
    assert report["suspicious_collections"] > 0


def test_pipeline_idempotent_byte_identical(demo_out, tmp_path):
    second = tmp_path / "again"
    assert run_cli("-c", DEMO_CONFIG, "pipeline", "--output-dir", second) == 0
    for path in sorted(demo_out.iterdir()):
        assert (second / path.name).read_bytes() == path.read_bytes(), path.name


def test_stage_isolation_reproduces_deleted_output(demo_out, tmp_path):
    out = tmp_path / "iso"
    assert run_cli("-c", DEMO_CONFIG, "pipeline", "--output-dir", out) == 0
    reference = (out / "campaigns.jsonl").read_bytes()
    (out / "campaigns.jsonl").unlink()
    (out / "cluster_summary.json").unlink()
    assert run_cli("-c", DEMO_CONFIG, "cluster", "--output-dir", out) == 0
    assert (out / "campaigns.jsonl").read_bytes() == reference


def test_match_with_empty_corpus_exits_zero(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    (out / "corpus.jsonl").write_text("")
    assert run_cli("-c", DEMO_CONFIG, "match", "--output-dir", out) == 0
    assert read_lines(out / "matches.jsonl") == []


def test_missing_seeds_file_exits_one(capsys, caplog):
    assert run_cli("gen-corpus", "--seeds", "/nonexistent/seeds.jsonl") == 1
    assert any("/nonexistent/seeds.jsonl" in rec.message for rec in caplog.records)


def test_missing_required_config_key_exits_one(tmp_path):
    assert run_cli("gen-corpus", "--output-dir", tmp_path) == 1


def test_malformed_record_exits_one(tmp_path, caplog):
    seeds = tmp_path / "seeds.jsonl"
    seeds.write_text('{"rank": 1, "name": "X"}\n')
    assert run_cli("gen-corpus", "--seeds", seeds, "--output-dir", tmp_path / "out") == 1
    assert any("seeds.jsonl:1" in rec.message for rec in caplog.records)


def test_decode_error_exits_two(tmp_path, caplog):
    from nftsquat.chain import TRANSFER_BATCH_TOPIC

    logs = tmp_path / "logs.jsonl"
    row = {
        "tx_hash": "0x" + "ab" * 32,
        "log_index": 0,
        "contract": "0x" + "11" * 20,
        "topics": [TRANSFER_BATCH_TOPIC, "0x" + "00" * 32, "0x" + "00" * 32, "0x" + "00" * 32],
        "data": "0x" + format(0x40, "064x"),
        "block": 1,
        "timestamp": 1,
        "tx_value_wei": "0",
    }
    logs.write_text(json.dumps(row) + "\n")
    assert run_cli("ingest-events", "--logs", logs, "--output-dir", tmp_path / "out") == 2


def test_env_var_names_default_config(tmp_path, monkeypatch):
    from nftsquat.config import ENV_CONFIG

    monkeypatch.setenv(ENV_CONFIG, DEMO_CONFIG)
    out = tmp_path / "out"
    assert run_cli("gen-corpus", "--output-dir", out) == 0
    assert (out / "corpus.jsonl").exists()


def test_threshold_flag_overrides_config(tmp_path):
    # inclusive threshold admits the distance-3 pairs; threshold 3 strict drops them
    out = tmp_path / "out"
    assert run_cli("-c", DEMO_CONFIG, "pipeline", "--output-dir", out, "--dhash-threshold", "3") == 0
    theft = [json.loads(line) for line in read_lines(out / "theft.jsonl")]
    similar = sum(len(r["image_similar_pairs"]) for r in theft)
    assert similar == 1  # only the distance-2 pair survives a strict bound of 3


def test_unknown_config_key_rejected(tmp_path):
    config = tmp_path / "config.json"
    config.write_text('{"seedz": "typo.jsonl"}')
    assert run_cli("-c", config, "gen-corpus") == 1


def test_prefiltered_candidates_never_reach_criteria(demo_out):
    verdicts = [json.loads(line) for line in read_lines(demo_out / "verdicts.jsonl")]
    excluded = [v for v in verdicts if "prefilter_exclusion" in v]
    assert {v["prefilter_exclusion"] for v in excluded} == {"DerivativeWhitelist", "DeployedBeforeOfficial"}
    for verdict in excluded:
        assert not verdict["suspicious"]
        assert not any(verdict["criteria"].values())


def test_campaigns_exclude_prefiltered_contracts(demo_out):
    verdicts = [json.loads(line) for line in read_lines(demo_out / "verdicts.jsonl")]
    excluded = {v["contract"] for v in verdicts if "prefilter_exclusion" in v}
    for line in read_lines(demo_out / "campaigns.jsonl"):
        campaign = json.loads(line)
        assert not excluded & set(campaign["members"])


def test_gzip_logs_accepted(tmp_path):
    import gzip

    raw = (DEMO / "logs.jsonl").read_bytes()
    gz_logs = tmp_path / "logs.jsonl.gz"
    gz_logs.write_bytes(gzip.compress(raw))
    out = tmp_path / "out"
    assert run_cli("-c", DEMO_CONFIG, "ingest-events", "--logs", gz_logs, "--output-dir", out) == 0
    reference = tmp_path / "ref"
    assert run_cli("-c", DEMO_CONFIG, "ingest-events", "--output-dir", reference) == 0
    assert (out / "transfers.jsonl").read_bytes() == (reference / "transfers.jsonl").read_bytes()


def test_usd_conversion_applied_when_table_given(tmp_path):
    table = tmp_path / "usd.csv"
    # 1 USD = 10^15 wei, i.e. 1 ETH = 1000 USD, from before the demo window
    table.write_text("date,wei_per_usd\n2022-01-01,1000000000000000\n")
    out = tmp_path / "out"
    assert run_cli("-c", DEMO_CONFIG, "pipeline", "--output-dir", out, "--usd-table", table) == 0
    report = json.loads((out / "report.json").read_text())
    # 5.02625 ETH at 1000 USD/ETH
    assert report["profits"]["total_usd"] == 5026.25


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for name in ["gen-corpus", "match", "filter", "cluster", "report", "pipeline"]:
        assert name in out
