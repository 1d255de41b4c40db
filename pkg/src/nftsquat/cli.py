"""Command-line pipeline: deterministic, file-based stage orchestration.

Every stage reads and writes only its declared files under the output
directory, so any stage can be re-run in isolation and re-runs are
byte-identical.  Progress goes to stderr; machine-readable records go to
files only.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import analytics, chain, cluster, fpfilter, matcher, squatgen
from .config import ENV_CONFIG, PipelineConfig, load_config
from .errors import DataIntegrityError, ValidationError
from .imagefiles import hash_image_tree, load_hash_cache
from .jsonl import iter_json_lines, read_address_lines, read_records, write_json, write_records
from .records import (
    NULL_ADDRESS,
    WEI_PER_ETH,
    CandidateCollection,
    CollectionMetadata,
    ExternalLabel,
    MatchResult,
    PlainTransaction,
    RawLogRecord,
    SeedCollection,
    SquatKeyword,
    TradeRecord,
    TransferEvent,
    TransferKind,
    dedupe_seeds,
)
from .wordlists import load_word_lists

log = logging.getLogger("nftsquat")

CORPUS_FILE = "corpus.jsonl"
MATCHES_FILE = "matches.jsonl"
TRANSFERS_FILE = "transfers.jsonl"
TRADES_FILE = "trades.jsonl"
HASHES_FILE = "hashes.jsonl"
THEFT_FILE = "theft.jsonl"
VERDICTS_FILE = "verdicts.jsonl"
CAMPAIGNS_FILE = "campaigns.jsonl"
CLUSTER_SUMMARY_FILE = "cluster_summary.json"
PROFITS_FILE = "profits.jsonl"
VICTIMS_FILE = "victims.jsonl"
STATS_FILE = "stats.jsonl"
REPORT_FILE = "report.json"


def _load_seeds(config: PipelineConfig) -> list[SeedCollection]:
    seeds = read_records(config.require("seeds"), SeedCollection.from_json_dict)
    return dedupe_seeds(seeds)


def _load_lists(config: PipelineConfig):
    return load_word_lists(
        english=config.english_words,
        crypto=config.crypto_words,
        homoglyphs=config.homoglyphs,
        homophones=config.homophones,
        combinations=config.combination_words,
    )


def _read_out(config: PipelineConfig, name: str, parser):
    path = config.out_path(name)
    if not path.exists():
        raise ValidationError(f"missing intermediate file {path}; run the producing stage first")
    return read_records(path, parser)


def stage_gen_corpus(config: PipelineConfig) -> None:
    seeds = _load_seeds(config)
    lists = _load_lists(config)
    corpus = squatgen.generate_corpus(seeds, lists, adjacent_key=config.adjacent_key)
    n = write_records(config.out_path(CORPUS_FILE), (kw.to_json_dict() for kw in corpus))
    log.info("gen-corpus: %d seeds -> %d keywords", len(seeds), n)


def stage_match(config: PipelineConfig) -> None:
    seeds = _load_seeds(config)
    lists = _load_lists(config)
    candidates = read_records(config.require("candidates"), CandidateCollection.from_json_dict)
    corpus = _read_out(config, CORPUS_FILE, SquatKeyword.from_json_dict)
    results = matcher.match_all(candidates, corpus, seeds, lists)
    rank_of = {s.name: s.rank for s in seeds}
    results.sort(key=lambda r: (r.candidate.contract_address, rank_of.get(r.seed_name, 1 << 30), r.seed_name))
    n = write_records(config.out_path(MATCHES_FILE), (r.to_json_dict() for r in results))
    log.info("match: %d candidates -> %d matches", len(candidates), n)


def stage_ingest_events(config: PipelineConfig) -> None:
    logs = read_records(config.require("logs"), RawLogRecord.from_json_dict)
    stats = chain.DecodeStats()
    events = list(chain.decode_transfers(logs, stats))
    events.sort(key=lambda e: (e.block, e.log_index, e.batch_index))
    write_records(config.out_path(TRANSFERS_FILE), (e.to_json_dict() for e in events))
    log.info("ingest-events: decoded %d, skipped %s", stats.decoded, stats.skipped or 0)


def stage_ingest_trades(config: PipelineConfig) -> None:
    logs = read_records(config.require("logs"), RawLogRecord.from_json_dict)
    market_map = chain.load_market_map(config.require("market_map"))
    stats = chain.DecodeStats()
    trades = list(chain.decode_trades(logs, market_map, stats))
    trades.sort(key=lambda t: (t.block, t.log_index))
    write_records(config.out_path(TRADES_FILE), (t.to_json_dict() for t in trades))
    log.info("ingest-trades: decoded %d, skipped %s", stats.decoded, stats.skipped or 0)


def stage_hash_images(config: PipelineConfig) -> None:
    rows = hash_image_tree(config.require("images_dir"), threads=config.threads)
    write_records(config.out_path(HASHES_FILE), rows)
    log.info("hash-images: hashed %d images", len(rows))


def _resolve_hashes(config: PipelineConfig) -> dict[str, dict[int, int]]:
    computed = config.out_path(HASHES_FILE)
    if computed.exists():
        return load_hash_cache(computed)
    if config.hash_cache:
        return load_hash_cache(config.hash_cache)
    return {}


def _placeholder_metadata(contract: str, name: str) -> CollectionMetadata:
    return CollectionMetadata(contract=contract, name=name, creator=NULL_ADDRESS, royalty_bps=0)


def _primary_matches(config: PipelineConfig, seeds: list[SeedCollection]) -> list[MatchResult]:
    results = _read_out(config, MATCHES_FILE, MatchResult.from_json_dict)
    return matcher.primary_matches(results, seeds)


def stage_theft_scan(config: PipelineConfig) -> None:
    seeds = _load_seeds(config)
    seed_by_name = {s.name: s for s in seeds}
    metadata = chain.load_metadata(config.require("metadata"))
    hashes = _resolve_hashes(config)
    reports = []
    for match in _primary_matches(config, seeds):
        seed = seed_by_name.get(match.seed_name)
        if seed is None:
            continue
        squat_meta = metadata.get(match.candidate.contract_address) or _placeholder_metadata(
            match.candidate.contract_address, match.candidate.name
        )
        official_meta = metadata.get(seed.contract_address) or _placeholder_metadata(
            seed.contract_address, seed.name
        )
        reports.append(
            analytics.theft_scan(
                official_meta,
                squat_meta,
                hashes,
                threshold=config.thresholds.dhash_threshold,
                inclusive=config.dhash_inclusive,
            )
        )
    reports.sort(key=lambda r: (r.squat_contract, r.official_contract))
    write_records(config.out_path(THEFT_FILE), (r.to_json_dict() for r in reports))
    log.info("theft-scan: %d squat/target pairs scanned", len(reports))


def _load_social(config: PipelineConfig) -> dict[str, tuple[int, ...]]:
    if not config.social:
        return {}
    out: dict[str, tuple[int, ...]] = {}
    for lineno, obj in iter_json_lines(config.social):
        try:
            contract = obj["contract"].lower()
            stamps = tuple(sorted(int(t) for t in obj.get("post_timestamps", [])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{config.social}:{lineno}: bad social record: {exc}") from None
        out[contract] = stamps
    return out


def _load_labels(config: PipelineConfig) -> dict[str, list[ExternalLabel]]:
    out: dict[str, list[ExternalLabel]] = {}
    if not config.labels:
        return out
    for lineno, obj in iter_json_lines(config.labels):
        try:
            contract = obj["contract"].lower()
            label = ExternalLabel.from_json_dict(obj)
        except (KeyError, ValueError, ValidationError) as exc:
            raise ValidationError(f"{config.labels}:{lineno}: bad label record: {exc}") from None
        out.setdefault(contract, []).append(label)
    return out


def stage_filter(config: PipelineConfig) -> None:
    seeds = _load_seeds(config)
    seed_by_name = {s.name: s for s in seeds}
    metadata = chain.load_metadata(config.require("metadata"))
    transfers = _read_out(config, TRANSFERS_FILE, TransferEvent.from_json_dict)
    trades = _read_out(config, TRADES_FILE, TradeRecord.from_json_dict)
    social_posts = _load_social(config)
    extra_labels = _load_labels(config)
    whitelist = read_address_lines(config.whitelist) if config.whitelist else set()

    image_hits: dict[str, bool] = {}
    theft_path = config.out_path(THEFT_FILE)
    if theft_path.exists():
        for _, row in iter_json_lines(theft_path):
            hit = bool(row.get("image_exact_pairs") or row.get("image_similar_pairs"))
            contract = row["squat_contract"]
            image_hits[contract] = image_hits.get(contract, False) or hit

    verdicts = []
    for match in _primary_matches(config, seeds):
        contract = match.candidate.contract_address
        seed = seed_by_name.get(match.seed_name)
        meta_candidate = metadata.get(contract)
        meta_official = None
        if seed is not None:
            meta_official = metadata.get(seed.contract_address) or _placeholder_metadata(
                seed.contract_address, seed.name
            )
            if meta_official.deploy_block is None:
                meta_official = replace(meta_official, deploy_block=seed.deploy_block)
        exclusion = fpfilter.prefilter(match, meta_official, meta_candidate, whitelist)
        if exclusion is not None:
            verdicts.append(fpfilter.excluded_verdict(contract, exclusion))
            continue
        labels = list(meta_candidate.external_labels) if meta_candidate else []
        labels.extend(extra_labels.get(contract, []))
        social = fpfilter.SocialActivity(
            contract=contract,
            post_timestamps=social_posts.get(contract, ()),
            last_onchain_activity=fpfilter.last_onchain_activity(contract, transfers, trades),
        )
        verdicts.append(
            fpfilter.evaluate(
                contract,
                fpfilter.daily_floor_series(contract, trades),
                fpfilter.monthly_transfer_series(contract, transfers),
                social,
                labels,
                image_hits.get(contract, False),
                config.thresholds,
            )
        )
    verdicts.sort(key=lambda v: v.contract)
    write_records(config.out_path(VERDICTS_FILE), (v.to_json_dict() for v in verdicts))
    suspicious = sum(1 for v in verdicts if v.suspicious)
    log.info("filter: %d verdicts, %d suspicious", len(verdicts), suspicious)


def stage_cluster(config: PipelineConfig) -> None:
    verdicts = _read_out(config, VERDICTS_FILE, fpfilter.SuspicionVerdict.from_json_dict)
    suspicious = sorted(v.contract for v in verdicts if v.suspicious)
    suspicious_set = set(suspicious)
    candidates = read_records(config.require("candidates"), CandidateCollection.from_json_dict)
    creators_of = {c.contract_address: c.creator for c in candidates if c.contract_address in suspicious_set}
    metadata = chain.load_metadata(config.require("metadata"))
    for contract in suspicious:
        if contract not in creators_of and contract in metadata:
            creators_of[contract] = metadata[contract].creator

    official_links = {
        meta.external_link
        for meta in metadata.values()
        if meta.official_flag and meta.external_link
    }

    graph = cluster.ClusterGraph(nodes=suspicious)
    graph.apply(cluster.link_phase([(c, metadata.get(c)) for c in suspicious], official_links))
    graph.apply(cluster.creator_phase(sorted(creators_of.items())))

    if config.transactions and config.exchanges:
        txs = read_records(config.transactions, PlainTransaction.from_json_dict)
        txs.sort(key=lambda t: (t.block, t.tx_hash))
        exchanges = read_address_lines(config.exchanges)
        deposits = cluster.detect_deposits(txs, exchanges, config.max_diff_wei, config.max_blocks)
        expanded = cluster.expand_addresses(set(creators_of.values()), txs)
        graph.apply(cluster.deposit_phase(creators_of, deposits, expanded))
    else:
        log.info("cluster: transactions/exchanges not configured; deposit phase skipped")

    campaigns, summary = cluster.finalize(graph, creators_of, metadata, official_links)
    write_records(config.out_path(CAMPAIGNS_FILE), (c.to_json_dict() for c in campaigns))
    write_json(config.out_path(CLUSTER_SUMMARY_FILE), summary.to_json_dict())
    log.info("cluster: %d campaigns, %d singletons", summary.campaign_count, summary.singleton_count)


def _load_usd_rates(path: str) -> list[tuple[str, int]]:
    rates: list[tuple[str, int]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "date":
                continue
            if len(row) != 2:
                raise ValidationError(f"{path}: USD table rows must be date,wei_per_usd")
            rates.append((row[0], int(row[1])))
    rates.sort()
    if not rates:
        raise ValidationError(f"{path}: USD table is empty")
    return rates


def _usd_at(rates: list[tuple[str, int]], day: str, wei: int) -> float:
    chosen = None
    for rate_day, rate in rates:
        if rate_day <= day:
            chosen = rate
        else:
            break
    if chosen is None:
        raise ValidationError(f"USD table has no rate on or before {day}")
    return wei / chosen


def stage_report(config: PipelineConfig) -> None:
    seeds = _load_seeds(config)
    verdicts = _read_out(config, VERDICTS_FILE, fpfilter.SuspicionVerdict.from_json_dict)
    suspicious = sorted(v.contract for v in verdicts if v.suspicious)
    suspicious_set = set(suspicious)
    matches = _primary_matches(config, seeds)
    match_by_contract = {m.candidate.contract_address: m for m in matches}
    transfers = _read_out(config, TRANSFERS_FILE, TransferEvent.from_json_dict)
    trades = _read_out(config, TRADES_FILE, TradeRecord.from_json_dict)
    metadata = chain.load_metadata(config.require("metadata"))
    campaigns = _read_out(config, CAMPAIGNS_FILE, cluster.Campaign.from_json_dict)
    candidates = read_records(config.require("candidates"), CandidateCollection.from_json_dict)
    creator_of = {c.contract_address: c.creator for c in candidates}

    scammers_of: dict[str, set[str]] = {}
    for contract in suspicious:
        scammers_of[contract] = {creator_of[contract]} if contract in creator_of else set()
    for campaign in campaigns:
        for member in campaign.members:
            scammers_of.setdefault(member, set()).update(campaign.creators)

    sus_transfers = [e for e in transfers if e.contract in suspicious_set]
    sus_trades = [t for t in trades if t.contract in suspicious_set]

    fees = analytics.mint_fees(sus_transfers)
    earnings = analytics.creator_earnings(sus_trades, metadata)
    profit_reports = [
        analytics.ProfitReport(
            contract=c, mint_fee_wei=fees.get(c, 0), creator_earnings_wei=earnings.get(c, 0)
        )
        for c in suspicious
    ]
    victim_reports = analytics.victims(sus_transfers, sus_trades, scammers_of)
    victim_rows = [
        victim_reports.get(
            c, analytics.VictimReport(contract=c, minter_victims=frozenset(), buyer_victims=frozenset())
        )
        for c in suspicious
    ]
    stats_by_contract = analytics.stats(sus_transfers, sus_trades, {c: m for c, m in metadata.items() if c in suspicious_set})
    stats_rows = [stats_by_contract[c] for c in sorted(stats_by_contract)]

    write_records(config.out_path(PROFITS_FILE), (r.to_json_dict() for r in profit_reports))
    write_records(config.out_path(VICTIMS_FILE), (r.to_json_dict() for r in victim_rows))
    write_records(config.out_path(STATS_FILE), (r.to_json_dict() for r in stats_rows))

    def display_name(contract: str) -> str:
        if contract in metadata:
            return metadata[contract].name
        if contract in match_by_contract:
            return match_by_contract[contract].candidate.name
        return contract

    def target_of(contract: str) -> str:
        return match_by_contract[contract].seed_name if contract in match_by_contract else ""

    def top_table(rows: list[tuple[str, int]], n: int = 5) -> list[dict]:
        rows = sorted(rows, key=lambda r: (-r[1], r[0]))[:n]
        return [
            {
                "contract": contract,
                "name": display_name(contract),
                "target": target_of(contract),
                "amount_wei": str(amount),
                "amount_eth": amount / WEI_PER_ETH,
            }
            for contract, amount in rows
        ]

    tactic_counts: dict[str, int] = {}
    for m in matches:
        tactic_counts[m.tactic.value] = tactic_counts.get(m.tactic.value, 0) + 1
    prefiltered: dict[str, int] = {}
    for v in verdicts:
        if v.prefilter_exclusion is not None:
            key = v.prefilter_exclusion.value
            prefiltered[key] = prefiltered.get(key, 0) + 1

    all_victims: set[str] = set()
    for row in victim_rows:
        all_victims |= row.victims
    total_fees = sum(fees.get(c, 0) for c in suspicious)
    total_earnings = sum(earnings.get(c, 0) for c in suspicious)
    partition = analytics.channel_partition(profit_reports)

    theft_totals = {"uri_theft_pairs": 0, "image_exact_pairs": 0, "image_similar_pairs": 0, "uri_reuse_collections": 0}
    theft_path = config.out_path(THEFT_FILE)
    if theft_path.exists():
        for _, row in iter_json_lines(theft_path):
            theft_totals["uri_theft_pairs"] += len(row.get("uri_theft_pairs", []))
            theft_totals["image_exact_pairs"] += len(row.get("image_exact_pairs", []))
            theft_totals["image_similar_pairs"] += len(row.get("image_similar_pairs", []))
            theft_totals["uri_reuse_collections"] += 1 if row.get("uri_reuse") else 0

    cluster_summary = {}
    summary_path = config.out_path(CLUSTER_SUMMARY_FILE)
    if summary_path.exists():
        cluster_summary = json.loads(summary_path.read_text(encoding="utf-8"))

    report = {
        "matches": len(matches),
        "suspicious_collections": len(suspicious),
        "prefiltered": prefiltered,
        "tactic_counts": dict(sorted(tactic_counts.items())),
        "campaigns": cluster_summary,
        "victims": {
            "total_unique": len(all_victims),
            "top_by_victims": [
                {
                    "contract": row.contract,
                    "name": display_name(row.contract),
                    "target": target_of(row.contract),
                    "victims": row.victim_count,
                }
                for row in sorted(victim_rows, key=lambda r: (-r.victim_count, r.contract))[:5]
            ],
        },
        "profits": {
            "mint_fee_wei": str(total_fees),
            "creator_earnings_wei": str(total_earnings),
            "total_wei": str(total_fees + total_earnings),
            "total_eth": (total_fees + total_earnings) / WEI_PER_ETH,
            "profitable_collections": sum(1 for r in profit_reports if r.profitable),
            "channels": {name: len(members) for name, members in partition.items()},
            "top_by_mint_fees": top_table(sorted(fees.items())),
            "top_by_creator_earnings": top_table(sorted(earnings.items())),
        },
        "content_theft": theft_totals,
    }

    if config.usd_table:
        rates = _load_usd_rates(config.usd_table)
        usd_total = 0.0
        seen_fee_tx: set[tuple[str, str]] = set()
        for ev in sus_transfers:
            if ev.kind is TransferKind.MINT and (ev.contract, ev.tx_hash) not in seen_fee_tx:
                seen_fee_tx.add((ev.contract, ev.tx_hash))
                day = datetime.fromtimestamp(ev.timestamp, tz=timezone.utc).date().isoformat()
                usd_total += _usd_at(rates, day, ev.tx_value_wei)
        for trade in sus_trades:
            meta = metadata.get(trade.contract)
            bps = meta.royalty_bps if meta else 0
            day = datetime.fromtimestamp(trade.timestamp, tz=timezone.utc).date().isoformat()
            usd_total += _usd_at(rates, day, (trade.price_wei * bps) // analytics.ROYALTY_DENOMINATOR)
        report["profits"]["total_usd"] = round(usd_total, 2)

    write_json(config.out_path(REPORT_FILE), report)
    log.info(
        "report: %d suspicious collections, %d victims, %.4f ETH total profit",
        len(suspicious),
        len(all_victims),
        (total_fees + total_earnings) / WEI_PER_ETH,
    )


def stage_pipeline(config: PipelineConfig) -> None:
    stage_gen_corpus(config)
    stage_match(config)
    stage_ingest_events(config)
    stage_ingest_trades(config)
    if config.images_dir:
        stage_hash_images(config)
    stage_theft_scan(config)
    stage_filter(config)
    stage_cluster(config)
    stage_report(config)


STAGES = {
    "gen-corpus": stage_gen_corpus,
    "match": stage_match,
    "ingest-events": stage_ingest_events,
    "ingest-trades": stage_ingest_trades,
    "hash-images": stage_hash_images,
    "theft-scan": stage_theft_scan,
    "filter": stage_filter,
    "cluster": stage_cluster,
    "report": stage_report,
    "pipeline": stage_pipeline,
}


def run(subcommand: str, config: PipelineConfig) -> int:
    """Execute one stage; returns the process exit status."""
    try:
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)
        STAGES[subcommand](config)
    except ValidationError as exc:
        log.error("%s", exc)
        return 1
    except DataIntegrityError as exc:
        log.error("%s", exc)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nftsquat",
        description="Detect cybersquatting NFT collections from snapshot on-chain data.",
    )
    parser.add_argument(
        "-c",
        "--config",
        default=None,
        help=f"JSON config file (default: ${ENV_CONFIG})",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    path_flags = [
        ("seeds", "seed collection list (JSONL)"),
        ("candidates", "candidate collection list (JSONL)"),
        ("logs", "raw event logs (JSONL, optionally .gz)"),
        ("transactions", "plain transactions (JSONL)"),
        ("metadata", "collection metadata (JSONL)"),
        ("market-map", "marketplace event layout config (JSON)"),
        ("english-words", "common English word list"),
        ("crypto-words", "crypto word list"),
        ("homoglyphs", "homoglyph table"),
        ("homophones", "homophone groups"),
        ("combination-words", "combination keyword list"),
        ("exchanges", "exchange address list"),
        ("whitelist", "derivative whitelist (one contract per line)"),
        ("labels", "external labels (JSONL)"),
        ("social", "social post snapshots (JSONL)"),
        ("hash-cache", "precomputed image hashes (JSONL)"),
        ("images-dir", "token image tree <contract>/<token_id>.png"),
        ("usd-table", "CSV of date,wei_per_usd for USD conversion"),
    ]
    for name in STAGES:
        p = sub.add_parser(name, help=f"run the {name} stage")
        for flag, help_text in path_flags:
            p.add_argument(f"--{flag}", default=None, help=help_text)
        p.add_argument("--output-dir", default=None, help="directory for stage outputs")
        p.add_argument("--price-drop-fraction", type=float, default=None, help="floor collapse fraction (default 0.9)")
        p.add_argument("--price-unrecovered-days", type=int, default=None, help="collapse recovery window in days (default 30)")
        p.add_argument("--transfer-drop-fraction", type=float, default=None, help="transfer collapse fraction (default 0.9)")
        p.add_argument("--transfer-low-months", type=int, default=None, help="consecutive low months required (default 2)")
        p.add_argument("--social-silence-days", type=int, default=None, help="social silence window in days (default 30)")
        p.add_argument("--dhash-threshold", type=int, default=None, help="image similarity distance bound (default 5)")
        p.add_argument("--dhash-inclusive", action="store_true", default=None, help="treat the distance bound as inclusive")
        p.add_argument("--max-diff-wei", type=int, default=None, help="deposit amount difference bound in wei (default 10^16)")
        p.add_argument("--max-blocks", type=int, default=None, help="deposit forwarding block gap bound (default 10000)")
        p.add_argument("--adjacent-key", action="store_true", default=None, help="also generate QWERTY adjacent-key variants")
        p.add_argument("--threads", type=int, default=None, help="worker cap for parallel stages (default 1)")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    args = vars(build_parser().parse_args(argv))
    subcommand = args.pop("subcommand")
    config_path = args.pop("config")
    try:
        config = load_config(config_path, overrides=args)
    except ValidationError as exc:
        log.error("%s", exc)
        return 1
    return run(subcommand, config)


if __name__ == "__main__":
    sys.exit(main())
