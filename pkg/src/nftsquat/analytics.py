"""Per-collection measures: profits, victims, supply, activity, theft.

All money stays in integral wei; royalty shares round down per trade so
totals never overstate what a scammer collected.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DataIntegrityError
from .imagehash import NearDuplicates, near_duplicates
from .records import (
    CollectionMetadata,
    TradeRecord,
    TransferEvent,
    TransferKind,
)

log = logging.getLogger(__name__)

ROYALTY_DENOMINATOR = 10_000


@dataclass(frozen=True)
class ProfitReport:
    contract: str
    mint_fee_wei: int
    creator_earnings_wei: int

    @property
    def total_wei(self) -> int:
        return self.mint_fee_wei + self.creator_earnings_wei

    @property
    def profitable(self) -> bool:
        return self.total_wei > 0

    @property
    def profit_channels(self) -> tuple[str, ...]:
        channels = []
        if self.mint_fee_wei > 0:
            channels.append("MintFees")
        if self.creator_earnings_wei > 0:
            channels.append("CreatorEarnings")
        return tuple(channels)

    def to_json_dict(self) -> dict:
        return {
            "contract": self.contract,
            "mint_fee_wei": str(self.mint_fee_wei),
            "creator_earnings_wei": str(self.creator_earnings_wei),
            "total_wei": str(self.total_wei),
            "profitable": self.profitable,
            "profit_channels": list(self.profit_channels),
        }


@dataclass(frozen=True)
class VictimReport:
    contract: str
    minter_victims: frozenset[str]
    buyer_victims: frozenset[str]

    @property
    def victims(self) -> frozenset[str]:
        return self.minter_victims | self.buyer_victims

    @property
    def victim_count(self) -> int:
        return len(self.victims)

    def to_json_dict(self) -> dict:
        return {
            "contract": self.contract,
            "minter_victims": sorted(self.minter_victims),
            "buyer_victims": sorted(self.buyer_victims),
            "victim_count": self.victim_count,
        }


@dataclass(frozen=True)
class CollectionStats:
    contract: str
    total_supply: int
    trade_count: int
    active_seconds: int
    distinct_uri_count: int
    token_count: int

    def to_json_dict(self) -> dict:
        return {
            "contract": self.contract,
            "total_supply": self.total_supply,
            "trade_count": self.trade_count,
            "active_seconds": self.active_seconds,
            "distinct_uri_count": self.distinct_uri_count,
            "token_count": self.token_count,
        }


@dataclass(frozen=True)
class TheftReport:
    official_contract: str
    squat_contract: str
    uri_theft_pairs: tuple[tuple[str, str], ...]
    image_exact_pairs: tuple[tuple[int, int], ...]
    image_similar_pairs: tuple[tuple[int, int], ...]
    uri_reuse: bool

    @property
    def image_hits(self) -> bool:
        return bool(self.image_exact_pairs or self.image_similar_pairs)

    def to_json_dict(self) -> dict:
        return {
            "official_contract": self.official_contract,
            "squat_contract": self.squat_contract,
            "uri_theft_pairs": [list(p) for p in self.uri_theft_pairs],
            "image_exact_pairs": [list(p) for p in self.image_exact_pairs],
            "image_similar_pairs": [list(p) for p in self.image_similar_pairs],
            "uri_reuse": self.uri_reuse,
        }


def mint_fees(transfers: Iterable[TransferEvent]) -> dict[str, int]:
    """Sum the ETH sent with minting transactions, per contract.

    A transaction minting several tokens is counted once (it carries one
    value), so batch mints do not double-count.
    """
    seen: set[tuple[str, str]] = set()
    totals: dict[str, int] = {}
    for ev in transfers:
        if ev.kind is not TransferKind.MINT:
            continue
        key = (ev.contract, ev.tx_hash)
        if key in seen:
            continue
        seen.add(key)
        totals[ev.contract] = totals.get(ev.contract, 0) + ev.tx_value_wei
    return totals


def creator_earnings(
    trades: Iterable[TradeRecord],
    meta: Mapping[str, CollectionMetadata],
) -> dict[str, int]:
    """Royalty share of every secondary sale, floor-divided per trade.

    Collections without metadata earn at royalty 0, with a warning.
    """
    totals: dict[str, int] = {}
    missing: set[str] = set()
    for trade in trades:
        m = meta.get(trade.contract)
        if m is None:
            if trade.contract not in missing:
                missing.add(trade.contract)
                log.warning("no metadata for %s; royalty treated as 0", trade.contract)
            bps = 0
        else:
            bps = m.royalty_bps
        totals[trade.contract] = totals.get(trade.contract, 0) + (trade.price_wei * bps) // ROYALTY_DENOMINATOR
    return totals


def victims(
    transfers: Iterable[TransferEvent],
    trades: Iterable[TradeRecord],
    scammers_of: Mapping[str, set[str]],
) -> dict[str, VictimReport]:
    """Paying minters plus secondary-market buyers, minus known scammers.

    scammers_of maps a contract to the addresses of its campaign's
    creators; those addresses never count as victims (wash trades).
    """
    minters: dict[str, set[str]] = {}
    buyers: dict[str, set[str]] = {}
    for ev in transfers:
        if ev.kind is TransferKind.MINT and ev.tx_value_wei > 0:
            minters.setdefault(ev.contract, set()).add(ev.to_addr)
    for trade in trades:
        buyers.setdefault(trade.contract, set()).add(trade.buyer)

    out: dict[str, VictimReport] = {}
    for contract in sorted(set(minters) | set(buyers)):
        scammers = scammers_of.get(contract, set())
        out[contract] = VictimReport(
            contract=contract,
            minter_victims=frozenset(minters.get(contract, set()) - scammers),
            buyer_victims=frozenset(buyers.get(contract, set()) - scammers),
        )
    return out


def stats(
    transfers: Iterable[TransferEvent],
    trades: Iterable[TradeRecord],
    meta: Mapping[str, CollectionMetadata],
) -> dict[str, CollectionStats]:
    """Supply, trading activity and URI counts per contract."""
    minted: dict[str, int] = {}
    burned: dict[str, int] = {}
    for ev in transfers:
        if ev.kind is TransferKind.MINT:
            minted[ev.contract] = minted.get(ev.contract, 0) + ev.amount
        elif ev.kind is TransferKind.BURN:
            burned[ev.contract] = burned.get(ev.contract, 0) + ev.amount

    first_trade: dict[str, int] = {}
    last_trade: dict[str, int] = {}
    trade_counts: dict[str, int] = {}
    for trade in trades:
        c = trade.contract
        trade_counts[c] = trade_counts.get(c, 0) + 1
        if c not in first_trade or trade.timestamp < first_trade[c]:
            first_trade[c] = trade.timestamp
        if c not in last_trade or trade.timestamp > last_trade[c]:
            last_trade[c] = trade.timestamp

    contracts = sorted(set(minted) | set(burned) | set(trade_counts) | set(meta))
    out: dict[str, CollectionStats] = {}
    for contract in contracts:
        supply = minted.get(contract, 0) - burned.get(contract, 0)
        if supply < 0:
            raise DataIntegrityError(f"contract {contract}: burns exceed mints (supply {supply})")
        count = trade_counts.get(contract, 0)
        active = last_trade[contract] - first_trade[contract] if count > 1 else 0
        uris = meta[contract].token_uris if contract in meta else {}
        out[contract] = CollectionStats(
            contract=contract,
            total_supply=supply,
            trade_count=count,
            active_seconds=active,
            distinct_uri_count=len(set(uris.values())),
            token_count=len(uris),
        )
    return out


def theft_scan(
    official_meta: CollectionMetadata,
    squat_meta: CollectionMetadata,
    hashes: Mapping[str, Mapping[int, int]],
    threshold: int = 5,
    inclusive: bool = False,
) -> TheftReport:
    """Content-theft comparison of one squat collection against its target:
    byte-equal URIs, image-hash duplication, and within-squat URI reuse."""
    uri_pairs: list[tuple[str, str]] = []
    squat_by_uri: dict[str, list[str]] = {}
    for token, uri in squat_meta.token_uris.items():
        squat_by_uri.setdefault(uri, []).append(token)
    for token_o in sorted(official_meta.token_uris):
        uri = official_meta.token_uris[token_o]
        for token_s in sorted(squat_by_uri.get(uri, [])):
            uri_pairs.append((token_o, token_s))

    dupes: NearDuplicates = near_duplicates(
        dict(hashes.get(official_meta.contract, {})),
        dict(hashes.get(squat_meta.contract, {})),
        threshold=threshold,
        inclusive=inclusive,
    )
    distinct = len(set(squat_meta.token_uris.values()))
    return TheftReport(
        official_contract=official_meta.contract,
        squat_contract=squat_meta.contract,
        uri_theft_pairs=tuple(uri_pairs),
        image_exact_pairs=dupes.exact,
        image_similar_pairs=dupes.similar,
        uri_reuse=distinct < len(squat_meta.token_uris),
    )


def channel_partition(reports: Iterable[ProfitReport]) -> dict[str, list[str]]:
    """Split contracts into mint-only / earnings-only / both / neither."""
    partition: dict[str, list[str]] = {"mint_only": [], "earnings_only": [], "both": [], "neither": []}
    for report in reports:
        channels = report.profit_channels
        if channels == ("MintFees",):
            partition["mint_only"].append(report.contract)
        elif channels == ("CreatorEarnings",):
            partition["earnings_only"].append(report.contract)
        elif channels:
            partition["both"].append(report.contract)
        else:
            partition["neither"].append(report.contract)
    for members in partition.values():
        members.sort()
    return partition
