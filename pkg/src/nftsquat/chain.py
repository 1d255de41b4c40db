"""Decoding snapshot event logs and transactions into typed records.

The transfer decoder understands the three standard token-transfer events;
trade decoding is driven by a declarative marketplace config so new event
layouts never require code changes.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DecodeError, ValidationError
from .jsonl import iter_json_lines
from .records import (
    DEAD_ADDRESSES,
    MARKETPLACES,
    NULL_ADDRESSES,
    CollectionMetadata,
    RawLogRecord,
    Standard,
    TradeRecord,
    TransferEvent,
    TransferKind,
    validate_address,
)

log = logging.getLogger(__name__)

# keccak-256 event signatures: Transfer(address,address,uint256),
# TransferSingle(address,address,address,uint256,uint256),
# TransferBatch(address,address,address,uint256[],uint256[])
TRANSFER_721_TOPIC = "0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef"
TRANSFER_SINGLE_TOPIC = "0xc3d58168c5ae7397731d063d5bbf3d657854427343f4c083240f7aacaa2d0f62"
TRANSFER_BATCH_TOPIC = "0x4a39dc06d4c0dbc64b70af90fd698a233a518aa5d07e595d983b8c0526c8f7fb"


@dataclass
class DecodeStats:
    decoded: int = 0
    skipped: dict[str, int] = field(default_factory=dict)

    def skip(self, reason: str) -> None:
        self.skipped[reason] = self.skipped.get(reason, 0) + 1

    @property
    def skipped_total(self) -> int:
        return sum(self.skipped.values())


def _topic_address(topic: str) -> str:
    return "0x" + topic[-40:]


def _data_words(record: RawLogRecord) -> list[int]:
    body = record.data[2:]
    return [int(body[i : i + 64], 16) for i in range(0, len(body), 64)]


def _classify_kind(from_addr: str, to_addr: str) -> TransferKind:
    if from_addr in NULL_ADDRESSES:
        return TransferKind.MINT
    if to_addr in DEAD_ADDRESSES:
        return TransferKind.BURN
    return TransferKind.SWAP


def _decode_batch_arrays(record: RawLogRecord) -> tuple[list[int], list[int]]:
    words = _data_words(record)
    if len(words) < 2:
        raise DecodeError("TransferBatch data too short for array offsets", record.tx_hash, record.log_index)

    def read_array(byte_offset: int) -> list[int]:
        if byte_offset % 32 != 0:
            raise DecodeError(f"array offset {byte_offset} is not word-aligned", record.tx_hash, record.log_index)
        idx = byte_offset // 32
        if idx >= len(words):
            raise DecodeError("array offset beyond data end", record.tx_hash, record.log_index)
        length = words[idx]
        if idx + 1 + length > len(words):
            raise DecodeError("array length beyond data end", record.tx_hash, record.log_index)
        return words[idx + 1 : idx + 1 + length]

    ids = read_array(words[0])
    values = read_array(words[1])
    if len(ids) != len(values):
        raise DecodeError(
            f"TransferBatch id/value arity mismatch ({len(ids)} vs {len(values)})",
            record.tx_hash,
            record.log_index,
        )
    return ids, values


def decode_transfers(logs: Iterable[RawLogRecord], stats: DecodeStats | None = None) -> Iterator[TransferEvent]:
    """Decode token-transfer logs, preserving input order.

    Unknown topic signatures (and three-topic fungible-token Transfer logs)
    are skipped and counted; structurally broken data raises DecodeError
    with the offending transaction hash and log index.
    """
    stats = stats if stats is not None else DecodeStats()
    for record in logs:
        topic0 = record.topics[0]
        if topic0 == TRANSFER_721_TOPIC:
            if len(record.topics) != 4:
                stats.skip("transfer-topic-arity")
                continue
            from_addr = _topic_address(record.topics[1])
            to_addr = _topic_address(record.topics[2])
            token_id = int(record.topics[3], 16)
            stats.decoded += 1
            yield TransferEvent(
                standard=Standard.ERC721,
                contract=record.contract,
                from_addr=from_addr,
                to_addr=to_addr,
                token_id=token_id,
                amount=1,
                kind=_classify_kind(from_addr, to_addr),
                block=record.block,
                timestamp=record.timestamp,
                tx_hash=record.tx_hash,
                tx_value_wei=record.tx_value_wei,
                log_index=record.log_index,
            )
        elif topic0 == TRANSFER_SINGLE_TOPIC:
            if len(record.topics) != 4:
                stats.skip("transfer-topic-arity")
                continue
            words = _data_words(record)
            if len(words) != 2:
                raise DecodeError(
                    f"TransferSingle expects 2 data words, got {len(words)}", record.tx_hash, record.log_index
                )
            from_addr = _topic_address(record.topics[2])
            to_addr = _topic_address(record.topics[3])
            stats.decoded += 1
            yield TransferEvent(
                standard=Standard.ERC1155,
                contract=record.contract,
                from_addr=from_addr,
                to_addr=to_addr,
                token_id=words[0],
                amount=words[1],
                kind=_classify_kind(from_addr, to_addr),
                block=record.block,
                timestamp=record.timestamp,
                tx_hash=record.tx_hash,
                tx_value_wei=record.tx_value_wei,
                log_index=record.log_index,
            )
        elif topic0 == TRANSFER_BATCH_TOPIC:
            if len(record.topics) != 4:
                stats.skip("transfer-topic-arity")
                continue
            ids, values = _decode_batch_arrays(record)
            from_addr = _topic_address(record.topics[2])
            to_addr = _topic_address(record.topics[3])
            kind = _classify_kind(from_addr, to_addr)
            for ordinal, (token_id, amount) in enumerate(zip(ids, values)):
                stats.decoded += 1
                yield TransferEvent(
                    standard=Standard.ERC1155,
                    contract=record.contract,
                    from_addr=from_addr,
                    to_addr=to_addr,
                    token_id=token_id,
                    amount=amount,
                    kind=kind,
                    block=record.block,
                    timestamp=record.timestamp,
                    tx_hash=record.tx_hash,
                    tx_value_wei=record.tx_value_wei,
                    log_index=record.log_index,
                    batch_index=ordinal,
                )
        else:
            stats.skip("unknown-topic")


@dataclass(frozen=True)
class FieldSpec:
    source: str  # "topic" or "data"
    index: int

    def extract_int(self, record: RawLogRecord, words: list[int]) -> int:
        if self.source == "topic":
            if not 1 <= self.index < len(record.topics):
                raise DecodeError(f"topic index {self.index} out of range", record.tx_hash, record.log_index)
            return int(record.topics[self.index], 16)
        if self.index >= len(words):
            raise DecodeError(f"data word {self.index} out of range", record.tx_hash, record.log_index)
        return words[self.index]

    def extract_address(self, record: RawLogRecord, words: list[int]) -> str:
        return "0x" + format(self.extract_int(record, words) % (1 << 160), "040x")


@dataclass(frozen=True)
class MarketEventSpec:
    marketplace: str
    contract: str
    topic0: str
    seller: FieldSpec
    buyer: FieldSpec
    collection: FieldSpec
    token_id: FieldSpec
    price_wei: FieldSpec


_REQUIRED_TRADE_FIELDS = ("seller", "buyer", "collection", "token_id", "price_wei")


def _parse_field_spec(d: dict, market: str, name: str) -> FieldSpec:
    if not isinstance(d, dict) or "source" not in d:
        raise ValidationError(f"market {market}: field {name} needs a source")
    source = d["source"]
    if source == "topic":
        idx = d.get("index")
    elif source == "data":
        idx = d.get("word")
    else:
        raise ValidationError(f"market {market}: field {name} source must be 'topic' or 'data'")
    if not isinstance(idx, int) or idx < 0 or (source == "topic" and not 1 <= idx <= 3):
        raise ValidationError(f"market {market}: field {name} has a bad index")
    return FieldSpec(source=source, index=idx)


def load_market_map(path: str | Path) -> dict[tuple[str, str], MarketEventSpec]:
    """Parse the marketplace event-layout config into a lookup keyed by
    (contract address, topic0)."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"market map not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON: {exc.msg}") from None
    markets = doc.get("markets")
    if not isinstance(markets, list):
        raise ValidationError(f"{path}: expected a top-level 'markets' list")
    out: dict[tuple[str, str], MarketEventSpec] = {}
    for entry in markets:
        name = entry.get("marketplace")
        if name not in MARKETPLACES:
            raise ValidationError(f"{path}: unknown marketplace {name!r}")
        contract = validate_address(entry.get("contract", ""), f"market {name} contract")
        topic0 = entry.get("topic0", "")
        fields = entry.get("fields", {})
        specs = {f: _parse_field_spec(fields.get(f, {}), name, f) for f in _REQUIRED_TRADE_FIELDS}
        spec = MarketEventSpec(
            marketplace=name,
            contract=contract,
            topic0=topic0.lower(),
            **specs,
        )
        out[(contract, spec.topic0)] = spec
    return out


def decode_trades(
    logs: Iterable[RawLogRecord],
    market_map: dict[tuple[str, str], MarketEventSpec],
    stats: DecodeStats | None = None,
) -> Iterator[TradeRecord]:
    """Decode marketplace sale events per the configured layouts.

    Logs from unlisted contracts or with unlisted topics are skipped and
    counted."""
    stats = stats if stats is not None else DecodeStats()
    for record in logs:
        spec = market_map.get((record.contract, record.topics[0]))
        if spec is None:
            stats.skip("unknown-market-event")
            continue
        words = _data_words(record)
        try:
            trade = TradeRecord(
                marketplace=spec.marketplace,
                tx_hash=record.tx_hash,
                seller=spec.seller.extract_address(record, words),
                buyer=spec.buyer.extract_address(record, words),
                contract=spec.collection.extract_address(record, words),
                token_id=spec.token_id.extract_int(record, words),
                price_wei=spec.price_wei.extract_int(record, words),
                block=record.block,
                timestamp=record.timestamp,
                log_index=record.log_index,
            )
        except ValidationError as exc:
            raise DecodeError(str(exc), record.tx_hash, record.log_index) from None
        stats.decoded += 1
        yield trade


def load_metadata(path: str | Path) -> dict[str, CollectionMetadata]:
    """Read collection metadata, keyed by lowercase contract address.

    Duplicate contracts keep the last record and log a warning; malformed
    lines raise with the line number."""
    out: dict[str, CollectionMetadata] = {}
    for lineno, obj in iter_json_lines(path):
        try:
            meta = CollectionMetadata.from_json_dict(obj)
        except ValidationError as exc:
            raise ValidationError(f"{Path(path)}:{lineno}: {exc}") from None
        if meta.contract in out:
            log.warning("%s:%d: duplicate metadata for %s; keeping the later record", path, lineno, meta.contract)
        out[meta.contract] = meta
    return out
