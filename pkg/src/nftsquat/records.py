"""Wire-level record types and their line-delimited JSON forms.

Conventions used by every serializer here:
  * addresses and hashes are 0x-prefixed lowercase hex,
  * wei amounts travel as decimal strings (they exceed 2**53),
  * optional fields are omitted from JSON when unset.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import ValidationError

NULL_ADDRESS = "0x" + "00" * 20
DEAD_ADDRESS = "0x000000000000000000000000000000000000dead"
# "to" sinks that destroy a token: the zero address and the conventional dEaD address.
DEAD_ADDRESSES = frozenset({NULL_ADDRESS, DEAD_ADDRESS})
NULL_ADDRESSES = frozenset({NULL_ADDRESS})

WEI_PER_ETH = 10**18

_ADDRESS_RE = re.compile(r"^0x[0-9a-f]{40}$")
_HASH32_RE = re.compile(r"^0x[0-9a-f]{64}$")

MARKETPLACES = ("OpenSea", "LooksRare", "X2Y2", "Blur", "CryptoPunks")


class Tactic(Enum):
    IDENTICAL_NAME = "IdenticalName"
    COMBINATION_SQUATTING = "CombinationSquatting"
    CHARACTER_INSERTION = "CharacterInsertion"
    CHARACTER_OMISSION = "CharacterOmission"
    CASE_SUBSTITUTION = "CaseSubstitution"
    MISSPELLING_SUBSTITUTION = "MisspellingSubstitution"
    HOMOGLYPH = "Homoglyph"
    HOMOPHONE = "Homophone"


# Classification priority: earlier entries win when several tactics explain
# the same candidate name.  Also the canonical sort order for corpus output.
TACTIC_PRIORITY = (
    Tactic.IDENTICAL_NAME,
    Tactic.CASE_SUBSTITUTION,
    Tactic.HOMOPHONE,
    Tactic.HOMOGLYPH,
    Tactic.MISSPELLING_SUBSTITUTION,
    Tactic.CHARACTER_INSERTION,
    Tactic.CHARACTER_OMISSION,
    Tactic.COMBINATION_SQUATTING,
)

MUTATION_TACTICS = (
    Tactic.HOMOPHONE,
    Tactic.HOMOGLYPH,
    Tactic.MISSPELLING_SUBSTITUTION,
    Tactic.CHARACTER_INSERTION,
    Tactic.CHARACTER_OMISSION,
    Tactic.CASE_SUBSTITUTION,
)


def tactic_rank(tactic: Tactic) -> int:
    return TACTIC_PRIORITY.index(tactic)


class Standard(Enum):
    ERC721 = "ERC721"
    ERC1155 = "ERC1155"


class TransferKind(Enum):
    MINT = "Mint"
    BURN = "Burn"
    SWAP = "Swap"


class LabelCategory(Enum):
    SPAM = "Spam"
    PHISHING = "Phishing"
    MALICIOUS = "Malicious"
    NONE = "None"


MALICIOUS_LABELS = frozenset({LabelCategory.SPAM, LabelCategory.PHISHING, LabelCategory.MALICIOUS})


def validate_address(value: str, what: str = "address") -> str:
    if not isinstance(value, str):
        raise ValidationError(f"{what} must be a string, got {type(value).__name__}")
    addr = value.lower()
    if not _ADDRESS_RE.match(addr):
        raise ValidationError(f"{what} {value!r} is not a 0x-prefixed 20-byte hex address")
    return addr


def validate_hash32(value: str, what: str = "hash") -> str:
    if not isinstance(value, str):
        raise ValidationError(f"{what} must be a string, got {type(value).__name__}")
    h = value.lower()
    if not _HASH32_RE.match(h):
        raise ValidationError(f"{what} {value!r} is not a 0x-prefixed 32-byte hex value")
    return h


def parse_wei(value, what: str = "wei amount") -> int:
    """Accept a decimal string or int; reject negatives and garbage."""
    if isinstance(value, bool):
        raise ValidationError(f"{what} must be an integer or decimal string")
    if isinstance(value, int):
        amount = value
    elif isinstance(value, str):
        try:
            amount = int(value, 10)
        except ValueError:
            raise ValidationError(f"{what} {value!r} is not a decimal integer") from None
    else:
        raise ValidationError(f"{what} must be an integer or decimal string")
    if amount < 0:
        raise ValidationError(f"{what} must be non-negative, got {amount}")
    return amount


def _require(d: dict, key: str, what: str):
    if key not in d:
        raise ValidationError(f"{what} record is missing field {key!r}")
    return d[key]


def _parse_int(value, what: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{what} must be an integer")
    if value < minimum:
        raise ValidationError(f"{what} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class SeedCollection:
    """An official top-ranked collection used as a squatting target."""

    rank: int
    name: str
    contract_address: str
    deploy_block: int
    market_cap_wei: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValidationError(f"seed rank must be >= 1, got {self.rank}")
        if not self.name.strip():
            raise ValidationError("seed name is empty after trimming")
        object.__setattr__(self, "contract_address", validate_address(self.contract_address, "seed contract"))

    def to_json_dict(self) -> dict:
        return {
            "rank": self.rank,
            "name": self.name,
            "contract_address": self.contract_address,
            "deploy_block": self.deploy_block,
            "market_cap_wei": str(self.market_cap_wei),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SeedCollection":
        return cls(
            rank=_parse_int(_require(d, "rank", "seed"), "rank", minimum=1),
            name=str(_require(d, "name", "seed")),
            contract_address=_require(d, "contract_address", "seed"),
            deploy_block=_parse_int(_require(d, "deploy_block", "seed"), "deploy_block"),
            market_cap_wei=parse_wei(_require(d, "market_cap_wei", "seed"), "market_cap_wei"),
        )


@dataclass(frozen=True)
class SquatKeyword:
    """A generated name variant tagged with the tactic that produced it."""

    text: str
    tactic: Tactic
    seed_name: str
    rule_detail: str

    def __post_init__(self):
        if self.tactic is not Tactic.IDENTICAL_NAME and self.text == self.seed_name:
            raise ValidationError(
                f"keyword text equals seed name {self.seed_name!r} but tactic is {self.tactic.value}"
            )

    def to_json_dict(self) -> dict:
        return {
            "text": self.text,
            "tactic": self.tactic.value,
            "seed_name": self.seed_name,
            "rule_detail": self.rule_detail,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SquatKeyword":
        return cls(
            text=str(_require(d, "text", "keyword")),
            tactic=Tactic(_require(d, "tactic", "keyword")),
            seed_name=str(_require(d, "seed_name", "keyword")),
            rule_detail=str(d.get("rule_detail", "")),
        )


@dataclass(frozen=True)
class CandidateCollection:
    """A deployed collection whose name is checked against the corpus."""

    contract_address: str
    name: str
    standard: Standard
    deploy_block: int
    creator: str

    def __post_init__(self):
        object.__setattr__(self, "contract_address", validate_address(self.contract_address, "candidate contract"))
        object.__setattr__(self, "creator", validate_address(self.creator, "candidate creator"))

    def to_json_dict(self) -> dict:
        return {
            "contract_address": self.contract_address,
            "name": self.name,
            "standard": self.standard.value,
            "deploy_block": self.deploy_block,
            "creator": self.creator,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CandidateCollection":
        return cls(
            contract_address=_require(d, "contract_address", "candidate"),
            name=str(_require(d, "name", "candidate")),
            standard=Standard(_require(d, "standard", "candidate")),
            deploy_block=_parse_int(_require(d, "deploy_block", "candidate"), "deploy_block"),
            creator=_require(d, "creator", "candidate"),
        )


class MatchKind(Enum):
    EXACT = "Exact"
    PARTIAL = "Partial"


@dataclass(frozen=True)
class MatchResult:
    candidate: CandidateCollection
    seed_name: str
    tactic: Tactic
    matched_keyword: str
    match_kind: MatchKind
    secondary_tactics: tuple[Tactic, ...] = ()

    def __post_init__(self):
        if self.tactic is Tactic.COMBINATION_SQUATTING and self.match_kind is not MatchKind.PARTIAL:
            raise ValidationError("combination matches must be Partial")
        if self.tactic is Tactic.IDENTICAL_NAME and self.candidate.name != self.seed_name:
            raise ValidationError("IdenticalName match requires raw name equality")

    def to_json_dict(self) -> dict:
        return {
            "candidate": self.candidate.to_json_dict(),
            "seed_name": self.seed_name,
            "tactic": self.tactic.value,
            "matched_keyword": self.matched_keyword,
            "match_kind": self.match_kind.value,
            "secondary_tactics": [t.value for t in self.secondary_tactics],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "MatchResult":
        return cls(
            candidate=CandidateCollection.from_json_dict(_require(d, "candidate", "match")),
            seed_name=str(_require(d, "seed_name", "match")),
            tactic=Tactic(_require(d, "tactic", "match")),
            matched_keyword=str(_require(d, "matched_keyword", "match")),
            match_kind=MatchKind(_require(d, "match_kind", "match")),
            secondary_tactics=tuple(Tactic(t) for t in d.get("secondary_tactics", [])),
        )


@dataclass(frozen=True)
class RawLogRecord:
    tx_hash: str
    log_index: int
    contract: str
    topics: tuple[str, ...]
    data: str
    block: int
    timestamp: int
    tx_value_wei: int

    def __post_init__(self):
        object.__setattr__(self, "tx_hash", validate_hash32(self.tx_hash, "tx_hash"))
        object.__setattr__(self, "contract", validate_address(self.contract, "log contract"))
        topics = tuple(validate_hash32(t, "topic") for t in self.topics)
        if not 1 <= len(topics) <= 4:
            raise ValidationError(f"log must carry 1-4 topics, got {len(topics)}")
        object.__setattr__(self, "topics", topics)
        data = self.data.lower()
        if not data.startswith("0x") or len(data[2:]) % 64 != 0:
            raise ValidationError(f"log data must be 0x-prefixed whole 32-byte words, got {self.data!r}")
        object.__setattr__(self, "data", data)

    def to_json_dict(self) -> dict:
        return {
            "tx_hash": self.tx_hash,
            "log_index": self.log_index,
            "contract": self.contract,
            "topics": list(self.topics),
            "data": self.data,
            "block": self.block,
            "timestamp": self.timestamp,
            "tx_value_wei": str(self.tx_value_wei),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RawLogRecord":
        return cls(
            tx_hash=_require(d, "tx_hash", "log"),
            log_index=_parse_int(_require(d, "log_index", "log"), "log_index"),
            contract=_require(d, "contract", "log"),
            topics=tuple(_require(d, "topics", "log")),
            data=str(_require(d, "data", "log")),
            block=_parse_int(_require(d, "block", "log"), "block"),
            timestamp=_parse_int(_require(d, "timestamp", "log"), "timestamp"),
            tx_value_wei=parse_wei(d.get("tx_value_wei", 0), "tx_value_wei"),
        )


@dataclass(frozen=True)
class TransferEvent:
    """A decoded ownership change.

    log_index and batch_index are carried beyond the headline fields so a
    TransferBatch expansion keeps per-event identity and streams stay
    deterministically ordered by (block, log_index, batch_index).
    """

    standard: Standard
    contract: str
    from_addr: str
    to_addr: str
    token_id: int
    amount: int
    kind: TransferKind
    block: int
    timestamp: int
    tx_hash: str
    tx_value_wei: int
    log_index: int = 0
    batch_index: int = 0

    def to_json_dict(self) -> dict:
        return {
            "standard": self.standard.value,
            "contract": self.contract,
            "from": self.from_addr,
            "to": self.to_addr,
            "token_id": self.token_id,
            "amount": str(self.amount),
            "kind": self.kind.value,
            "block": self.block,
            "timestamp": self.timestamp,
            "tx_hash": self.tx_hash,
            "tx_value_wei": str(self.tx_value_wei),
            "log_index": self.log_index,
            "batch_index": self.batch_index,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "TransferEvent":
        return cls(
            standard=Standard(_require(d, "standard", "transfer")),
            contract=validate_address(_require(d, "contract", "transfer"), "transfer contract"),
            from_addr=validate_address(_require(d, "from", "transfer"), "transfer from"),
            to_addr=validate_address(_require(d, "to", "transfer"), "transfer to"),
            token_id=_parse_int(_require(d, "token_id", "transfer"), "token_id"),
            amount=parse_wei(_require(d, "amount", "transfer"), "amount"),
            kind=TransferKind(_require(d, "kind", "transfer")),
            block=_parse_int(_require(d, "block", "transfer"), "block"),
            timestamp=_parse_int(_require(d, "timestamp", "transfer"), "timestamp"),
            tx_hash=validate_hash32(_require(d, "tx_hash", "transfer"), "tx_hash"),
            tx_value_wei=parse_wei(d.get("tx_value_wei", 0), "tx_value_wei"),
            log_index=_parse_int(d.get("log_index", 0), "log_index"),
            batch_index=_parse_int(d.get("batch_index", 0), "batch_index"),
        )


@dataclass(frozen=True)
class TradeRecord:
    """A priced marketplace sale. log_index kept for deterministic ordering."""

    marketplace: str
    tx_hash: str
    seller: str
    buyer: str
    contract: str
    token_id: int
    price_wei: int
    block: int
    timestamp: int
    log_index: int = 0

    def __post_init__(self):
        if self.marketplace not in MARKETPLACES:
            raise ValidationError(f"unknown marketplace {self.marketplace!r}")
        object.__setattr__(self, "tx_hash", validate_hash32(self.tx_hash, "trade tx_hash"))
        object.__setattr__(self, "seller", validate_address(self.seller, "seller"))
        object.__setattr__(self, "buyer", validate_address(self.buyer, "buyer"))
        object.__setattr__(self, "contract", validate_address(self.contract, "trade contract"))
        if self.buyer == self.seller:
            raise ValidationError(f"trade buyer equals seller ({self.buyer})")
        if self.price_wei < 0:
            raise ValidationError("trade price must be non-negative")

    def to_json_dict(self) -> dict:
        return {
            "marketplace": self.marketplace,
            "tx_hash": self.tx_hash,
            "seller": self.seller,
            "buyer": self.buyer,
            "contract": self.contract,
            "token_id": self.token_id,
            "price_wei": str(self.price_wei),
            "block": self.block,
            "timestamp": self.timestamp,
            "log_index": self.log_index,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "TradeRecord":
        return cls(
            marketplace=str(_require(d, "marketplace", "trade")),
            tx_hash=_require(d, "tx_hash", "trade"),
            seller=_require(d, "seller", "trade"),
            buyer=_require(d, "buyer", "trade"),
            contract=_require(d, "contract", "trade"),
            token_id=_parse_int(_require(d, "token_id", "trade"), "token_id"),
            price_wei=parse_wei(_require(d, "price_wei", "trade"), "price_wei"),
            block=_parse_int(_require(d, "block", "trade"), "block"),
            timestamp=_parse_int(_require(d, "timestamp", "trade"), "timestamp"),
            log_index=_parse_int(d.get("log_index", 0), "log_index"),
        )


@dataclass(frozen=True)
class ExternalLabel:
    source: str
    label: LabelCategory

    def to_json_dict(self) -> dict:
        return {"source": self.source, "label": self.label.value}

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExternalLabel":
        raw = d.get("label")
        return cls(
            source=str(_require(d, "source", "label")),
            label=LabelCategory.NONE if raw in (None, "") else LabelCategory(raw),
        )


@dataclass(frozen=True)
class CollectionMetadata:
    """Marketplace-sourced metadata snapshot for one collection.

    deploy_block is optional: it is only needed by the deployment-order
    prefilter and snapshots may lack it.
    """

    contract: str
    name: str
    creator: str
    royalty_bps: int
    twitter_handle: str | None = None
    external_link: str | None = None
    token_uris: dict[str, str] = field(default_factory=dict)
    official_flag: bool = False
    external_labels: tuple[ExternalLabel, ...] = ()
    deploy_block: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "contract", validate_address(self.contract, "metadata contract"))
        object.__setattr__(self, "creator", validate_address(self.creator, "metadata creator"))
        if not 0 <= self.royalty_bps <= 10000:
            raise ValidationError(f"royalty_bps must be in [0, 10000], got {self.royalty_bps}")

    def to_json_dict(self) -> dict:
        d = {
            "contract": self.contract,
            "name": self.name,
            "creator": self.creator,
            "royalty_bps": self.royalty_bps,
            "token_uris": dict(sorted(self.token_uris.items())),
            "official_flag": self.official_flag,
            "external_labels": [l.to_json_dict() for l in self.external_labels],
        }
        if self.twitter_handle is not None:
            d["twitter_handle"] = self.twitter_handle
        if self.external_link is not None:
            d["external_link"] = self.external_link
        if self.deploy_block is not None:
            d["deploy_block"] = self.deploy_block
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "CollectionMetadata":
        deploy = d.get("deploy_block")
        return cls(
            contract=_require(d, "contract", "metadata"),
            name=str(_require(d, "name", "metadata")),
            creator=_require(d, "creator", "metadata"),
            royalty_bps=_parse_int(_require(d, "royalty_bps", "metadata"), "royalty_bps"),
            twitter_handle=d.get("twitter_handle"),
            external_link=d.get("external_link"),
            token_uris={str(k): str(v) for k, v in d.get("token_uris", {}).items()},
            official_flag=bool(d.get("official_flag", False)),
            external_labels=tuple(ExternalLabel.from_json_dict(x) for x in d.get("external_labels", [])),
            deploy_block=None if deploy is None else _parse_int(deploy, "deploy_block"),
        )


@dataclass(frozen=True)
class PlainTransaction:
    tx_hash: str
    from_addr: str
    to_addr: str
    value_wei: int
    block: int

    def __post_init__(self):
        object.__setattr__(self, "tx_hash", validate_hash32(self.tx_hash, "tx_hash"))
        object.__setattr__(self, "from_addr", validate_address(self.from_addr, "tx from"))
        object.__setattr__(self, "to_addr", validate_address(self.to_addr, "tx to"))
        if self.value_wei < 0:
            raise ValidationError("transaction value must be non-negative")

    def to_json_dict(self) -> dict:
        return {
            "tx_hash": self.tx_hash,
            "from": self.from_addr,
            "to": self.to_addr,
            "value_wei": str(self.value_wei),
            "block": self.block,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PlainTransaction":
        return cls(
            tx_hash=_require(d, "tx_hash", "transaction"),
            from_addr=_require(d, "from", "transaction"),
            to_addr=_require(d, "to", "transaction"),
            value_wei=parse_wei(_require(d, "value_wei", "transaction"), "value_wei"),
            block=_parse_int(_require(d, "block", "transaction"), "block"),
        )


def dedupe_seeds(seeds: list[SeedCollection]) -> list[SeedCollection]:
    """Keep one seed per name: the one with the highest market cap.

    Ties on market cap fall back to the better (lower) rank so the result
    never depends on input order.  Output is sorted by rank.
    """
    best: dict[str, SeedCollection] = {}
    for seed in seeds:
        cur = best.get(seed.name)
        if cur is None or (seed.market_cap_wei, -seed.rank) > (cur.market_cap_wei, -cur.rank):
            best[seed.name] = seed
    return sorted(best.values(), key=lambda s: (s.rank, s.contract_address))
