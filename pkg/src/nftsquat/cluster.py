"""Grouping squat collections into scam campaigns.

Three edge sources feed one union-find partition: shared non-official
external links, shared creator addresses, and creators funding the same
exchange deposit address.  The final partition is independent of the order
the phases run in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from urllib.parse import urlsplit

from .errors import ValidationError
from .records import CollectionMetadata, PlainTransaction

DEFAULT_MAX_DIFF_WEI = 10**16  # 0.01 ETH
DEFAULT_MAX_BLOCKS = 10_000


class Phase(Enum):
    EXTERNAL_LINK = "ExternalLink"
    CREATOR = "Creator"
    DEPOSIT = "Deposit"


class Archetype(Enum):
    LINK_CENTERED = "LinkCentered"
    CREATOR_CENTERED = "CreatorCentered"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    phase: Phase
    evidence: str


class UnionFind:
    """Disjoint sets over contract addresses, path compression + rank."""

    def __init__(self) -> None:
        self.parent: dict[str, str] = {}
        self.rank: dict[str, int] = {}

    def add(self, x: str) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.rank[x] = 0

    def find(self, x: str) -> str:
        self.add(x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: str, y: str) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1

    def components(self) -> list[list[str]]:
        groups: dict[str, list[str]] = {}
        for node in self.parent:
            groups.setdefault(self.find(node), []).append(node)
        return sorted((sorted(members) for members in groups.values()), key=lambda m: m[0])


class ClusterGraph:
    """Union-find plus an edge log that can replay the partition exactly."""

    def __init__(self, nodes: list[str] | None = None) -> None:
        self.uf = UnionFind()
        self.edge_log: list[Edge] = []
        for node in nodes or []:
            self.uf.add(node)

    def apply(self, edges: list[Edge]) -> None:
        # sorted application keeps the log deterministic; the resulting
        # partition is order-independent anyway (unions commute)
        for edge in sorted(edges, key=lambda e: (e.phase.value, e.evidence, e.a, e.b)):
            self.uf.union(edge.a, edge.b)
            self.edge_log.append(edge)

    def replay(self) -> UnionFind:
        uf = UnionFind()
        for node in self.uf.parent:
            uf.add(node)
        for edge in self.edge_log:
            uf.union(edge.a, edge.b)
        return uf

    def components(self) -> list[list[str]]:
        return self.uf.components()


def normalize_link(url: str) -> str:
    """Scheme-insensitive link equality: lowercase host, trailing slash
    stripped, query preserved."""
    text = url.strip()
    if "://" not in text:
        text = "http://" + text
    parts = urlsplit(text)
    host = parts.netloc.lower()
    path = parts.path.rstrip("/")
    out = host + path
    if parts.query:
        out += "?" + parts.query
    return out


def link_phase(
    squats: list[tuple[str, CollectionMetadata | None]],
    official_links: set[str],
) -> list[Edge]:
    """Union squats sharing a non-official external link."""
    official_normalized = {normalize_link(u) for u in official_links}
    sharers: dict[str, list[str]] = {}
    for contract, meta in squats:
        if meta is None or not meta.external_link:
            continue
        link = normalize_link(meta.external_link)
        if link in official_normalized:
            continue
        sharers.setdefault(link, []).append(contract)
    edges: list[Edge] = []
    for link in sorted(sharers):
        members = sorted(set(sharers[link]))
        if len(members) < 2:
            continue
        hub = members[0]
        edges.extend(Edge(a=hub, b=other, phase=Phase.EXTERNAL_LINK, evidence=link) for other in members[1:])
    return edges


def creator_phase(squats: list[tuple[str, str]]) -> list[Edge]:
    """Union squats sharing a creator (deployer) address."""
    by_creator: dict[str, list[str]] = {}
    for contract, creator in squats:
        by_creator.setdefault(creator, []).append(contract)
    edges: list[Edge] = []
    for creator in sorted(by_creator):
        members = sorted(set(by_creator[creator]))
        if len(members) < 2:
            continue
        hub = members[0]
        edges.extend(Edge(a=hub, b=other, phase=Phase.CREATOR, evidence=creator) for other in members[1:])
    return edges


@dataclass(frozen=True)
class DepositMatch:
    deposit: str
    inflow: PlainTransaction
    outflow: PlainTransaction
    exchange: str

    def __post_init__(self):
        # value/block bounds are enforced by detect_deposits (they are
        # configurable there); the exchange linkage is structural
        if self.outflow.to_addr != self.exchange:
            raise ValidationError("deposit outflow must go to the exchange")

    def to_json_dict(self) -> dict:
        return {
            "deposit": self.deposit,
            "inflow": self.inflow.to_json_dict(),
            "outflow": self.outflow.to_json_dict(),
            "exchange": self.exchange,
        }


def detect_deposits(
    txs: list[PlainTransaction],
    exchanges: set[str],
    max_diff_wei: int = DEFAULT_MAX_DIFF_WEI,
    max_blocks: int = DEFAULT_MAX_BLOCKS,
) -> list[DepositMatch]:
    """Find exchange deposit addresses and pair their in/out flows.

    A deposit is any non-exchange address with at least one inflow and one
    outflow to an exchange.  Each outflow (in block then tx-hash order)
    greedily claims the latest unmatched inflow at or before its block with
    value difference strictly under max_diff_wei and block gap at most
    max_blocks.  Unmatched flows are dropped.
    """
    if not exchanges:
        raise ValidationError("exchange set must not be empty")
    inflows: dict[str, list[PlainTransaction]] = {}
    outflows: dict[str, list[PlainTransaction]] = {}
    for tx in txs:
        if tx.to_addr in exchanges and tx.from_addr not in exchanges:
            outflows.setdefault(tx.from_addr, []).append(tx)
        if tx.to_addr not in exchanges:
            inflows.setdefault(tx.to_addr, []).append(tx)

    matches: list[DepositMatch] = []
    for deposit in sorted(set(inflows) & set(outflows)):
        ins = sorted(inflows[deposit], key=lambda t: (t.block, t.tx_hash))
        outs = sorted(outflows[deposit], key=lambda t: (t.block, t.tx_hash))
        used = [False] * len(ins)
        for out in outs:
            for i in range(len(ins) - 1, -1, -1):
                tx_in = ins[i]
                if used[i] or tx_in.block > out.block:
                    continue
                if out.block - tx_in.block > max_blocks:
                    break  # earlier inflows are even further away
                if abs(tx_in.value_wei - out.value_wei) < max_diff_wei:
                    used[i] = True
                    matches.append(
                        DepositMatch(deposit=deposit, inflow=tx_in, outflow=out, exchange=out.to_addr)
                    )
                    break
    return matches


def expand_addresses(creators: set[str], txs: list[PlainTransaction]) -> dict[str, set[str]]:
    """One parsing pass over from/to fields: each creator's set contains
    itself plus every counterparty of its transactions."""
    expanded = {creator: {creator} for creator in creators}
    for tx in txs:
        if tx.from_addr in expanded:
            expanded[tx.from_addr].add(tx.to_addr)
        if tx.to_addr in expanded:
            expanded[tx.to_addr].add(tx.from_addr)
    return expanded


def deposit_phase(
    creators_of: dict[str, str],
    matches: list[DepositMatch],
    expanded: dict[str, set[str]],
) -> list[Edge]:
    """Union collections whose creators' expanded address sets fund the
    same deposit address."""
    senders_by_deposit: dict[str, set[str]] = {}
    for m in matches:
        senders_by_deposit.setdefault(m.deposit, set()).add(m.inflow.from_addr)

    edges: list[Edge] = []
    for deposit in sorted(senders_by_deposit):
        senders = senders_by_deposit[deposit]
        members = sorted(
            contract
            for contract, creator in creators_of.items()
            if expanded.get(creator, {creator}) & senders
        )
        if len(members) < 2:
            continue
        hub = members[0]
        edges.extend(Edge(a=hub, b=other, phase=Phase.DEPOSIT, evidence=deposit) for other in members[1:])
    return edges


@dataclass(frozen=True)
class Campaign:
    id: str
    members: tuple[str, ...]
    creators: tuple[str, ...]
    external_links: tuple[str, ...]
    deposit_addresses: tuple[str, ...]
    archetype: Archetype

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "members": list(self.members),
            "creators": list(self.creators),
            "external_links": list(self.external_links),
            "deposit_addresses": list(self.deposit_addresses),
            "archetype": self.archetype.value,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Campaign":
        return cls(
            id=d["id"],
            members=tuple(d["members"]),
            creators=tuple(d["creators"]),
            external_links=tuple(d["external_links"]),
            deposit_addresses=tuple(d["deposit_addresses"]),
            archetype=Archetype(d["archetype"]),
        )


@dataclass(frozen=True)
class ClusterSummary:
    campaign_count: int
    singleton_count: int
    size_histogram: dict[int, int]
    archetype_counts: dict[str, int]

    def to_json_dict(self) -> dict:
        return {
            "campaign_count": self.campaign_count,
            "singleton_count": self.singleton_count,
            "size_histogram": {str(k): v for k, v in sorted(self.size_histogram.items())},
            "archetype_counts": dict(sorted(self.archetype_counts.items())),
        }


def _classify_archetype(
    members: list[str],
    creators: set[str],
    links_by_member: dict[str, set[str]],
) -> Archetype:
    shared = None
    for i, member in enumerate(members):
        links = links_by_member.get(member, set())
        shared = set(links) if i == 0 else shared & links
        if not shared:
            break
    if shared:
        return Archetype.LINK_CENTERED
    if len(creators) == 1:
        return Archetype.CREATOR_CENTERED
    return Archetype.MIXED


def finalize(
    graph: ClusterGraph,
    creators_of: dict[str, str],
    metadata: dict[str, CollectionMetadata],
    official_links: set[str] | None = None,
) -> tuple[list[Campaign], ClusterSummary]:
    """Emit size>=2 components as campaigns; singletons are only counted."""
    official_normalized = {normalize_link(u) for u in (official_links or set())}
    links_by_member: dict[str, set[str]] = {}
    for contract in graph.uf.parent:
        meta = metadata.get(contract)
        if meta is not None and meta.external_link:
            link = normalize_link(meta.external_link)
            if link not in official_normalized:
                links_by_member[contract] = {link}

    deposits_by_root: dict[str, set[str]] = {}
    for edge in graph.edge_log:
        if edge.phase is Phase.DEPOSIT:
            deposits_by_root.setdefault(graph.uf.find(edge.a), set()).add(edge.evidence)

    campaigns: list[Campaign] = []
    singletons = 0
    for index, members in enumerate(graph.components()):
        if len(members) < 2:
            singletons += 1
            continue
        creators = {creators_of[m] for m in members if m in creators_of}
        links = sorted(set().union(*(links_by_member.get(m, set()) for m in members)))
        deposits = sorted(deposits_by_root.get(graph.uf.find(members[0]), set()))
        campaigns.append(
            Campaign(
                id=f"campaign-{len(campaigns) + 1:03d}",
                members=tuple(members),
                creators=tuple(sorted(creators)),
                external_links=tuple(links),
                deposit_addresses=tuple(deposits),
                archetype=_classify_archetype(members, creators, links_by_member),
            )
        )

    histogram: dict[int, int] = {}
    archetypes: dict[str, int] = {}
    for campaign in campaigns:
        histogram[len(campaign.members)] = histogram.get(len(campaign.members), 0) + 1
        archetypes[campaign.archetype.value] = archetypes.get(campaign.archetype.value, 0) + 1
    summary = ClusterSummary(
        campaign_count=len(campaigns),
        singleton_count=singletons,
        size_histogram=histogram,
        archetype_counts=archetypes,
    )
    return campaigns, summary
