"""Prefilters and the five-criterion majority rule for matched candidates.

A matched collection is suspicious when at least four of five signals fire:
floor-price collapse, transfer collapse, social silence, an external
malicious label, and image similarity to the target.  Whitelisted
derivatives and collections deployed before their target never reach the
criteria at all.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, datetime, timezone
from enum import Enum
from fractions import Fraction

from .errors import ValidationError
from .records import (
    MALICIOUS_LABELS,
    CollectionMetadata,
    ExternalLabel,
    MatchResult,
    TradeRecord,
    TransferEvent,
)

log = logging.getLogger(__name__)

MAJORITY_MIN = 4  # criteria needed to call a collection suspicious

SECONDS_PER_DAY = 86400

CRITERIA_NAMES = (
    "price_collapse",
    "transfer_collapse",
    "social_silence",
    "external_malicious",
    "image_similarity",
)


@dataclass(frozen=True)
class FilterThresholds:
    price_drop_fraction: float = 0.9
    price_unrecovered_days: int = 30
    transfer_drop_fraction: float = 0.9
    transfer_low_months: int = 2
    social_silence_days: int = 30
    dhash_threshold: int = 5

    def __post_init__(self):
        for name in ("price_drop_fraction", "transfer_drop_fraction"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValidationError(f"{name} must be in (0, 1], got {value}")
        for name in ("price_unrecovered_days", "transfer_low_months", "social_silence_days"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if not 0 <= self.dhash_threshold <= 64:
            raise ValidationError("dhash_threshold must be in [0, 64]")

    def to_json_dict(self) -> dict:
        return {
            "price_drop_fraction": self.price_drop_fraction,
            "price_unrecovered_days": self.price_unrecovered_days,
            "transfer_drop_fraction": self.transfer_drop_fraction,
            "transfer_low_months": self.transfer_low_months,
            "social_silence_days": self.social_silence_days,
            "dhash_threshold": self.dhash_threshold,
        }


def _keep_fraction(drop_fraction: float) -> Fraction:
    # Fraction(str(...)) keeps 0.9 exactly 9/10, so a drop of exactly 90%
    # compares exactly and does not trigger the strict bound.
    return 1 - Fraction(str(drop_fraction))


@dataclass(frozen=True)
class DailyFloorSeries:
    contract: str
    points: tuple[tuple[date, int], ...]

    def __post_init__(self):
        for (d1, p1), (d2, _) in zip(self.points, self.points[1:]):
            if d2 <= d1:
                raise ValidationError(f"floor series for {self.contract} is not strictly increasing by day")
        for _, price in self.points:
            if price < 0:
                raise ValidationError("floor prices must be non-negative")


@dataclass(frozen=True)
class MonthlyTransferSeries:
    contract: str
    points: tuple[tuple[tuple[int, int], int], ...]  # ((year, month), count)

    def __post_init__(self):
        for (m1, _), (m2, _) in zip(self.points, self.points[1:]):
            if m2 <= m1:
                raise ValidationError(f"transfer series for {self.contract} is not strictly increasing by month")
        for _, count in self.points:
            if count < 0:
                raise ValidationError("transfer counts must be non-negative")


@dataclass(frozen=True)
class SocialActivity:
    contract: str
    post_timestamps: tuple[int, ...]
    last_onchain_activity: int

    def __post_init__(self):
        if list(self.post_timestamps) != sorted(self.post_timestamps):
            raise ValidationError(f"post timestamps for {self.contract} must be sorted ascending")


class PrefilterExclusion(Enum):
    DERIVATIVE_WHITELIST = "DerivativeWhitelist"
    DEPLOYED_BEFORE_OFFICIAL = "DeployedBeforeOfficial"


@dataclass(frozen=True)
class SuspicionVerdict:
    contract: str
    criteria: dict[str, bool]
    satisfied_count: int
    suspicious: bool
    prefilter_exclusion: PrefilterExclusion | None = None

    def to_json_dict(self) -> dict:
        d = {
            "contract": self.contract,
            "criteria": {name: self.criteria[name] for name in CRITERIA_NAMES},
            "satisfied_count": self.satisfied_count,
            "suspicious": self.suspicious,
        }
        if self.prefilter_exclusion is not None:
            d["prefilter_exclusion"] = self.prefilter_exclusion.value
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "SuspicionVerdict":
        raw = d.get("prefilter_exclusion")
        return cls(
            contract=d["contract"],
            criteria={name: bool(d["criteria"][name]) for name in CRITERIA_NAMES},
            satisfied_count=int(d["satisfied_count"]),
            suspicious=bool(d["suspicious"]),
            prefilter_exclusion=None if raw is None else PrefilterExclusion(raw),
        )


def build_verdict(
    contract: str,
    criteria: dict[str, bool],
    prefilter_exclusion: PrefilterExclusion | None = None,
) -> SuspicionVerdict:
    if set(criteria) != set(CRITERIA_NAMES):
        raise ValidationError(f"criteria must be exactly {CRITERIA_NAMES}")
    count = sum(1 for name in CRITERIA_NAMES if criteria[name])
    return SuspicionVerdict(
        contract=contract,
        criteria=dict(criteria),
        satisfied_count=count,
        suspicious=count >= MAJORITY_MIN and prefilter_exclusion is None,
        prefilter_exclusion=prefilter_exclusion,
    )


def excluded_verdict(contract: str, exclusion: PrefilterExclusion) -> SuspicionVerdict:
    """Verdict for a prefiltered candidate; criteria are never evaluated."""
    return build_verdict(contract, {name: False for name in CRITERIA_NAMES}, prefilter_exclusion=exclusion)


def prefilter(
    match: MatchResult,
    meta_official: CollectionMetadata | None,
    meta_candidate: CollectionMetadata | None,
    whitelist: set[str],
) -> PrefilterExclusion | None:
    """Return the exclusion that removes this match before the criteria run.

    A missing deploy block lets the candidate through with a warning:
    absent evidence is not evidence of innocence.
    """
    candidate = match.candidate
    if candidate.contract_address in whitelist:
        return PrefilterExclusion.DERIVATIVE_WHITELIST
    candidate_block: int | None = candidate.deploy_block
    if candidate_block is None and meta_candidate is not None:
        candidate_block = meta_candidate.deploy_block
    official_block = meta_official.deploy_block if meta_official is not None else None
    if candidate_block is None or official_block is None:
        log.warning(
            "match %s vs %r: deploy block unavailable; deployment-order prefilter skipped",
            candidate.contract_address,
            match.seed_name,
        )
        return None
    if candidate_block < official_block:
        return PrefilterExclusion.DEPLOYED_BEFORE_OFFICIAL
    return None


def price_collapse(series: DailyFloorSeries, thresholds: FilterThresholds) -> bool:
    """True when some day's floor sits strictly below (1 - drop_fraction) of
    the running peak and no day in the following window climbs back above
    that bound.  A series that ends inside the window counts as unrecovered.
    """
    keep = _keep_fraction(thresholds.price_drop_fraction)
    window = thresholds.price_unrecovered_days
    points = series.points
    peak = 0
    for idx, (day, price) in enumerate(points):
        if peak > 0 and price * keep.denominator < peak * keep.numerator:
            recovered = False
            for later_day, later_price in points[idx + 1 :]:
                if (later_day - day).days > window:
                    break
                if later_price * keep.denominator > peak * keep.numerator:
                    recovered = True
                    break
            if not recovered:
                return True
        if price > peak:
            peak = price
    return False


def _next_month(ym: tuple[int, int]) -> tuple[int, int]:
    year, month = ym
    return (year + 1, 1) if month == 12 else (year, month + 1)


def transfer_collapse(series: MonthlyTransferSeries, thresholds: FilterThresholds) -> bool:
    """True when a month falls strictly below (1 - drop_fraction) of the
    running peak and stays below it for transfer_low_months consecutive
    months.  Months absent from the series count zero transfers.
    """
    keep = _keep_fraction(thresholds.transfer_drop_fraction)
    counts = dict(series.points)
    peak = 0
    for ym, count in series.points:
        if peak > 0 and count * keep.denominator < peak * keep.numerator:
            low = True
            month = ym
            for _ in range(thresholds.transfer_low_months - 1):
                month = _next_month(month)
                if counts.get(month, 0) * keep.denominator >= peak * keep.numerator:
                    low = False
                    break
            if low:
                return True
        if count > peak:
            peak = count
    return False


def social_silence(social: SocialActivity, thresholds: FilterThresholds) -> bool:
    """True when no post lands within the silence window right after the
    last on-chain activity.  An account with no recorded posts at all is
    silent by definition.
    """
    lo = social.last_onchain_activity
    hi = lo + thresholds.social_silence_days * SECONDS_PER_DAY
    return not any(lo < ts <= hi for ts in social.post_timestamps)


def external_malicious(labels: list[ExternalLabel]) -> bool:
    return any(label.label in MALICIOUS_LABELS for label in labels)


def evaluate(
    contract: str,
    floor_series: DailyFloorSeries,
    transfer_series: MonthlyTransferSeries,
    social: SocialActivity,
    labels: list[ExternalLabel],
    image_hits: bool,
    thresholds: FilterThresholds,
) -> SuspicionVerdict:
    """Score the five criteria and apply the majority rule."""
    criteria = {
        "price_collapse": price_collapse(floor_series, thresholds),
        "transfer_collapse": transfer_collapse(transfer_series, thresholds),
        "social_silence": social_silence(social, thresholds),
        "external_malicious": external_malicious(labels),
        "image_similarity": bool(image_hits),
    }
    return build_verdict(contract, criteria)


def daily_floor_series(contract: str, trades: list[TradeRecord]) -> DailyFloorSeries:
    """Minimum trade price per UTC day; days without trades carry no point."""
    floors: dict[date, int] = {}
    for trade in trades:
        if trade.contract != contract:
            continue
        day = datetime.fromtimestamp(trade.timestamp, tz=timezone.utc).date()
        if day not in floors or trade.price_wei < floors[day]:
            floors[day] = trade.price_wei
    return DailyFloorSeries(contract=contract, points=tuple(sorted(floors.items())))


def monthly_transfer_series(contract: str, transfers: list[TransferEvent]) -> MonthlyTransferSeries:
    counts: dict[tuple[int, int], int] = {}
    for ev in transfers:
        if ev.contract != contract:
            continue
        dt = datetime.fromtimestamp(ev.timestamp, tz=timezone.utc)
        key = (dt.year, dt.month)
        counts[key] = counts.get(key, 0) + 1
    return MonthlyTransferSeries(contract=contract, points=tuple(sorted(counts.items())))


def last_onchain_activity(contract: str, transfers: list[TransferEvent], trades: list[TradeRecord]) -> int:
    stamps = [ev.timestamp for ev in transfers if ev.contract == contract]
    stamps += [t.timestamp for t in trades if t.contract == contract]
    return max(stamps, default=0)
