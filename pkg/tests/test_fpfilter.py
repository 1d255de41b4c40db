import random
from datetime import date, timedelta

import pytest

from nftsquat.errors import ValidationError
from nftsquat.fpfilter import (
    CRITERIA_NAMES,
    DailyFloorSeries,
    FilterThresholds,
    MonthlyTransferSeries,
    PrefilterExclusion,
    SocialActivity,
    build_verdict,
    daily_floor_series,
    evaluate,
    excluded_verdict,
    external_malicious,
    last_onchain_activity,
    monthly_transfer_series,
    prefilter,
    price_collapse,
    social_silence,
    transfer_collapse,
)
from nftsquat.records import (
    CandidateCollection,
    CollectionMetadata,
    ExternalLabel,
    LabelCategory,
    MatchKind,
    MatchResult,
    Standard,
    Tactic,
    WEI_PER_ETH,
)
from tests.conftest import addr

T = FilterThresholds()
DAY0 = date(2022, 6, 1)
SQUAT = addr(0xB01)


def floor_series(prices_by_day_offset):
    points = tuple((DAY0 + timedelta(days=off), price) for off, price in sorted(prices_by_day_offset.items()))
    return DailyFloorSeries(contract=SQUAT, points=points)


def month_series(counts):
    points = tuple(((2022, month), count) for month, count in sorted(counts.items()))
    return MonthlyTransferSeries(contract=SQUAT, points=points)


ETH = WEI_PER_ETH


# --- price collapse ------------------------------------------------------------


def test_price_collapse_basic():
    # peak 10 ETH, then 0.5 ETH held for 40 days with no recovery
    series = floor_series({0: 10 * ETH, 5: 5 * ETH // 10, 45: 4 * ETH // 10})
    assert price_collapse(series, T)


def test_price_drop_of_exactly_90_percent_does_not_trigger():
    series = floor_series({0: 10 * ETH, 5: ETH, 50: ETH})  # exactly 10% of peak
    assert not price_collapse(series, T)


def test_price_drop_of_90_point_1_percent_triggers():
    dropped = 10 * ETH - (10 * ETH * 901) // 1000  # 0.99 ETH = 90.1% drop
    series = floor_series({0: 10 * ETH, 5: dropped, 50: dropped})
    assert price_collapse(series, T)


def test_price_recovery_within_window_cancels():
    series = floor_series({0: 10 * ETH, 5: ETH // 2, 20: 2 * ETH})
    assert not price_collapse(series, T)


def test_price_recovery_after_window_does_not_cancel():
    series = floor_series({0: 10 * ETH, 5: ETH // 2, 36: 2 * ETH})
    assert price_collapse(series, T)


def test_price_series_ending_inside_window_counts_as_unrecovered():
    series = floor_series({0: 10 * ETH, 5: ETH // 2})
    assert price_collapse(series, T)


def test_price_peak_is_running_not_global():
    # collapse against the first peak, later pump does not erase it
    series = floor_series({0: 10 * ETH, 5: ETH // 2, 40: 100 * ETH})
    assert price_collapse(series, T)


def test_price_first_day_cannot_collapse():
    assert not price_collapse(floor_series({0: 1}), T)


def test_empty_price_series_is_false():
    assert not price_collapse(floor_series({}), T)


def test_unordered_price_series_rejected():
    with pytest.raises(ValidationError):
        DailyFloorSeries(contract=SQUAT, points=((DAY0, 1), (DAY0, 2)))


# --- transfer collapse -----------------------------------------------------------


def test_transfer_collapse_two_low_months():
    assert transfer_collapse(month_series({1: 100, 2: 5, 3: 4}), T)


def test_transfer_single_low_month_insufficient():
    assert not transfer_collapse(month_series({1: 100, 2: 5, 3: 50}), T)


def test_transfer_exactly_90_percent_not_enough():
    assert not transfer_collapse(month_series({1: 100, 2: 10, 3: 10}), T)


def test_transfer_missing_next_month_counts_as_zero():
    assert transfer_collapse(month_series({1: 100, 2: 5}), T)


def test_transfer_gap_month_counts_as_zero():
    # month 3 absent entirely: month 2 low, month 3 zero -> collapse
    assert transfer_collapse(month_series({1: 100, 2: 5, 4: 100}), T)


def test_transfer_year_boundary():
    points = (((2022, 12), 100), ((2023, 1), 3), ((2023, 2), 2))
    series = MonthlyTransferSeries(contract=SQUAT, points=points)
    assert transfer_collapse(series, T)


def test_unordered_month_series_rejected():
    with pytest.raises(ValidationError):
        MonthlyTransferSeries(contract=SQUAT, points=(((2022, 3), 1), ((2022, 2), 1)))


# --- social silence -------------------------------------------------------------


LAST = 1_700_000_000


def test_zero_posts_is_silent():
    social = SocialActivity(contract=SQUAT, post_timestamps=(), last_onchain_activity=LAST)
    assert social_silence(social, T)


def test_post_inside_window_is_active():
    social = SocialActivity(SQUAT, (LAST + 10 * 86400,), LAST)
    assert not social_silence(social, T)


def test_post_only_before_activity_is_silent():
    social = SocialActivity(SQUAT, (LAST - 86400,), LAST)
    assert social_silence(social, T)


def test_post_after_window_is_silent():
    social = SocialActivity(SQUAT, (LAST + 31 * 86400,), LAST)
    assert social_silence(social, T)


def test_post_at_window_edge_counts_as_active():
    social = SocialActivity(SQUAT, (LAST + 30 * 86400,), LAST)
    assert not social_silence(social, T)


def test_unsorted_posts_rejected():
    with pytest.raises(ValidationError):
        SocialActivity(SQUAT, (5, 3), LAST)


# --- labels / verdicts -----------------------------------------------------------


def test_external_malicious_labels():
    spam = ExternalLabel(source="scan", label=LabelCategory.SPAM)
    benign = ExternalLabel(source="scan", label=LabelCategory.NONE)
    assert external_malicious([benign, spam])
    assert not external_malicious([benign])
    assert not external_malicious([])


@pytest.mark.parametrize("true_count,expected", [(0, False), (1, False), (2, False), (3, False), (4, True), (5, True)])
def test_majority_rule_boundary(true_count, expected):
    criteria = {name: i < true_count for i, name in enumerate(CRITERIA_NAMES)}
    verdict = build_verdict(SQUAT, criteria)
    assert verdict.satisfied_count == true_count
    assert verdict.suspicious is expected


def test_monotonicity_flipping_criterion_true_never_unsuspicious():
    rng = random.Random(11)
    for _ in range(200):
        criteria = {name: rng.random() < 0.5 for name in CRITERIA_NAMES}
        base = build_verdict(SQUAT, criteria)
        for name in CRITERIA_NAMES:
            if not criteria[name]:
                flipped = dict(criteria)
                flipped[name] = True
                assert build_verdict(SQUAT, flipped).suspicious >= base.suspicious


def test_empty_series_criterion_false_but_others_can_carry():
    verdict = evaluate(
        SQUAT,
        floor_series({}),
        month_series({}),
        SocialActivity(SQUAT, (), LAST),
        [ExternalLabel(source="scan", label=LabelCategory.PHISHING)],
        True,
        T,
    )
    assert not verdict.criteria["price_collapse"]
    assert not verdict.criteria["transfer_collapse"]
    assert verdict.satisfied_count == 3  # silence + label + image
    assert not verdict.suspicious


def test_empty_price_series_with_four_other_criteria_is_suspicious():
    verdict = evaluate(
        SQUAT,
        floor_series({}),
        month_series({1: 100, 2: 5, 3: 4}),
        SocialActivity(SQUAT, (), LAST),
        [ExternalLabel(source="scan", label=LabelCategory.SPAM)],
        True,
        T,
    )
    assert not verdict.criteria["price_collapse"]
    assert verdict.satisfied_count == 4
    assert verdict.suspicious


def test_excluded_verdict_never_suspicious():
    verdict = excluded_verdict(SQUAT, PrefilterExclusion.DERIVATIVE_WHITELIST)
    assert not verdict.suspicious
    assert verdict.prefilter_exclusion is PrefilterExclusion.DERIVATIVE_WHITELIST


def test_verdict_json_round_trip():
    from nftsquat.fpfilter import SuspicionVerdict

    verdict = build_verdict(SQUAT, {name: True for name in CRITERIA_NAMES})
    assert SuspicionVerdict.from_json_dict(verdict.to_json_dict()) == verdict


# --- prefilter -------------------------------------------------------------------


def make_match(deploy_block=5000):
    cand = CandidateCollection(
        contract_address=SQUAT,
        name="Space Doodles",
        standard=Standard.ERC721,
        deploy_block=deploy_block,
        creator=addr(0xCC),
    )
    return MatchResult(
        candidate=cand,
        seed_name="Doodles",
        tactic=Tactic.COMBINATION_SQUATTING,
        matched_keyword="Doodles",
        match_kind=MatchKind.PARTIAL,
    )


def official_meta(deploy_block=1100):
    return CollectionMetadata(
        contract=addr(0xA2), name="Doodles", creator=addr(0xAA), royalty_bps=500, deploy_block=deploy_block
    )


def test_prefilter_whitelist():
    assert prefilter(make_match(), official_meta(), None, {SQUAT}) is PrefilterExclusion.DERIVATIVE_WHITELIST


def test_prefilter_deployed_before_official():
    assert (
        prefilter(make_match(deploy_block=100), official_meta(200), None, set())
        is PrefilterExclusion.DEPLOYED_BEFORE_OFFICIAL
    )


def test_prefilter_none_when_clean():
    assert prefilter(make_match(deploy_block=5000), official_meta(1100), None, set()) is None


def test_prefilter_missing_official_block_passes_with_warning(caplog):
    assert prefilter(make_match(), official_meta(deploy_block=None), None, set()) is None
    assert any("deploy block unavailable" in rec.message for rec in caplog.records)


# --- series builders --------------------------------------------------------------


def test_daily_floor_series_takes_min_per_day():
    from tests.test_analytics import trade  # shared fixture helper

    trades = [
        trade(1, SQUAT, price=5 * ETH, timestamp=1_650_000_000),
        trade(2, SQUAT, price=3 * ETH, timestamp=1_650_000_100),
        trade(3, SQUAT, price=9 * ETH, timestamp=1_650_086_400),  # next day
        trade(4, addr(0xB99), price=1, timestamp=1_650_000_000),  # other contract
    ]
    series = daily_floor_series(SQUAT, trades)
    assert [p for _, p in series.points] == [3 * ETH, 9 * ETH]


def test_monthly_transfer_series_counts_events():
    from tests.test_analytics import transfer_event

    june = 1_655_000_000  # 2022-06-12
    july = 1_657_000_000  # 2022-07-05
    transfers = [
        transfer_event(1, SQUAT, timestamp=june),
        transfer_event(2, SQUAT, timestamp=june + 100),
        transfer_event(3, SQUAT, timestamp=july),
    ]
    series = monthly_transfer_series(SQUAT, transfers)
    assert series.points == (((2022, 6), 2), ((2022, 7), 1))


def test_last_onchain_activity_spans_transfers_and_trades():
    from tests.test_analytics import trade, transfer_event

    transfers = [transfer_event(1, SQUAT, timestamp=100)]
    trades = [trade(2, SQUAT, price=1, timestamp=500)]
    assert last_onchain_activity(SQUAT, transfers, trades) == 500
    assert last_onchain_activity(addr(0xB77), transfers, trades) == 0
