import random

import pytest

from nftsquat.matcher import classify_pair, levenshtein, match_all, normalize, primary_matches
from nftsquat.records import CandidateCollection, MatchKind, Standard, Tactic, tactic_rank
from nftsquat.squatgen import generate_corpus
from tests.conftest import addr


def candidate(n, name, creator=0xCC01, block=5000):
    return CandidateCollection(
        contract_address=addr(0xB000 + n),
        name=name,
        standard=Standard.ERC721,
        deploy_block=block,
        creator=addr(creator),
    )


# --- normalize ----------------------------------------------------------------


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("The Lives of Asuna", "thelivesofasuna"),
        ("azuki", "azuki"),
        ("M!F#E$R", "mfer"),
        ("AZUKI  2", "azuki2"),
        ("!!!", ""),
    ],
)
def test_normalize(raw, expected):
    assert normalize(raw) == expected


# --- levenshtein ----------------------------------------------------------------


@pytest.mark.parametrize(
    "a,b,expected",
    [
        ("Azuki", "Azuki NFT", 4),
        ("CryptoCars", "CryptoDads", 2),
        ("abc", "abc", 0),
        ("", "abc", 3),
        ("kitten", "sitting", 3),
    ],
)
def test_levenshtein_values(a, b, expected):
    assert levenshtein(a, b) == expected


def test_levenshtein_metric_axioms():
    rng = random.Random(7)
    alphabet = "abcxyz "
    words = ["".join(rng.choice(alphabet) for _ in range(rng.randint(0, 8))) for _ in range(60)]
    for _ in range(300):
        a, b, c = rng.choice(words), rng.choice(words), rng.choice(words)
        assert levenshtein(a, a) == 0
        assert levenshtein(a, b) == levenshtein(b, a)
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)
        if a != b:
            assert levenshtein(a, b) > 0


# --- classify_pair ----------------------------------------------------------------


PAPER_PAIRS = [
    ("Azuki", "Azuki2", Tactic.COMBINATION_SQUATTING),
    ("Azuki", "Azuki NFT", Tactic.COMBINATION_SQUATTING),
    ("Azuki", "Ahzuki", Tactic.CHARACTER_INSERTION),
    ("Moonbirds", "Moonbhirds", Tactic.CHARACTER_INSERTION),
    ("Doodles", "Doodle", Tactic.CHARACTER_OMISSION),
    ("Milady Maker", "MIlady Maker", Tactic.CASE_SUBSTITUTION),
    ("Milady Maker", "Malady Maker", Tactic.MISSPELLING_SUBSTITUTION),
    ("Azuki", "AZUKl", Tactic.HOMOGLYPH),
    ("Bored Ape Yacht Club", "Board Ape Yacht Club", Tactic.HOMOPHONE),
    ("Lives of Asuna", "The Lives of Asuna", Tactic.COMBINATION_SQUATTING),
    ("mfer", "mfer chicks", Tactic.COMBINATION_SQUATTING),
    ("Azuki", "Azuki", Tactic.IDENTICAL_NAME),
]


@pytest.mark.parametrize("seed,cand,expected", PAPER_PAIRS)
def test_classify_pair_regressions(seed, cand, expected, lists):
    cls = classify_pair(seed, cand, lists)
    assert cls is not None and cls.tactic is expected


def test_classify_prior_work_contrast(lists):
    # distance-2 lookalike that is NOT a mutation: must stay unmatched
    assert classify_pair("CryptoDads", "CryptoCars", lists) is None
    # the admitted miss: y->r substitution is outside the mutation rules
    assert classify_pair("y00ts Yacht Club", "r00ts Yacht Club", lists) is None
    # while the distance-4 combination IS caught
    cls = classify_pair("Azuki", "Azuki NFT", lists)
    assert cls is not None and cls.tactic is Tactic.COMBINATION_SQUATTING


def test_classify_never_combination_for_shorter_candidate(lists):
    rng = random.Random(99)
    alphabet = "abcdefghijklmnopqrstuvwxyz 0123456789"
    for _ in range(200):
        seed = "".join(rng.choice(alphabet) for _ in range(rng.randint(3, 15))).strip() or "seed"
        cand = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, len(normalize(seed)) or 1))).strip() or "x"
        cls = classify_pair(seed, cand, lists)
        if cls is not None and len(normalize(cand)) < len(normalize(seed)):
            assert cls.tactic is not Tactic.COMBINATION_SQUATTING


def test_classify_secondary_tactics_ordered(lists):
    # "Azukis" is an insertion, and the seed is also a proper substring
    cls = classify_pair("Azuki", "Azukis", lists)
    assert cls.tactic is Tactic.CHARACTER_INSERTION
    assert Tactic.COMBINATION_SQUATTING in cls.secondary_tactics
    ranks = [tactic_rank(t) for t in cls.secondary_tactics]
    assert ranks == sorted(ranks)


def test_classify_is_corpus_order_independent(lists):
    # classify_pair takes no corpus at all; same inputs, same answer
    first = classify_pair("Doodles", "Doodle", lists)
    second = classify_pair("Doodles", "Doodle", lists)
    assert first == second


# --- match_all ----------------------------------------------------------------


@pytest.fixture(scope="module")
def corpus(seeds, lists):
    return generate_corpus(seeds, lists)


def test_match_exact_identical(seeds, corpus, lists):
    results = match_all([candidate(1, "Azuki")], corpus, seeds, lists)
    assert len(results) == 1
    res = results[0]
    assert res.tactic is Tactic.IDENTICAL_NAME
    assert res.match_kind is MatchKind.EXACT
    assert res.seed_name == "Azuki"


def test_match_partial_combination(seeds, corpus, lists):
    results = match_all([candidate(2, "Azuki NFT")], corpus, seeds, lists)
    assert len(results) == 1
    res = results[0]
    assert res.tactic is Tactic.COMBINATION_SQUATTING
    assert res.match_kind is MatchKind.PARTIAL


def test_match_no_result_for_unrelated(seeds, corpus, lists):
    assert match_all([candidate(3, "CryptoCars")], corpus, seeds, lists) == []


def test_match_exact_mutation_keyword(seeds, corpus, lists):
    results = match_all([candidate(4, "Doodle")], corpus, seeds, lists)
    assert len(results) == 1
    assert results[0].tactic is Tactic.CHARACTER_OMISSION
    assert results[0].match_kind is MatchKind.EXACT


def test_match_mutation_keyword_substring(seeds, corpus, lists):
    # contains the omission keyword "Doodle" but not the seed "Doodles"
    results = match_all([candidate(5, "Doodle World")], corpus, seeds, lists)
    assert len(results) == 1
    res = results[0]
    assert res.tactic is Tactic.COMBINATION_SQUATTING
    assert res.match_kind is MatchKind.PARTIAL
    assert Tactic.CHARACTER_OMISSION in res.secondary_tactics


def test_match_empty_name_skipped(seeds, corpus, lists, caplog):
    assert match_all([candidate(6, "!!!")], corpus, seeds, lists) == []
    assert any("normalizes to empty" in rec.message for rec in caplog.records)


def test_match_special_char_padding_is_combination(seeds, corpus, lists):
    # normalizes equal to the identical keyword, but raw differs beyond case
    results = match_all([candidate(7, "Azuki!")], corpus, seeds, lists)
    assert len(results) == 1
    res = results[0]
    assert res.tactic is Tactic.COMBINATION_SQUATTING
    assert res.match_kind is MatchKind.PARTIAL


def test_match_case_variant_is_exact_case_substitution(seeds, corpus, lists):
    results = match_all([candidate(8, "AZUKI")], corpus, seeds, lists)
    assert len(results) == 1
    res = results[0]
    assert res.tactic is Tactic.CASE_SUBSTITUTION
    assert res.match_kind is MatchKind.EXACT


def test_multi_seed_match_keeps_best_rank_first(seeds, corpus, lists):
    # matches both "Azuki" (rank 1) and "Doodles" (rank 2)
    results = match_all([candidate(9, "Azuki Doodles")], corpus, seeds, lists)
    assert [r.seed_name for r in results] == ["Azuki", "Doodles"]
    primary = primary_matches(results, seeds)
    assert len(primary) == 1 and primary[0].seed_name == "Azuki"


def test_match_with_empty_corpus(seeds, lists):
    assert match_all([candidate(10, "Azuki")], [], seeds, lists) == []
