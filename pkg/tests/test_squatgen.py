import random

import pytest

from nftsquat.errors import ValidationError
from nftsquat.records import SeedCollection, Tactic
from nftsquat.squatgen import generate_corpus, mutate, preprocess_name, restore_name
from tests.conftest import addr


def seed(rank, name, cap=10**21):
    return SeedCollection(rank=rank, name=name, contract_address=addr(0xF000 + rank), deploy_block=100, market_cap_wei=cap)


# --- preprocess / restore ---------------------------------------------------


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("Murakami.Flowers", "Murakami.Flowers"),
        ("Azuki", "Azuki"),
        ("Lives of Asuna", "Lives.of.Asuna"),
        ("  padded   name ", "padded.name"),
        ("émoji☂name", "moji.name"),
    ],
)
def test_preprocess_name(raw, expected):
    assert preprocess_name(raw) == expected


def test_restore_round_trips_plain_names():
    for name in ["Azuki", "Lives of Asuna", "Bored Ape Yacht Club"]:
        assert restore_name(preprocess_name(name)) == name


def test_preprocess_empty_for_special_only():
    assert preprocess_name("!!!") == ""


# --- mutate -----------------------------------------------------------------


def texts(keywords):
    return {k.text for k in keywords}


def test_insertion_contains_paper_example(lists):
    assert "Moonbhirds" in texts(mutate("Moonbirds", Tactic.CHARACTER_INSERTION, lists))


def test_insertion_covers_all_boundary_positions(lists):
    got = texts(mutate("ab", Tactic.CHARACTER_INSERTION, lists))
    assert {"xab", "axb", "abx"} <= got
    # 26 letters at 3 positions, minus duplicates like 'aab' arising twice
    assert got == {f"{'ab'[:i]}{ch}{'ab'[i:]}" for i in range(3) for ch in "abcdefghijklmnopqrstuvwxyz"}


def test_omission_exhaustive_two_chars(lists):
    assert texts(mutate("ab", Tactic.CHARACTER_OMISSION, lists)) == {"a", "b"}


def test_omission_includes_trailing_s_removal(lists):
    assert "Doodle" in texts(mutate("Doodles", Tactic.CHARACTER_OMISSION, lists))


def test_omission_of_single_char_name_is_empty(lists):
    assert mutate("X", Tactic.CHARACTER_OMISSION, lists) == []


def test_case_substitution_flips_single_letters(lists):
    got = texts(mutate("Milady Maker", Tactic.CASE_SUBSTITUTION, lists))
    assert "MIlady Maker" in got
    assert "milady Maker" in got
    assert all(v != "Milady Maker" for v in got)


def test_misspelling_replaces_vowels_case_preserved(lists):
    got = texts(mutate("Milady Maker", Tactic.MISSPELLING_SUBSTITUTION, lists))
    assert "Malady Maker" in got
    upper = texts(mutate("AZUKI", Tactic.MISSPELLING_SUBSTITUTION, lists))
    assert "AZUKE" in upper  # uppercase vowel stays uppercase


def test_homoglyph_swaps(lists):
    got = texts(mutate("Azuki", Tactic.HOMOGLYPH, lists))
    assert "Azukl" in got and "Azuk1" in got


def test_homophone_swaps_whole_words(lists):
    got = texts(mutate("Bored Ape Yacht Club", Tactic.HOMOPHONE, lists))
    assert got == {"Board Ape Yacht Club"}


def test_mutate_rejects_non_mutation_tactics(lists):
    with pytest.raises(ValidationError):
        mutate("Azuki", Tactic.COMBINATION_SQUATTING, lists)
    with pytest.raises(ValidationError):
        mutate("Azuki", Tactic.IDENTICAL_NAME, lists)


def test_insertion_omission_duality(lists):
    rng = random.Random(20240811)
    alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 "
    for _ in range(50):
        name = "".join(rng.choice(alphabet) for _ in range(rng.randint(3, 12))).strip() or "pad"
        for kw in mutate(name, Tactic.CHARACTER_INSERTION, lists):
            back = texts(mutate(kw.text, Tactic.CHARACTER_OMISSION, lists))
            assert name in back, f"{name!r} not recoverable from insertion variant {kw.text!r}"


# --- generate_corpus --------------------------------------------------------


def test_corpus_contains_identical_and_examples(lists):
    corpus = generate_corpus([seed(1, "Moonbirds"), seed(2, "Doodles")], lists)
    entries = {(k.text, k.tactic) for k in corpus}
    assert ("Moonbirds", Tactic.IDENTICAL_NAME) in entries
    assert ("Moonbhirds", Tactic.CHARACTER_INSERTION) in entries
    assert ("Doodle", Tactic.CHARACTER_OMISSION) in entries


def test_corpus_combination_variants(lists):
    corpus = generate_corpus([seed(1, "Azuki")], lists)
    combos = {k.text for k in corpus if k.tactic is Tactic.COMBINATION_SQUATTING}
    assert {"Azuki NFT", "AzukiNFT", "NFT Azuki", "NFTAzuki", "the Azuki", "Azuki collection"} <= combos


def test_corpus_suppresses_common_words(lists):
    # trailing-s omission of "Metaverses" is the common word "metaverse"
    corpus = generate_corpus([seed(1, "Metaverses")], lists)
    assert all(k.text.casefold() != "metaverse" for k in corpus)
    # and "Metaverse HQ" never yields a bare "Metaverse" keyword at all
    corpus = generate_corpus([seed(1, "Metaverse HQ")], lists)
    assert all(k.text != "Metaverse" for k in corpus)


def test_corpus_suppression_soundness(lists):
    corpus = generate_corpus([seed(1, "Coins United"), seed(2, "Doodles")], lists)
    for kw in corpus:
        assert not lists.is_common(kw.text), kw


def test_corpus_empty_seed_list(lists):
    assert generate_corpus([], lists) == []


def test_corpus_skips_seed_that_preprocesses_to_empty(lists, caplog):
    corpus = generate_corpus([seed(1, "☂☂"), seed(2, "Azuki")], lists)
    assert all(k.seed_name == "Azuki" for k in corpus)
    assert any("pre-processing" in rec.message for rec in caplog.records)


def test_corpus_deterministic_and_sorted(lists):
    seeds = [seed(2, "Doodles"), seed(1, "Azuki")]
    first = generate_corpus(seeds, lists)
    second = generate_corpus(list(reversed(seeds)), lists)
    assert [k.to_json_dict() for k in first] == [k.to_json_dict() for k in second]
    # dedup on (text, seed_name)
    assert len({(k.text, k.seed_name) for k in first}) == len(first)


def test_corpus_adjacent_key_rule_off_by_default(lists):
    base = generate_corpus([seed(1, "Azuki")], lists)
    assert all("adjacent-key" not in k.rule_detail for k in base)
    extended = generate_corpus([seed(1, "Azuki")], lists, adjacent_key=True)
    adj = [k for k in extended if "adjacent-key" in k.rule_detail]
    assert adj and all(k.tactic is Tactic.MISSPELLING_SUBSTITUTION for k in adj)
