"""Squatting keyword generation.

Mirrors how domain-permutation engines fuzz a brand name: one rule
application per variant, applied to a cleaned-up form of the official name,
followed by common-word suppression so frequently-used names do not flood
the corpus.
"""

from __future__ import annotations

import logging

from .errors import ValidationError
from .records import (
    MUTATION_TACTICS,
    SeedCollection,
    SquatKeyword,
    Tactic,
    tactic_rank,
)
from .wordlists import WordLists

log = logging.getLogger(__name__)

ALPHABET = "abcdefghijklmnopqrstuvwxyz"
VOWELS = "aeiou"

# QWERTY neighbours for the optional adjacent-key rule (off by default).
QWERTY_ADJACENT = {
    "q": "wa", "w": "qes", "e": "wrd", "r": "etf", "t": "ryg", "y": "tuh",
    "u": "yij", "i": "uok", "o": "ipl", "p": "o",
    "a": "qsz", "s": "awedxz", "d": "serfcx", "f": "drtgvc", "g": "ftyhbv",
    "h": "gyujnb", "j": "huikmn", "k": "jiolm", "l": "kop",
    "z": "asx", "x": "zsdc", "c": "xdfv", "v": "cfgb", "b": "vghn",
    "n": "bhjm", "m": "njk",
}


def preprocess_name(name: str) -> str:
    """Clean a collection name into a dotted, domain-like string.

    Everything outside [A-Za-z0-9 ] becomes a space, space runs collapse,
    and the trimmed result uses '.' as the separator.
    """
    cleaned = "".join(ch if ch.isascii() and (ch.isalnum() or ch == " ") else " " for ch in name)
    return ".".join(cleaned.split())


def restore_name(name: str) -> str:
    """Invert preprocess_name's separator choice (dots back to spaces)."""
    return name.replace(".", " ")


def _flip_case(ch: str) -> str:
    return ch.lower() if ch.isupper() else ch.upper()


def _transfer_case(original: str, replacement: str) -> str:
    if original.isupper():
        return replacement.upper()
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def _insertions(name: str):
    for i in range(len(name) + 1):
        for ch in ALPHABET:
            yield name[:i] + ch + name[i:], f"inserted {ch!r} at {i}"


def _omissions(name: str):
    for i, ch in enumerate(name):
        yield name[:i] + name[i + 1 :], f"removed {ch!r} at {i}"


def _case_flips(name: str):
    for i, ch in enumerate(name):
        flipped = _flip_case(ch)
        if flipped != ch:
            yield name[:i] + flipped + name[i + 1 :], f"case-flipped {ch!r} at {i}"


def _vowel_swaps(name: str):
    for i, ch in enumerate(name):
        if ch.lower() in VOWELS:
            for vowel in VOWELS:
                if vowel != ch.lower():
                    repl = vowel.upper() if ch.isupper() else vowel
                    yield name[:i] + repl + name[i + 1 :], f"vowel {ch!r} to {repl!r} at {i}"


def _homoglyph_swaps(name: str, table: dict[str, tuple[str, ...]]):
    for key in table:
        start = 0
        while True:
            i = name.find(key, start)
            if i < 0:
                break
            for alt in table[key]:
                yield name[:i] + alt + name[i + len(key) :], f"homoglyph {key!r} to {alt!r} at {i}"
            start = i + 1


def _homophone_swaps(name: str, lists: WordLists):
    words = name.split(" ")
    for wi, word in enumerate(words):
        for partner in lists.homophone_partners(word):
            replacement = _transfer_case(word, partner)
            swapped = words[:wi] + [replacement] + words[wi + 1 :]
            yield " ".join(swapped), f"homophone {word!r} to {replacement!r}"


def _adjacent_key_swaps(name: str):
    for i, ch in enumerate(name):
        for near in QWERTY_ADJACENT.get(ch.lower(), ""):
            repl = near.upper() if ch.isupper() else near
            yield name[:i] + repl + name[i + 1 :], f"adjacent-key {ch!r} to {repl!r} at {i}"


def mutate(name: str, tactic: Tactic, lists: WordLists) -> list[SquatKeyword]:
    """All variants of *name* reachable by one application of *tactic*.

    Identical-name and combination keywords are not mutations; ask
    generate_corpus for those.
    """
    if tactic is Tactic.CHARACTER_INSERTION:
        produced = _insertions(name)
    elif tactic is Tactic.CHARACTER_OMISSION:
        produced = _omissions(name)
    elif tactic is Tactic.CASE_SUBSTITUTION:
        produced = _case_flips(name)
    elif tactic is Tactic.MISSPELLING_SUBSTITUTION:
        produced = _vowel_swaps(name)
    elif tactic is Tactic.HOMOGLYPH:
        produced = _homoglyph_swaps(name, lists.homoglyph_table)
    elif tactic is Tactic.HOMOPHONE:
        produced = _homophone_swaps(name, lists)
    else:
        raise ValidationError(f"{tactic.value} is not a mutation tactic")

    out: list[SquatKeyword] = []
    seen: set[str] = set()
    for text, detail in produced:
        text = text.strip()
        if not text or text == name or text in seen:
            continue
        seen.add(text)
        out.append(SquatKeyword(text=text, tactic=tactic, seed_name=name, rule_detail=detail))
    return out


def _combination_variants(name: str, lists: WordLists):
    for kw in lists.combination_keywords:
        yield f"{kw} {name}", f"prepended {kw!r} with space"
        yield f"{kw}{name}", f"prepended {kw!r}"
        yield f"{name} {kw}", f"appended {kw!r} with space"
        yield f"{name}{kw}", f"appended {kw!r}"


def generate_corpus(
    seeds: list[SeedCollection],
    lists: WordLists,
    adjacent_key: bool = False,
) -> list[SquatKeyword]:
    """Build the full keyword corpus for a deduplicated seed list.

    Per seed: the identical name, every single-rule mutation and every
    combination variant, minus keywords that case-fold to a common word.
    Output is sorted by (seed rank, tactic, text) and deduplicated on
    (text, seed_name); re-runs over the same inputs are byte-identical.
    """
    rank_of = {seed.name: seed.rank for seed in seeds}
    raw: list[SquatKeyword] = []
    for seed in seeds:
        pre = preprocess_name(seed.name)
        if not pre:
            log.warning("seed %r reduced to empty by pre-processing; skipped", seed.name)
            continue
        clean = restore_name(pre)
        keywords = [
            SquatKeyword(text=clean, tactic=Tactic.IDENTICAL_NAME, seed_name=seed.name, rule_detail="identical")
        ]
        for tactic in MUTATION_TACTICS:
            keywords.extend(mutate(clean, tactic, lists))
        if adjacent_key:
            for text, detail in _adjacent_key_swaps(clean):
                text = text.strip()
                if text and text != clean:
                    keywords.append(
                        SquatKeyword(
                            text=text,
                            tactic=Tactic.MISSPELLING_SUBSTITUTION,
                            seed_name=seed.name,
                            rule_detail=detail,
                        )
                    )
        for text, detail in _combination_variants(clean, lists):
            keywords.append(
                SquatKeyword(text=text, tactic=Tactic.COMBINATION_SQUATTING, seed_name=seed.name, rule_detail=detail)
            )
        for kw in keywords:
            if lists.is_common(kw.text):
                continue
            if kw.tactic is not Tactic.IDENTICAL_NAME and kw.text == seed.name:
                # a mutation of the cleaned form can collide with the raw
                # seed name when the raw name carried special characters
                continue
            if kw.seed_name != seed.name:
                kw = SquatKeyword(text=kw.text, tactic=kw.tactic, seed_name=seed.name, rule_detail=kw.rule_detail)
            raw.append(kw)

    raw.sort(key=lambda k: (rank_of[k.seed_name], tactic_rank(k.tactic), k.text))
    out: list[SquatKeyword] = []
    seen: set[tuple[str, str]] = set()
    for kw in raw:
        key = (kw.text, kw.seed_name)
        if key not in seen:
            seen.add(key)
            out.append(kw)
    return out
