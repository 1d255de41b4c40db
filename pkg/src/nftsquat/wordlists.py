"""Loading and querying the data tables that drive keyword generation.

All tables ship as plain UTF-8 text files ('#' starts a comment) and can be
swapped out per run; the packaged defaults live under nftsquat/data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ValidationError


def _iter_data_lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def parse_word_list(text: str) -> frozenset[str]:
    """One word per line, case-folded."""
    return frozenset(line.casefold() for line in _iter_data_lines(text))


def parse_homoglyphs(text: str) -> dict[str, tuple[str, ...]]:
    """Lines of `original lookalike...`; the relation is symmetrized."""
    table: dict[str, set[str]] = {}
    for line in _iter_data_lines(text):
        parts = line.split()
        if len(parts) < 2:
            raise ValidationError(f"homoglyph line needs an original and at least one lookalike: {line!r}")
        key, alts = parts[0], parts[1:]
        for alt in alts:
            if alt == key:
                continue
            table.setdefault(key, set()).add(alt)
            table.setdefault(alt, set()).add(key)
    return {k: tuple(sorted(v)) for k, v in sorted(table.items())}


def parse_homophones(text: str) -> frozenset[frozenset[str]]:
    """Lines of same-pronunciation word groups; stored as unordered pairs."""
    pairs: set[frozenset[str]] = set()
    for line in _iter_data_lines(text):
        words = [w.casefold() for w in line.split()]
        if len(words) < 2:
            raise ValidationError(f"homophone group needs at least two words: {line!r}")
        for i, a in enumerate(words):
            for b in words[i + 1 :]:
                if a != b:
                    pairs.add(frozenset((a, b)))
    return frozenset(pairs)


def parse_combinations(text: str) -> tuple[str, ...]:
    """Ordered list of words scammers bolt onto official names."""
    return tuple(_iter_data_lines(text))


@dataclass
class WordLists:
    english: frozenset[str]
    crypto: frozenset[str]
    homoglyph_table: dict[str, tuple[str, ...]]
    homophone_pairs: frozenset[frozenset[str]]
    combination_keywords: tuple[str, ...]
    # lazily filled by the matcher: (seed_name, tactic) -> frozenset of
    # normalized variants; keeps pair classification O(1) per lookup
    _variant_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def is_common(self, text: str) -> bool:
        folded = text.casefold()
        return folded in self.english or folded in self.crypto

    def homophone_partners(self, word: str) -> tuple[str, ...]:
        folded = word.casefold()
        out = {next(iter(pair - {folded})) for pair in self.homophone_pairs if folded in pair}
        return tuple(sorted(out))


def _read_path(path: str | Path) -> str:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"word list file not found: {path}")
    return path.read_text(encoding="utf-8")


def _read_builtin(name: str) -> str:
    return resources.files("nftsquat.data").joinpath(name).read_text(encoding="utf-8")


def load_word_lists(
    english: str | Path | None = None,
    crypto: str | Path | None = None,
    homoglyphs: str | Path | None = None,
    homophones: str | Path | None = None,
    combinations: str | Path | None = None,
) -> WordLists:
    """Build WordLists from files, falling back to the packaged defaults."""
    return WordLists(
        english=parse_word_list(_read_path(english) if english else _read_builtin("english.txt")),
        crypto=parse_word_list(_read_path(crypto) if crypto else _read_builtin("crypto.txt")),
        homoglyph_table=parse_homoglyphs(_read_path(homoglyphs) if homoglyphs else _read_builtin("homoglyphs.txt")),
        homophone_pairs=parse_homophones(_read_path(homophones) if homophones else _read_builtin("homophones.txt")),
        combination_keywords=parse_combinations(
            _read_path(combinations) if combinations else _read_builtin("combinations.txt")
        ),
    )
