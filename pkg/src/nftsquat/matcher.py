"""Candidate-name matching and tactic classification.

Matching is purely lexical: exact hits against the generated corpus first,
then substring (combination) hits.  Tactic attribution for a (seed,
candidate) pair follows a fixed priority so results never depend on corpus
ordering.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .records import (
    MUTATION_TACTICS,
    CandidateCollection,
    MatchKind,
    MatchResult,
    SeedCollection,
    SquatKeyword,
    Tactic,
    tactic_rank,
)
from .squatgen import mutate
from .wordlists import WordLists

log = logging.getLogger(__name__)

# Mutation tactics in classification order (case substitution is recovered
# from raw strings before these run, because normalization erases case).
_PAIR_TEST_ORDER = (
    Tactic.HOMOPHONE,
    Tactic.HOMOGLYPH,
    Tactic.MISSPELLING_SUBSTITUTION,
    Tactic.CHARACTER_INSERTION,
    Tactic.CHARACTER_OMISSION,
)


def normalize(name: str) -> str:
    """Case-fold and drop everything that is not a letter or digit."""
    return "".join(ch for ch in name.casefold() if ch.isalnum())


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (kept only to contrast with distance-based
    detection; the matcher itself never uses it)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class PairClassification:
    tactic: Tactic
    secondary_tactics: tuple[Tactic, ...] = ()


def _normalized_variants(lists: WordLists, seed_name: str, tactic: Tactic) -> frozenset[str]:
    key = (seed_name, tactic)
    cached = lists._variant_cache.get(key)
    if cached is None:
        cached = frozenset(normalize(kw.text) for kw in mutate(seed_name, tactic, lists))
        lists._variant_cache[key] = cached
    return cached


def _case_only_difference(a: str, b: str) -> bool:
    return a != b and a.casefold() == b.casefold()


def classify_pair(seed_name: str, candidate_name: str, lists: WordLists) -> PairClassification | None:
    """Attribute a squatting tactic to candidate_name relative to seed_name.

    Priority: raw equality, case-only difference, single-rule mutations
    (homophone, homoglyph, misspelling, insertion, omission), then proper
    substring containment.  Returns None when nothing applies.  Every
    lower-priority tactic that also explains the pair is reported as
    secondary.
    """
    norm_seed = normalize(seed_name)
    norm_cand = normalize(candidate_name)

    primary: Tactic | None = None
    if seed_name == candidate_name:
        primary = Tactic.IDENTICAL_NAME
    elif _case_only_difference(seed_name, candidate_name):
        primary = Tactic.CASE_SUBSTITUTION
    else:
        for tactic in _PAIR_TEST_ORDER:
            if norm_cand in _normalized_variants(lists, seed_name, tactic):
                primary = tactic
                break
        else:
            if norm_seed and norm_cand and norm_seed != norm_cand and norm_seed in norm_cand:
                primary = Tactic.COMBINATION_SQUATTING
    if primary is None:
        return None

    secondary: list[Tactic] = []
    for tactic in _PAIR_TEST_ORDER:
        if tactic_rank(tactic) <= tactic_rank(primary):
            continue
        if norm_cand in _normalized_variants(lists, seed_name, tactic):
            secondary.append(tactic)
    if (
        primary is not Tactic.COMBINATION_SQUATTING
        and norm_seed
        and norm_cand
        and norm_seed != norm_cand
        and norm_seed in norm_cand
    ):
        secondary.append(Tactic.COMBINATION_SQUATTING)
    return PairClassification(primary, tuple(secondary))


@dataclass
class _SeedEvidence:
    exact_keywords: list[SquatKeyword]
    substring_keywords: list[SquatKeyword]
    seed_substring: bool = False


def _fallback_tactic(seed_name: str, candidate_name: str, keywords: list[SquatKeyword]) -> Tactic:
    """Pick a tactic when classification found nothing but the corpus hit.

    Happens when the candidate differs from the seed only by special
    characters: the colliding keywords are identical/case variants, yet the
    raw preconditions for those tactics fail.  Added characters are what
    combination squatting describes, so that is the attribution.
    """
    tactics = sorted({kw.tactic for kw in keywords}, key=tactic_rank)
    for tactic in tactics:
        if tactic is Tactic.IDENTICAL_NAME:
            if candidate_name == seed_name:
                return tactic
        elif tactic is Tactic.CASE_SUBSTITUTION:
            if _case_only_difference(seed_name, candidate_name):
                return tactic
        else:
            return tactic
    return Tactic.COMBINATION_SQUATTING


def match_all(
    candidates: list[CandidateCollection],
    corpus: list[SquatKeyword],
    seeds: list[SeedCollection],
    lists: WordLists,
) -> list[MatchResult]:
    """Match every candidate against the corpus.

    Emits at most one MatchResult per (candidate, seed) pair; when a
    candidate matches several seeds the results are ordered best target
    first (see primary_matches).  Candidates whose normalized name is empty
    are skipped with a diagnostic.

    Matching is entirely corpus-driven: substring (combination) hits run
    against the corpus's identical-name keywords, so a seed whose keywords
    were all suppressed (or an empty corpus) yields no matches.
    """
    seed_by_name = {s.name: s for s in seeds}

    exact_index: dict[str, list[SquatKeyword]] = {}
    mutation_keywords: list[tuple[str, SquatKeyword]] = []
    norm_seed_names: dict[str, str] = {}
    for kw in corpus:
        if kw.seed_name not in seed_by_name:
            continue
        norm_kw = normalize(kw.text)
        if not norm_kw:
            continue
        exact_index.setdefault(norm_kw, []).append(kw)
        if kw.tactic in MUTATION_TACTICS:
            mutation_keywords.append((norm_kw, kw))
        elif kw.tactic is Tactic.IDENTICAL_NAME:
            norm_seed_names[kw.seed_name] = norm_kw

    results: list[MatchResult] = []
    for cand in candidates:
        norm_cand = normalize(cand.name)
        if not norm_cand:
            log.warning("candidate %s name %r normalizes to empty; skipped", cand.contract_address, cand.name)
            continue

        evidence: dict[str, _SeedEvidence] = {}

        def seed_evidence(seed_name: str) -> _SeedEvidence:
            if seed_name not in evidence:
                evidence[seed_name] = _SeedEvidence(exact_keywords=[], substring_keywords=[])
            return evidence[seed_name]

        for kw in exact_index.get(norm_cand, []):
            seed_evidence(kw.seed_name).exact_keywords.append(kw)
        for seed_name, norm_seed in norm_seed_names.items():
            if norm_seed and norm_seed != norm_cand and norm_seed in norm_cand:
                seed_evidence(seed_name).seed_substring = True
        for norm_kw, kw in mutation_keywords:
            if norm_kw != norm_cand and norm_kw in norm_cand:
                seed_evidence(kw.seed_name).substring_keywords.append(kw)

        matched_seeds = sorted(evidence, key=lambda name: (seed_by_name[name].rank, name))
        for seed_name in matched_seeds:
            ev = evidence[seed_name]
            cls = classify_pair(seed_name, cand.name, lists)
            secondary: list[Tactic] = list(cls.secondary_tactics) if cls else []
            if ev.exact_keywords:
                tactic = cls.tactic if cls else _fallback_tactic(seed_name, cand.name, ev.exact_keywords)
                kind = MatchKind.PARTIAL if tactic is Tactic.COMBINATION_SQUATTING else MatchKind.EXACT
                keyword = min(ev.exact_keywords, key=lambda k: (tactic_rank(k.tactic), k.text)).text
            elif ev.seed_substring:
                tactic = cls.tactic if cls else Tactic.COMBINATION_SQUATTING
                kind = MatchKind.PARTIAL
                keyword = seed_name
            else:
                # only a mutated keyword appears inside the candidate name:
                # a combination of a mutation, so the mutation goes secondary
                tactic = cls.tactic if cls else Tactic.COMBINATION_SQUATTING
                kind = MatchKind.PARTIAL
                keyword = min(ev.substring_keywords, key=lambda k: (tactic_rank(k.tactic), k.text)).text
                secondary.extend(kw.tactic for kw in ev.substring_keywords)
            ordered_secondary = tuple(
                sorted({t for t in secondary if t is not tactic}, key=tactic_rank)
            )
            results.append(
                MatchResult(
                    candidate=cand,
                    seed_name=seed_name,
                    tactic=tactic,
                    matched_keyword=keyword,
                    match_kind=kind,
                    secondary_tactics=ordered_secondary,
                )
            )
    return results


def primary_matches(results: list[MatchResult], seeds: list[SeedCollection]) -> list[MatchResult]:
    """One MatchResult per candidate: the seed with the best market-cap rank."""
    rank_of = {s.name: s.rank for s in seeds}
    best: dict[str, MatchResult] = {}
    for res in results:
        addr = res.candidate.contract_address
        cur = best.get(addr)
        if cur is None or rank_of.get(res.seed_name, 1 << 30) < rank_of.get(cur.seed_name, 1 << 30):
            best[addr] = res
    return [best[a] for a in sorted(best)]
