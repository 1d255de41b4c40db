"""nftsquat: detect cybersquatting NFT collections from snapshot on-chain data.

The pipeline generates a squatting-keyword corpus from official collection
names, matches deployed collections against it, filters false positives with
a five-criterion majority rule, groups confirmed squats into scam campaigns,
and quantifies victims and scammer profits.
"""

from .imagehash import GrayImage, dhash, hamming, near_duplicates
from .matcher import classify_pair, levenshtein, match_all, normalize
from .records import (
    CandidateCollection,
    CollectionMetadata,
    MatchResult,
    SeedCollection,
    SquatKeyword,
    Tactic,
    TradeRecord,
    TransferEvent,
)
from .squatgen import generate_corpus, mutate, preprocess_name, restore_name
from .wordlists import WordLists, load_word_lists

__version__ = "0.1.0"

__all__ = [
    "CandidateCollection",
    "CollectionMetadata",
    "GrayImage",
    "MatchResult",
    "SeedCollection",
    "SquatKeyword",
    "Tactic",
    "TradeRecord",
    "TransferEvent",
    "WordLists",
    "classify_pair",
    "dhash",
    "generate_corpus",
    "hamming",
    "levenshtein",
    "load_word_lists",
    "match_all",
    "mutate",
    "near_duplicates",
    "normalize",
    "preprocess_name",
    "restore_name",
    "__version__",
]
