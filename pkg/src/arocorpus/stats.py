"""Corpus statistics and the per-source train/dev/test split."""

from __future__ import annotations

import math
import random
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Iterable, Iterator, Sequence

from .corpus import SentencePair, SourceManifest, nfc

# Maximal runs of letters: hyphens, apostrophes, digits and punctuation all split words.
WORD_RE = re.compile(r"[^\W\d_]+")


def iter_words(text: str) -> Iterator[str]:
    for m in WORD_RE.finditer(nfc(text)):
        yield m.group()


@dataclass(frozen=True)
class CorpusStats:
    words: int
    unique_words: int
    type_token_ratio: float
    words_per_sentence: float

    def as_dict(self) -> dict:
        return {
            "words": self.words,
            "unique_words": self.unique_words,
            "type_token_ratio": self.type_token_ratio,
            "words_per_sentence": self.words_per_sentence,
        }


def corpus_stats(texts: Sequence[str]) -> CorpusStats:
    """Word counts over `texts`, each element counted as one sentence."""
    if not texts:
        raise ValueError("no texts given")
    n_words = 0
    types = set()
    for text in texts:
        for word in iter_words(text):
            n_words += 1
            types.add(word.lower())
    if n_words == 0:
        raise ValueError("texts contain no words")
    return CorpusStats(
        words=n_words,
        unique_words=len(types),
        type_token_ratio=len(types) / n_words,
        words_per_sentence=n_words / len(texts),
    )


@dataclass(frozen=True)
class SplitPlan:
    manifest: SourceManifest = field(default_factory=SourceManifest)
    ratio: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie strictly between 0 and 1")


def train_count(n: int, ratio: float) -> int:
    # Decimal keeps 0.95 * 20 from landing on 18.999...
    return math.floor(Decimal(repr(ratio)) * n)


def stratified_split(corpus: Iterable[SentencePair], plan: SplitPlan) -> list[SentencePair]:
    """Assign train/dev/test per source; the output keeps the input order."""
    corpus = list(corpus)
    by_source: dict[str, list[int]] = defaultdict(list)
    for idx, pair in enumerate(corpus):
        by_source[pair.source].append(idx)

    assignment: dict[int, str] = {}
    for source, indices in by_source.items():
        try:
            role = plan.manifest.role_of(source)
        except KeyError:
            raise ValueError(f"source {source!r} is not in the manifest") from None
        if role == "dev_only":
            assignment.update((i, "dev") for i in indices)
        elif role == "test_only":
            assignment.update((i, "test") for i in indices)
        else:
            order = list(indices)
            random.Random(f"{plan.seed}\x1f{source}").shuffle(order)
            k = train_count(len(order), plan.ratio)
            assignment.update((i, "train") for i in order[:k])
            assignment.update((i, "dev") for i in order[k:])
    return [replace(pair, split=assignment[i]) for i, pair in enumerate(corpus)]
