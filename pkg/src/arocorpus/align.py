"""Sentence splitting and the pairing procedures built on top of it."""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .corpus import DocumentPair, SentencePair
from .embeddings import Provider, ProviderConfig, as_provider, embed_batch, similarity_matrix

OPENERS = "«\"“„‘'([¿¡"
CLOSERS = "»\"”’')]"

MATCH, SKIP_SRC, SKIP_TGT = 0, 1, 2


@dataclass(frozen=True)
class SplitterRules:
    terminators: frozenset[str] = frozenset(".!?…")
    abbreviations: frozenset[str] = frozenset()
    require_space: bool = True

    def __post_init__(self):
        if not self.terminators:
            raise ValueError("terminator set must not be empty")


def _boundary_regex(rules: SplitterRules) -> re.Pattern:
    terms = "".join(re.escape(t) for t in sorted(rules.terminators))
    closers = re.escape(CLOSERS)
    gap = r"\s+" if rules.require_space else r"\s*"
    return re.compile(rf"[{terms}]+[{closers}]*({gap})")


def _ends_with_abbreviation(chunk: str, abbreviations: frozenset[str]) -> bool:
    if not abbreviations:
        return False
    words = chunk.split()
    if not words:
        return False
    last = words[-1].rstrip(CLOSERS).rstrip(".")
    wanted = {a.rstrip(".").lower() for a in abbreviations}
    return last.lower() in wanted


def split_sentences(text: str, rules: SplitterRules = SplitterRules()) -> list[str]:
    """Split at a terminator followed by whitespace and a capital or an opening quote."""
    sentences = []
    start = 0
    for m in _boundary_regex(rules).finditer(text):
        after = m.end()
        if after >= len(text):
            continue
        nxt = text[after]
        if not (nxt.isupper() or nxt in OPENERS):
            continue
        piece = text[start : m.start(1)]
        if _ends_with_abbreviation(piece, rules.abbreviations):
            continue
        if piece.strip():
            sentences.append(piece.strip())
        start = after
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


@dataclass(frozen=True)
class AlignConfig:
    min_sim: float = 0.5
    match_penalty: float = 0.3

    def __post_init__(self):
        if not -1.0 <= self.min_sim <= 1.0:
            raise ValueError("min_sim must lie in [-1, 1]")
        if self.match_penalty < 0:
            raise ValueError("match_penalty must be >= 0")


@dataclass
class AlignmentPath:
    matches: list[tuple[int, int]]
    skipped_src: list[int]
    skipped_tgt: list[int]
    score: float

    def report(self) -> dict:
        return {
            "matches": len(self.matches),
            "skipped_src": len(self.skipped_src),
            "skipped_tgt": len(self.skipped_tgt),
            "score": self.score,
        }


def align_dp(sim, cfg: AlignConfig = AlignConfig()) -> AlignmentPath:
    """Best monotone one-to-one alignment under a similarity matrix.

    Maximises the sum of (sim - penalty) over matched pairs; pairs below
    ``min_sim`` cannot match and skips are free. Rows of the score table are
    built with a running maximum, so only two float64 rows and one byte of
    backtrace per cell are kept.
    """
    sim = np.asarray(sim)
    if sim.ndim != 2:
        raise ValueError("similarity matrix must be 2-dimensional")
    n, m = sim.shape
    if n == 0 or m == 0:
        return AlignmentPath([], list(range(n)), list(range(m)), 0.0)
    if not np.all(np.isfinite(sim)):
        raise ValueError("similarity matrix has non-finite entries")

    back = np.empty((n, m), dtype=np.int8)
    prev = np.zeros(m + 1)
    cur = np.zeros(m + 1)
    penalty = float(cfg.match_penalty)
    for i in range(n):
        row = sim[i].astype(np.float64)
        gain = np.where(row >= cfg.min_sim, row - penalty, -np.inf)
        diag = prev[:-1] + gain
        up = prev[1:]
        take_diag = diag >= up
        best = np.where(take_diag, diag, up)
        cur[0] = 0.0
        cur[1:] = best
        np.maximum.accumulate(cur, out=cur)
        codes = np.where(take_diag, MATCH, SKIP_SRC).astype(np.int8)
        codes[cur[1:] > best] = SKIP_TGT
        back[i] = codes
        prev, cur = cur, prev

    score = float(prev[m])
    matches = []
    i, j = n, m
    while i > 0 and j > 0:
        code = back[i - 1, j - 1]
        if code == MATCH:
            matches.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif code == SKIP_SRC:
            i -= 1
        else:
            j -= 1
    matches.reverse()
    used_src = {a for a, _ in matches}
    used_tgt = {b for _, b in matches}
    return AlignmentPath(
        matches=matches,
        skipped_src=[a for a in range(n) if a not in used_src],
        skipped_tgt=[b for b in range(m) if b not in used_tgt],
        score=score,
    )


def document_alignment(
    doc: DocumentPair,
    cfg: AlignConfig = AlignConfig(),
    provider: Union[ProviderConfig, Provider] = ProviderConfig(),
) -> AlignmentPath:
    provider = as_provider(provider)
    src = embed_batch(provider, doc.src_sentences)
    tgt = embed_batch(provider, doc.tgt_sentences)
    return align_dp(similarity_matrix(src, tgt), cfg)


def pairs_from_path(
    doc: DocumentPair,
    path: AlignmentPath,
    source: str = "aligned",
    genre: str = "",
    orthography: str = "cunia",
) -> list[SentencePair]:
    pairs = []
    for i, j in path.matches:
        rup, ron = doc.src_sentences[i], doc.tgt_sentences[j]
        if not rup.strip() or not ron.strip():
            continue
        pairs.append(
            SentencePair(
                id=f"{doc.src_id}:{i}-{doc.tgt_id}:{j}",
                rup=rup,
                ron=ron,
                source=source,
                genre=genre,
                orthography=orthography,
            )
        )
    return pairs


def align_documents(
    doc: DocumentPair,
    cfg: AlignConfig = AlignConfig(),
    provider: Union[ProviderConfig, Provider] = ProviderConfig(),
    **pair_fields,
) -> list[SentencePair]:
    """Embed both sides, align them, and emit one pair per match in document order."""
    path = document_alignment(doc, cfg, provider)
    return pairs_from_path(doc, path, **pair_fields)


def align_many(
    docs: Sequence[DocumentPair],
    cfg: AlignConfig = AlignConfig(),
    provider: Union[ProviderConfig, Provider] = ProviderConfig(),
    jobs: int = 1,
) -> list[AlignmentPath]:
    """Align several document pairs; results follow input order whatever `jobs` is."""
    provider = as_provider(provider)
    if jobs <= 1:
        return [document_alignment(d, cfg, provider) for d in docs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda d: document_alignment(d, cfg, provider), docs))


def greedy_matching(sim, threshold: float = 0.5) -> list[tuple[int, int]]:
    """Accept pairs in order of decreasing similarity while both sides are free."""
    sim = np.asarray(sim, dtype=np.float64)
    candidates = [
        (-sim[a, b], a, b) for a in range(sim.shape[0]) for b in range(sim.shape[1])
        if sim[a, b] >= threshold
    ]
    candidates.sort()
    used_a, used_b = set(), set()
    result = []
    for _, a, b in candidates:
        if a in used_a or b in used_b:
            continue
        used_a.add(a)
        used_b.add(b)
        result.append((a, b))
    return sorted(result)


def match_documents(
    titles_a: Sequence[str],
    titles_b: Sequence[str],
    threshold: float = 0.5,
    provider: Union[ProviderConfig, Provider] = ProviderConfig(),
) -> list[tuple[int, int]]:
    provider = as_provider(provider)
    sim = similarity_matrix(embed_batch(provider, titles_a), embed_batch(provider, titles_b))
    return greedy_matching(sim, threshold)


def pair_verses(
    verse_a: str, verse_b: str, rules: SplitterRules = SplitterRules()
) -> Optional[list[tuple[str, str]]]:
    """Pair sentences position by position, or return None when the counts differ."""
    left = split_sentences(verse_a, rules)
    right = split_sentences(verse_b, rules)
    if len(left) != len(right) or not left:
        return None
    return list(zip(left, right))


@dataclass
class VerseReport:
    verses: int = 0
    paired: int = 0
    dropped: int = 0
    unmatched_ids: int = 0
    pairs: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def pair_verse_tables(
    rows_a: Iterable[Sequence[str]],
    rows_b: Iterable[Sequence[str]],
    rules: SplitterRules = SplitterRules(),
) -> tuple[list[tuple[str, int, str, str]], VerseReport]:
    """Join two (verse_id, text) tables on id and pair each shared verse.

    Returns (verse_id, sentence_index, text_a, text_b) tuples in the order of
    `rows_a`, together with counts of kept and dropped verses.
    """
    report = VerseReport()
    table_b = {row[0]: row[1] for row in rows_b}
    out = []
    for verse_id, text_a, *_ in rows_a:
        if verse_id not in table_b:
            report.unmatched_ids += 1
            continue
        report.verses += 1
        paired = pair_verses(text_a, table_b[verse_id], rules)
        if paired is None:
            report.dropped += 1
            continue
        report.paired += 1
        for k, (a, b) in enumerate(paired):
            out.append((verse_id, k, a, b))
    report.pairs = len(out)
    return out, report
