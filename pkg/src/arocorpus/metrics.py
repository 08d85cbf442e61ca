"""Corpus-level chrF / BLEU, WordPiece tokenization and tokenizer fertility.

Scores follow the sacreBLEU conventions recorded in the signatures
``nrefs:1|case:mixed|eff:yes|nc:6|nw:0|space:no`` (chrF) and
``nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp`` (BLEU).
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .stats import iter_words

# chrF++ word channel: ASCII punctuation split off word edges
_WORD_PUNCT = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")

_EPS = 1e-16


@dataclass(frozen=True)
class ChrfConfig:
    char_order: int = 6
    word_order: int = 0
    beta: float = 2.0
    effective_order: bool = True
    remove_whitespace: bool = True

    def __post_init__(self):
        if self.char_order < 1:
            raise ValueError("char_order must be >= 1")
        if self.word_order < 0:
            raise ValueError("word_order must be >= 0")

    def signature(self) -> str:
        return (
            f"nrefs:1|case:mixed|eff:{'yes' if self.effective_order else 'no'}"
            f"|nc:{self.char_order}|nw:{self.word_order}"
            f"|space:{'no' if self.remove_whitespace else 'yes'}"
        )


@dataclass(frozen=True)
class BleuConfig:
    max_order: int = 4
    tokenizer: str = "13a"
    smoothing: str = "exp"

    def __post_init__(self):
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")
        if self.tokenizer not in TOKENIZERS:
            raise ValueError(f"unknown tokenizer {self.tokenizer!r}")
        if self.smoothing not in ("exp", "none"):
            raise ValueError(f"unknown smoothing {self.smoothing!r}")

    def signature(self) -> str:
        return f"nrefs:1|case:mixed|eff:no|tok:{self.tokenizer}|smooth:{self.smoothing}"


def _check_lengths(hypotheses: Sequence[str], references: Sequence[str]) -> None:
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses but {len(references)} references"
        )
    if not hypotheses:
        raise ValueError("empty corpus")


# -- chrF ---------------------------------------------------------------------

def _char_ngrams(text: str, order: int, remove_whitespace: bool) -> list[Counter]:
    if remove_whitespace:
        text = "".join(text.split())
    return [Counter(text[i : i + n] for i in range(len(text) - n + 1)) for n in range(1, order + 1)]


def _chrf_words(text: str) -> list[str]:
    words = []
    for w in text.split():
        if len(w) > 1 and w[-1] in _WORD_PUNCT:
            words += [w[:-1], w[-1]]
        elif len(w) > 1 and w[0] in _WORD_PUNCT:
            words += [w[0], w[1:]]
        else:
            words.append(w)
    return words


def _word_ngrams(words: list[str], n: int) -> Counter:
    return Counter(" ".join(words[i : i + n]) for i in range(len(words) - n + 1))


def chrf_statistics(hypothesis: str, reference: str, cfg: ChrfConfig = ChrfConfig()) -> list[int]:
    """Flat [hyp, ref, match] triples per order (char orders first, then word orders)."""
    hyp = _char_ngrams(hypothesis, cfg.char_order, cfg.remove_whitespace)
    ref = _char_ngrams(reference, cfg.char_order, cfg.remove_whitespace)
    if cfg.word_order:
        hyp_words, ref_words = _chrf_words(hypothesis), _chrf_words(reference)
        for n in range(1, cfg.word_order + 1):
            hyp.append(_word_ngrams(hyp_words, n))
            ref.append(_word_ngrams(ref_words, n))
    stats = []
    for h, r in zip(hyp, ref):
        matched = sum(min(c, r[g]) for g, c in h.items() if g in r)
        # hypothesis n-grams only count where the reference has some of that order
        stats += [sum(h.values()) if r else 0, sum(r.values()), matched]
    return stats


def chrf_from_statistics(stats: Sequence[int], cfg: ChrfConfig = ChrfConfig()) -> float:
    factor = cfg.beta**2
    orders = cfg.char_order + cfg.word_order
    f_sum = 0.0
    prec_sum = rec_sum = 0.0
    effective = 0
    for k in range(orders):
        n_hyp, n_ref, n_match = stats[3 * k : 3 * k + 3]
        prec = n_match / n_hyp if n_hyp > 0 else _EPS
        rec = n_match / n_ref if n_ref > 0 else _EPS
        denom = factor * prec + rec
        f_sum += (1 + factor) * prec * rec / denom if denom > 0 else _EPS
        if n_hyp > 0 and n_ref > 0:
            prec_sum += prec
            rec_sum += rec
            effective += 1
    if not cfg.effective_order:
        return 100 * f_sum / orders
    if effective == 0:
        return 0.0
    prec, rec = prec_sum / effective, rec_sum / effective
    if prec + rec == 0:
        return 0.0
    return 100 * (1 + factor) * prec * rec / (factor * prec + rec)


def chrf(hypotheses: Sequence[str], references: Sequence[str], cfg: ChrfConfig = ChrfConfig()) -> float:
    _check_lengths(hypotheses, references)
    total = [0] * (3 * (cfg.char_order + cfg.word_order))
    for hyp, ref in zip(hypotheses, references):
        for k, v in enumerate(chrf_statistics(hyp, ref, cfg)):
            total[k] += v
    return chrf_from_statistics(total, cfg)


# -- BLEU ---------------------------------------------------------------------

_13A_RULES = [
    # symbols and most ASCII punctuation become separate tokens
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    # period and comma, unless between digits
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
]


def tokenize_13a(line: str) -> str:
    line = line.replace("<skipped>", "").replace("-\n", "").replace("\n", " ")
    if "&" in line:
        line = (
            line.replace("&quot;", '"')
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">")
        )
    line = f" {line} "
    for pattern, repl in _13A_RULES:
        line = pattern.sub(repl, line)
    return " ".join(line.split())


TOKENIZERS = {"13a": tokenize_13a, "none": lambda line: line}


def bleu_statistics(hypothesis: str, reference: str, cfg: BleuConfig = BleuConfig()) -> list[int]:
    """[hyp_len, ref_len, correct_1..N, total_1..N] for one segment."""
    tok = TOKENIZERS[cfg.tokenizer]
    hyp = tok(hypothesis.rstrip()).split()
    ref = tok(reference.rstrip()).split()
    correct = [0] * cfg.max_order
    total = [0] * cfg.max_order
    for n in range(1, cfg.max_order + 1):
        h = Counter(tuple(hyp[i : i + n]) for i in range(len(hyp) - n + 1))
        r = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
        total[n - 1] = sum(h.values())
        correct[n - 1] = sum(min(c, r[g]) for g, c in h.items())
    return [len(hyp), len(ref), *correct, *total]


def bleu_from_statistics(stats: Sequence[int], cfg: BleuConfig = BleuConfig()) -> float:
    order = cfg.max_order
    hyp_len, ref_len = stats[0], stats[1]
    correct = list(stats[2 : 2 + order])
    total = list(stats[2 + order : 2 + 2 * order])
    if not any(correct):
        return 0.0
    log_sum = 0.0
    smooth = 1.0
    for n in range(order):
        if total[n] == 0:
            # no n-grams of this order at all: precision counts as zero
            return 0.0
        if correct[n] == 0:
            if cfg.smoothing != "exp":
                return 0.0
            smooth *= 2
            precision = 1.0 / (smooth * total[n])
        else:
            precision = correct[n] / total[n]
        log_sum += math.log(precision)
    brevity = 1.0
    if hyp_len < ref_len:
        brevity = math.exp(1 - ref_len / hyp_len) if hyp_len > 0 else 0.0
    # geometric mean of fractions, so a perfect match is exactly 100.0
    return 100.0 * brevity * math.exp(log_sum / order)


def bleu(hypotheses: Sequence[str], references: Sequence[str], cfg: BleuConfig = BleuConfig()) -> float:
    _check_lengths(hypotheses, references)
    total = [0] * (2 + 2 * cfg.max_order)
    for hyp, ref in zip(hypotheses, references):
        for k, v in enumerate(bleu_statistics(hyp, ref, cfg)):
            total[k] += v
    return bleu_from_statistics(total, cfg)


# -- WordPiece / fertility ----------------------------------------------------

@dataclass(frozen=True)
class SubwordVocab:
    entries: frozenset[str]
    unknown_token: str = "[UNK]"
    continuation_prefix: str = "##"

    def __post_init__(self):
        if not self.entries:
            raise ValueError("vocabulary is empty")
        if self.unknown_token not in self.entries:
            raise ValueError(f"unknown token {self.unknown_token!r} missing from vocabulary")

    @classmethod
    def load(cls, path: str | Path, unknown_token: str = "[UNK]") -> "SubwordVocab":
        """One subword per line, BERT vocab.txt style."""
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        entries = {line.strip() for line in lines if line.strip()}
        entries.add(unknown_token)
        return cls(frozenset(entries), unknown_token)


def wordpiece_tokenize(word: str, vocab: SubwordVocab) -> list[str]:
    pieces = []
    start = 0
    while start < len(word):
        end = len(word)
        found = None
        while end > start:
            piece = word[start:end]
            if start > 0:
                piece = vocab.continuation_prefix + piece
            if piece in vocab.entries:
                found = piece
                break
            end -= 1
        if found is None:
            return [vocab.unknown_token]
        pieces.append(found)
        start = end
    return pieces


def fertility(corpus: Iterable[str], vocab: SubwordVocab) -> float:
    """Average number of subword tokens per word."""
    n_words = n_pieces = 0
    for text in corpus:
        for word in iter_words(text):
            n_words += 1
            n_pieces += len(wordpiece_tokenize(word, vocab))
    if n_words == 0:
        raise ValueError("corpus contains no words")
    return n_pieces / n_words
