"""Conversion between the Cunia and DIARO Aromanian spellings.

Cunia writes both central vowels as <ã>; DIARO follows Romanian and writes
the close central vowel as <â>/<î> and the mid central vowel as <ă>. Going
DIARO -> Cunia is a plain character mapping. Going Cunia -> DIARO needs a
trained model to decide each <ã>:

1. word lookup: the most frequent DIARO spelling seen for the whole word;
2. context lookup: counts of each vowel class keyed by the two letters on
   either side of the site;
3. fallback: the mid central vowel.
"""

from __future__ import annotations

import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .corpus import nfc

FORMAT_VERSION = 1
CUNIA_VOWEL = "ã"
PAD = "#"

_WORD_RE = re.compile(r"[^\W\d_]+")


class VowelClass(str, Enum):
    CLOSE_CENTRAL = "close"
    MID_CENTRAL = "mid"


DIARO_VOWELS = {
    "â": VowelClass.CLOSE_CENTRAL,
    "î": VowelClass.CLOSE_CENTRAL,
    "ă": VowelClass.MID_CENTRAL,
}


@dataclass(frozen=True)
class MappingTable:
    """Lowercase grapheme correspondences; case variants are derived at use time."""

    cunia_to_diaro: tuple[tuple[str, str], ...] = (
        ("sh", "ș"),
        ("ts", "ț"),
        ("lj", "ľ"),
        ("nj", "ń"),
    )
    diaro_to_cunia: tuple[tuple[str, str], ...] = (
        ("ș", "sh"),
        ("ş", "sh"),
        ("ț", "ts"),
        ("ţ", "ts"),
        ("ľ", "lj"),
        ("ń", "nj"),
        ("â", "ã"),
        ("î", "ã"),
        ("ă", "ã"),
    )

    def __post_init__(self):
        for table in (self.cunia_to_diaro, self.diaro_to_cunia):
            lengths = [len(p) for p, _ in table]
            if lengths != sorted(lengths, reverse=True):
                raise ValueError("mapping patterns must be ordered longest first")

    def to_dict(self) -> dict:
        return {
            "cunia_to_diaro": [list(p) for p in self.cunia_to_diaro],
            "diaro_to_cunia": [list(p) for p in self.diaro_to_cunia],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MappingTable":
        return cls(
            cunia_to_diaro=tuple((p, r) for p, r in data["cunia_to_diaro"]),
            diaro_to_cunia=tuple((p, r) for p, r in data["diaro_to_cunia"]),
        )


def _pattern(pairs: Iterable[tuple[str, str]]) -> re.Pattern:
    return re.compile("|".join(re.escape(p) for p, _ in pairs), re.IGNORECASE)


_compiled: dict[tuple, tuple[re.Pattern, dict[str, str]]] = {}


def _compile(pairs: tuple[tuple[str, str], ...]) -> tuple[re.Pattern, dict[str, str]]:
    if pairs not in _compiled:
        _compiled[pairs] = (_pattern(pairs), dict(pairs))
    return _compiled[pairs]


def _apply_case(replacement: str, source: str, next_char: str, prev_char: str) -> str:
    """Case `replacement` after the single DIARO letter `source` it stands for.

    A multi-letter replacement of an uppercase letter is fully uppercased when
    the following letter is uppercase (or, at a word end, the preceding one
    is): "ȘI" -> "SHI", "Și" -> "Shi", "NUȘ" -> "NUSH".
    """
    if not source.isupper():
        return replacement
    if len(replacement) == 1:
        return replacement.upper()
    if next_char.isalpha():
        shout = next_char.isupper()
    else:
        shout = prev_char.isalpha() and prev_char.isupper()
    return replacement.upper() if shout else replacement[0].upper() + replacement[1:]


def normalize_to_cunia(text: str, mapping: MappingTable = MappingTable()) -> str:
    """Rewrite DIARO (or Romanian-style) spelling in the Cunia standard."""
    regex, table = _compile(mapping.diaro_to_cunia)
    out = []
    last = 0
    for m in regex.finditer(text):
        out.append(text[last : m.start()])
        found = m.group()
        replacement = table[found.lower()]
        prev_char = text[m.start() - 1] if m.start() > 0 else ""
        next_char = text[m.end()] if m.end() < len(text) else ""
        out.append(_apply_case(replacement, found[0], next_char, prev_char))
        last = m.end()
    out.append(text[last:])
    return "".join(out)


def apply_cunia_mapping(text: str, mapping: MappingTable = MappingTable()) -> str:
    """Replace Cunia digraphs with DIARO letters, leaving <ã> untouched.

    A capitalised digraph is converted only when `normalize_to_cunia` would
    restore exactly the same casing, so the conversion is always reversible.
    Non-canonical casings such as "sH" are left as they are.
    """
    regex, table = _compile(mapping.cunia_to_diaro)
    out: list[str] = []
    prev_char = ""
    last = 0
    for m in regex.finditer(text):
        if m.start() > last:
            out.append(text[last : m.start()])
            prev_char = text[m.start() - 1]
        last = m.end()
        found = m.group()
        replacement = table[found.lower()]
        if found.islower():
            piece = replacement
        elif not found[0].isupper():
            piece = found
        else:
            upper = replacement.upper()
            next_char = text[m.end()] if m.end() < len(text) else ""
            back = _apply_case(found.lower(), upper, next_char, prev_char)
            piece = upper if back == found else found
        out.append(piece)
        prev_char = piece[-1]
    out.append(text[last:])
    return "".join(out)


def _normalize_word_sites(word: str, mapping: MappingTable) -> tuple[str, list[tuple[int, str]]]:
    """Lowercase Cunia form of a DIARO word plus (position, DIARO vowel) per site."""
    regex, table = _compile(mapping.diaro_to_cunia)
    lowered = word.lower()
    parts: list[str] = []
    sites = []
    size = 0
    last = 0
    for m in regex.finditer(lowered):
        chunk = lowered[last : m.start()]
        parts.append(chunk)
        size += len(chunk)
        found = m.group()
        if found in DIARO_VOWELS:
            sites.append((size, found))
        replacement = table[found]
        parts.append(replacement)
        size += len(replacement)
        last = m.end()
    parts.append(lowered[last:])
    return "".join(parts), sites


def context_key(word: str, pos: int) -> str:
    """Two letters left + two letters right of position `pos`, '#'-padded."""
    padded = PAD * 2 + word + PAD * 2
    i = pos + 2
    return padded[i - 2 : i] + padded[i + 1 : i + 3]


def glyph_for(cls: VowelClass, pos: int, length: int) -> str:
    if cls is VowelClass.MID_CENTRAL:
        return "ă"
    return "î" if pos == 0 or pos == length - 1 else "â"


@dataclass
class OrthoModel:
    mapping: MappingTable = field(default_factory=MappingTable)
    word_dict: dict[str, dict[str, int]] = field(default_factory=dict)
    fourgram: dict[str, dict[str, int]] = field(default_factory=dict)
    default_class: VowelClass = VowelClass.MID_CENTRAL
    version: int = FORMAT_VERSION

    def best_form(self, key: str) -> Optional[str]:
        forms = self.word_dict.get(key)
        if not forms:
            return None
        ranked = sorted(forms.items(), key=lambda kv: (-kv[1], kv[0]))
        if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
            return None
        return ranked[0][0]

    def site_class(self, key: str) -> VowelClass:
        counts = self.fourgram.get(key)
        if counts:
            close = counts.get(VowelClass.CLOSE_CENTRAL.value, 0)
            mid = counts.get(VowelClass.MID_CENTRAL.value, 0)
            if close > mid:
                return VowelClass.CLOSE_CENTRAL
            if mid > close:
                return VowelClass.MID_CENTRAL
        return self.default_class

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "mapping": self.mapping.to_dict(),
            "word_dict": self.word_dict,
            "fourgram": self.fourgram,
            "default": self.default_class.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OrthoModel":
        version = data.get("version")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported ortho model version {version!r}")
        mapping = MappingTable.from_dict(data["mapping"]) if "mapping" in data else MappingTable()
        return cls(
            mapping=mapping,
            word_dict={k: dict(v) for k, v in data.get("word_dict", {}).items()},
            fourgram={k: dict(v) for k, v in data.get("fourgram", {}).items()},
            default_class=VowelClass(data.get("default", "mid")),
            version=version,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "OrthoModel":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid model file ({exc.msg})") from exc
        return cls.from_dict(data)


def train_ortho_model(
    diaro_corpus: Iterable[str], mapping: MappingTable = MappingTable()
) -> OrthoModel:
    """Count word spellings and per-site context classes over a DIARO corpus."""
    word_dict: dict[str, Counter] = defaultdict(Counter)
    fourgram: dict[str, Counter] = defaultdict(Counter)
    n_sites = 0
    for text in diaro_corpus:
        for m in _WORD_RE.finditer(nfc(text)):
            word = m.group()
            lowered = word.lower()
            if not any(ch in DIARO_VOWELS for ch in lowered):
                continue
            key, sites = _normalize_word_sites(word, mapping)
            word_dict[key][lowered] += 1
            for pos, vowel in sites:
                fourgram[context_key(key, pos)][DIARO_VOWELS[vowel].value] += 1
            n_sites += len(sites)
    if n_sites == 0:
        raise ValueError("no training sites found")
    return OrthoModel(
        mapping=mapping,
        word_dict={k: dict(v) for k, v in word_dict.items()},
        fourgram={k: dict(v) for k, v in fourgram.items()},
    )


def _convert_word(word: str, model: OrthoModel) -> str:
    mapped = apply_cunia_mapping(word, model.mapping)
    if CUNIA_VOWEL not in mapped.lower():
        return mapped
    key, _ = _normalize_word_sites(word, model.mapping)
    site_positions = [i for i, ch in enumerate(key) if ch == CUNIA_VOWEL]

    glyphs: Optional[list[str]] = None
    form = model.best_form(key)
    if form is not None:
        glyphs = [ch for ch in form if ch in DIARO_VOWELS]
        if len(glyphs) != len(site_positions):
            glyphs = None
    if glyphs is None:
        glyphs = [
            glyph_for(model.site_class(context_key(key, pos)), pos, len(key))
            for pos in site_positions
        ]

    out = []
    choices = iter(glyphs)
    for ch in mapped:
        if ch.lower() == CUNIA_VOWEL:
            glyph = next(choices)
            out.append(glyph.upper() if ch.isupper() else glyph)
        else:
            out.append(ch)
    return "".join(out)


def convert_to_diaro(text: str, model: Optional[OrthoModel] = None) -> str:
    """Rewrite Cunia text in DIARO spelling."""
    if model is None:
        model = OrthoModel()
    return _WORD_RE.sub(lambda m: _convert_word(m.group(), model), nfc(text))


def _site_glyphs(word: str) -> list[str]:
    return [ch for ch in word.lower() if ch in DIARO_VOWELS or ch == CUNIA_VOWEL]


def site_outcomes(held_out_diaro: Iterable[str], model: OrthoModel) -> tuple[int, int, int]:
    """Return (correct, total, mid_central_total) over all â/î/ă sites."""
    correct = total = mid = 0
    for text in held_out_diaro:
        text = nfc(text)
        rebuilt = convert_to_diaro(normalize_to_cunia(text, model.mapping), model)
        gold_words = _WORD_RE.findall(text)
        pred_words = _WORD_RE.findall(rebuilt)
        if len(gold_words) != len(pred_words):
            raise AssertionError("conversion changed the word segmentation")
        for gold_word, pred_word in zip(gold_words, pred_words):
            for gold, pred in zip(_site_glyphs(gold_word), _site_glyphs(pred_word)):
                if gold == CUNIA_VOWEL:
                    continue
                total += 1
                correct += gold == pred
                mid += gold == "ă"
    return correct, total, mid


def evaluate_converter(held_out_diaro: Iterable[str], model: OrthoModel) -> float:
    """Fraction of â/î/ă sites restored after a DIARO -> Cunia -> DIARO trip."""
    correct, total, _ = site_outcomes(held_out_diaro, model)
    if total == 0:
        raise ValueError("no evaluation sites found")
    return correct / total
