"""Parallel corpus records and their JSON-lines / TSV representations."""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

ORTHOGRAPHIES = ("cunia", "diaro")
SPLITS = ("train", "dev", "test")
ROLES = ("trainable", "dev_only", "test_only")

FIELD_ORDER = ("id", "rup", "ron", "eng", "source", "genre", "orthography", "split")
_REQUIRED = ("id", "rup", "ron", "source", "genre", "orthography")


class CorpusFormatError(ValueError):
    """A corpus or manifest file violates the record format."""


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class SentencePair:
    id: str
    rup: str
    ron: str
    source: str
    genre: str = ""
    orthography: str = "cunia"
    eng: Optional[str] = None
    split: Optional[str] = None

    def __post_init__(self):
        if not self.rup.strip():
            raise ValueError(f"pair {self.id!r}: empty rup text")
        if not self.ron.strip():
            raise ValueError(f"pair {self.id!r}: empty ron text")
        if self.orthography not in ORTHOGRAPHIES:
            raise ValueError(f"pair {self.id!r}: unknown orthography {self.orthography!r}")
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"pair {self.id!r}: unknown split {self.split!r}")

    def to_dict(self) -> dict:
        record = {}
        for key in FIELD_ORDER:
            value = getattr(self, key)
            if value is not None:
                record[key] = value
        return record

    @classmethod
    def from_dict(cls, record: dict) -> "SentencePair":
        unknown = set(record) - set(FIELD_ORDER)
        if unknown:
            raise ValueError(f"unknown field {sorted(unknown)[0]}")
        for key in _REQUIRED:
            if key not in record:
                raise ValueError(f"missing field {key}")
        values = {}
        for key, value in record.items():
            if not isinstance(value, str):
                raise ValueError(f"field {key} must be a string")
            values[key] = nfc(value)
        return cls(**values)


@dataclass(frozen=True)
class DocumentPair:
    src_sentences: list[str]
    tgt_sentences: list[str]
    src_id: str = "src"
    tgt_id: str = "tgt"

    def __post_init__(self):
        if not self.src_sentences or not self.tgt_sentences:
            raise ValueError("both documents must contain at least one sentence")


@dataclass(frozen=True)
class ManifestEntry:
    source: str
    role: str
    genre: str = ""
    path: Optional[str] = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"source {self.source!r}: unknown role {self.role!r}")


@dataclass(frozen=True)
class SourceManifest:
    entries: tuple[ManifestEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            if entry.source in seen:
                raise ValueError(f"duplicate source {entry.source!r} in manifest")
            seen.add(entry.source)

    def role_of(self, source: str) -> str:
        for entry in self.entries:
            if entry.source == source:
                return entry.role
        raise KeyError(source)

    @classmethod
    def load(cls, path: str | Path) -> "SourceManifest":
        """Read a manifest: a JSON list of {"source", "role", "genre"?, "path"?} objects."""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"{path}: invalid JSON ({exc.msg})") from exc
        if isinstance(data, dict):
            data = data.get("entries", [])
        try:
            entries = tuple(
                ManifestEntry(
                    source=item["source"],
                    role=item["role"],
                    genre=item.get("genre", ""),
                    path=item.get("path"),
                )
                for item in data
            )
            return cls(entries)
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(f"{path}: bad manifest entry ({exc})") from exc


def read_corpus(path: str | Path) -> list[SentencePair]:
    pairs = []
    seen_ids = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise ValueError("record is not a JSON object")
                pair = SentencePair.from_dict(record)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            except (TypeError, ValueError) as exc:
                raise CorpusFormatError(f"line {lineno}: {exc}") from exc
            if pair.id in seen_ids:
                raise CorpusFormatError(f"line {lineno}: duplicate id {pair.id}")
            seen_ids.add(pair.id)
            pairs.append(pair)
    return pairs


def dumps_pair(pair: SentencePair) -> str:
    return json.dumps(pair.to_dict(), ensure_ascii=False)


def write_corpus(pairs: Iterable[SentencePair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for pair in pairs:
            handle.write(dumps_pair(pair))
            handle.write("\n")


def _escape_tsv(text: Optional[str]) -> str:
    if text is None:
        return ""
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape_tsv(text: str) -> str:
    out = []
    chars = iter(text)
    for ch in chars:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(chars, "")
        out.append({"t": "\t", "n": "\n", "\\": "\\"}.get(nxt, "\\" + nxt))
    return "".join(out)


def write_tsv(pairs: Iterable[SentencePair], path: str | Path) -> None:
    """Spreadsheet export with columns id, rup, ron, eng."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("id\trup\tron\teng\n")
        for pair in pairs:
            cols = (pair.id, pair.rup, pair.ron, pair.eng)
            handle.write("\t".join(_escape_tsv(c) for c in cols) + "\n")


def read_tsv_rows(path: str | Path) -> list[list[str]]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if line:
                rows.append([nfc(_unescape_tsv(col)) for col in line.split("\t")])
    return rows
