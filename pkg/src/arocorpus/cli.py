"""Command-line entry point: ``arocorpus <subcommand> ...``.

Primary results go to stdout or ``--out``; reports and errors go to stderr
as single-line JSON. Exit codes: 0 ok, 1 usage, 2 bad data, 3 provider failure.

Settings may also come from an INI file given with ``--config``; flags win::

    [provider]
    kind = http
    endpoint = http://localhost:8000/embed
    batch_size = 32

    [align]
    min_sim = 0.5
    match_penalty = 0.3

    [splitter]
    abbreviations = Dl., Dna., etc.

    [ortho]
    model = models/ortho.json

    [split]
    ratio = 0.95
    seed = 13
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .align import (
    AlignConfig,
    SplitterRules,
    document_alignment,
    match_documents,
    pair_verse_tables,
    pairs_from_path,
    split_sentences,
)
from .corpus import (
    ORTHOGRAPHIES,
    DocumentPair,
    SentencePair,
    SourceManifest,
    dumps_pair,
    nfc,
    read_corpus,
    read_tsv_rows,
    write_corpus,
)
from .embeddings import ProviderConfig, TransportError
from .metrics import BleuConfig, ChrfConfig, SubwordVocab, bleu, chrf, fertility
from .orthography import (
    FORMAT_VERSION,
    OrthoModel,
    convert_to_diaro,
    normalize_to_cunia,
    site_outcomes,
    train_ortho_model,
)
from .stats import SplitPlan, corpus_stats, stratified_split

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRANSPORT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class PipelineConfig:
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    align: AlignConfig = field(default_factory=AlignConfig)
    splitter: SplitterRules = field(default_factory=SplitterRules)
    ortho_model_path: Optional[str] = None
    ratio: float = 0.95
    seed: int = 0

    @classmethod
    def from_ini(cls, path: str | Path) -> "PipelineConfig":
        parser = configparser.ConfigParser()
        if not parser.read(path, encoding="utf-8"):
            raise FileNotFoundError(f"config file not found: {path}")
        cfg = cls()
        if parser.has_section("provider"):
            section = parser["provider"]
            types = {f.name: f.type for f in fields(ProviderConfig)}
            values = {}
            for key, raw in section.items():
                kind = types.get(key)
                if kind is None:
                    raise ValueError(f"{path}: unknown provider setting {key!r}")
                if "int" in str(kind):
                    values[key] = int(raw)
                elif "float" in str(kind):
                    values[key] = float(raw)
                else:
                    values[key] = raw
            cfg.provider = ProviderConfig(**values)
        if parser.has_section("align"):
            section = parser["align"]
            cfg.align = AlignConfig(
                min_sim=section.getfloat("min_sim", cfg.align.min_sim),
                match_penalty=section.getfloat("match_penalty", cfg.align.match_penalty),
            )
        if parser.has_section("splitter"):
            section = parser["splitter"]
            terms = section.get("terminators")
            abbrevs = section.get("abbreviations", "")
            cfg.splitter = SplitterRules(
                terminators=frozenset(terms) if terms else cfg.splitter.terminators,
                abbreviations=frozenset(a.strip() for a in abbrevs.split(",") if a.strip()),
                require_space=section.getboolean("require_space", True),
            )
        if parser.has_section("ortho"):
            cfg.ortho_model_path = parser["ortho"].get("model")
        if parser.has_section("split"):
            cfg.ratio = parser["split"].getfloat("ratio", cfg.ratio)
            cfg.seed = parser["split"].getint("seed", cfg.seed)
        return cfg


def _report(obj: dict) -> None:
    print(json.dumps(obj, ensure_ascii=False, sort_keys=True), file=sys.stderr)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_lines(path: str) -> list[str]:
    return [nfc(line.rstrip("\n")) for line in Path(path).read_text(encoding="utf-8").splitlines()]


def _provider(args, cfg: PipelineConfig) -> ProviderConfig:
    provider = cfg.provider
    if args.provider == "mock":
        provider = ProviderConfig(kind="mock")
    elif args.provider:
        provider = ProviderConfig.load(args.provider)
    if getattr(args, "jobs", 1) > 1:
        provider = ProviderConfig(**{**provider.__dict__, "max_in_flight": args.jobs})
    return provider


def _document(path: str, split: bool, rules: SplitterRules) -> list[str]:
    if split:
        return split_sentences(nfc(Path(path).read_text(encoding="utf-8")), rules)
    return [line for line in _read_lines(path) if line.strip()]


def cmd_align(args, cfg: PipelineConfig) -> int:
    align_cfg = AlignConfig(
        min_sim=cfg.align.min_sim if args.min_sim is None else args.min_sim,
        match_penalty=cfg.align.match_penalty if args.penalty is None else args.penalty,
    )
    doc = DocumentPair(
        src_sentences=_document(args.src, args.split, cfg.splitter),
        tgt_sentences=_document(args.tgt, args.split, cfg.splitter),
        src_id=Path(args.src).stem,
        tgt_id=Path(args.tgt).stem,
    )
    path = document_alignment(doc, align_cfg, _provider(args, cfg))
    pairs = pairs_from_path(doc, path, args.source, args.genre, args.orthography)
    _emit("".join(dumps_pair(p) + "\n" for p in pairs), args.out)
    _report({"command": "align", **path.report(), "pairs": len(pairs)})
    return EXIT_OK


def cmd_match_docs(args, cfg: PipelineConfig) -> int:
    titles_a, titles_b = _read_lines(args.a), _read_lines(args.b)
    if not titles_a or not titles_b:
        raise ValueError("both title lists must be non-empty")
    matches = match_documents(titles_a, titles_b, args.threshold, _provider(args, cfg))
    lines = [
        json.dumps({"a": ia, "b": ib, "title_a": titles_a[ia], "title_b": titles_b[ib]}, ensure_ascii=False)
        for ia, ib in matches
    ]
    _emit("".join(line + "\n" for line in lines), args.out)
    _report({
        "command": "match-docs",
        "matched": len(matches),
        "unmatched_a": len(titles_a) - len(matches),
        "unmatched_b": len(titles_b) - len(matches),
    })
    return EXIT_OK


def cmd_pair_verses(args, cfg: PipelineConfig) -> int:
    rows, report = pair_verse_tables(read_tsv_rows(args.a), read_tsv_rows(args.b), cfg.splitter)
    pairs = [
        SentencePair(
            id=f"{verse_id}.{k}", rup=a, ron=b, source=args.source,
            genre=args.genre, orthography=args.orthography,
        )
        for verse_id, k, a, b in rows
        if a.strip() and b.strip()
    ]
    _emit("".join(dumps_pair(p) + "\n" for p in pairs), args.out)
    _report({"command": "pair-verses", **report.as_dict()})
    return EXIT_OK


def _load_model(args, cfg: PipelineConfig) -> Optional[OrthoModel]:
    path = args.model or cfg.ortho_model_path
    return OrthoModel.load(path) if path else None


def cmd_convert(args, cfg: PipelineConfig) -> int:
    text = Path(args.input).read_text(encoding="utf-8") if args.input else sys.stdin.read()
    model = _load_model(args, cfg)
    if args.to == "diaro":
        if model is None:
            raise UsageError("convert --to diaro needs --model")
        result = convert_to_diaro(text, model)
    else:
        result = normalize_to_cunia(nfc(text), model.mapping) if model else normalize_to_cunia(nfc(text))
    _emit(result, args.out)
    return EXIT_OK


def cmd_train_ortho(args, cfg: PipelineConfig) -> int:
    model = train_ortho_model(_read_lines(args.input))
    model.save(args.out)
    _report({
        "command": "train-ortho",
        "words": len(model.word_dict),
        "contexts": len(model.fourgram),
        "sites": sum(sum(c.values()) for c in model.fourgram.values()),
    })
    return EXIT_OK


def cmd_eval_ortho(args, cfg: PipelineConfig) -> int:
    model = _load_model(args, cfg)
    if model is None:
        raise UsageError("eval-ortho needs --model")
    correct, total, mid = site_outcomes(_read_lines(args.held_out), model)
    if total == 0:
        raise ValueError("no evaluation sites found")
    print(json.dumps({
        "accuracy": correct / total,
        "sites": total,
        "mid_central_baseline": mid / total,
    }))
    return EXIT_OK


def _hyp_ref(args) -> tuple[list[str], list[str]]:
    return _read_lines(args.hyp), _read_lines(args.ref)


def cmd_chrf(args, cfg: PipelineConfig) -> int:
    chrf_cfg = ChrfConfig(word_order=args.word_order)
    hyps, refs = _hyp_ref(args)
    print(json.dumps({"metric": "chrF", "score": chrf(hyps, refs, chrf_cfg), "signature": chrf_cfg.signature()}))
    return EXIT_OK


def cmd_bleu(args, cfg: PipelineConfig) -> int:
    bleu_cfg = BleuConfig()
    hyps, refs = _hyp_ref(args)
    print(json.dumps({"metric": "BLEU", "score": bleu(hyps, refs, bleu_cfg), "signature": bleu_cfg.signature()}))
    return EXIT_OK


def cmd_fertility(args, cfg: PipelineConfig) -> int:
    vocab = SubwordVocab.load(args.vocab, args.unk)
    print(json.dumps({"fertility": fertility(_read_lines(args.input), vocab)}))
    return EXIT_OK


def cmd_stats(args, cfg: PipelineConfig) -> int:
    pairs = read_corpus(args.input)
    texts = [getattr(p, args.field) for p in pairs if getattr(p, args.field) is not None]
    print(json.dumps(corpus_stats(texts).as_dict()))
    return EXIT_OK


def cmd_split(args, cfg: PipelineConfig) -> int:
    plan = SplitPlan(
        manifest=SourceManifest.load(args.manifest),
        ratio=cfg.ratio if args.ratio is None else args.ratio,
        seed=cfg.seed if args.seed is None else args.seed,
    )
    result = stratified_split(read_corpus(args.input), plan)
    write_corpus(result, args.out)
    counts: dict[str, dict[str, int]] = {}
    for pair in result:
        per = counts.setdefault(pair.source, {"train": 0, "dev": 0, "test": 0})
        per[pair.split] += 1
    _report({"command": "split", "seed": plan.seed, "ratio": plan.ratio, "sources": counts})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arocorpus", description="Aromanian corpus-engineering toolkit")
    parser.add_argument(
        "--version", action="version",
        version=f"arocorpus {__version__} (ortho model format {FORMAT_VERSION})",
    )
    parser.add_argument("--config", help="INI file with default settings")
    parser.add_argument("--jobs", type=int, default=1, help="parallel provider requests")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def pair_tags(p):
        p.add_argument("--source", default="aligned")
        p.add_argument("--genre", default="")
        p.add_argument("--orthography", choices=ORTHOGRAPHIES, default="cunia")

    p = sub.add_parser("align", help="align two documents sentence by sentence")
    p.add_argument("--src", required=True, help="Aromanian document, one sentence per line")
    p.add_argument("--tgt", required=True, help="Romanian document, one sentence per line")
    p.add_argument("--provider", help="provider config JSON, or 'mock'")
    p.add_argument("--min-sim", type=float)
    p.add_argument("--penalty", type=float)
    p.add_argument("--split", action="store_true", help="sentence-split raw text first")
    p.add_argument("--out")
    pair_tags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("match-docs", help="pair titles by embedding similarity")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--provider")
    p.add_argument("--out")
    p.set_defaults(func=cmd_match_docs)

    p = sub.add_parser("pair-verses", help="pair sentences of matching verses")
    p.add_argument("--a", required=True, help="TSV: verse id, Aromanian text")
    p.add_argument("--b", required=True, help="TSV: verse id, Romanian text")
    p.add_argument("--out")
    pair_tags(p)
    p.set_defaults(func=cmd_pair_verses, source="bible", genre="religious")

    p = sub.add_parser("convert", help="convert between Cunia and DIARO spelling")
    p.add_argument("--to", required=True, choices=("cunia", "diaro"))
    p.add_argument("--model")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("train-ortho", help="train the <ã> disambiguation model")
    p.add_argument("--in", dest="input", required=True, help="DIARO text, one segment per line")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_ortho)

    p = sub.add_parser("eval-ortho", help="site accuracy on held-out DIARO text")
    p.add_argument("--model")
    p.add_argument("--held-out", required=True)
    p.set_defaults(func=cmd_eval_ortho)

    p = sub.add_parser("chrf", help="corpus chrF / chrF++")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--word-order", type=int, default=0)
    p.set_defaults(func=cmd_chrf)

    p = sub.add_parser("bleu", help="corpus BLEU (13a, exp smoothing)")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.set_defaults(func=cmd_bleu)

    p = sub.add_parser("fertility", help="WordPiece tokens per word")
    p.add_argument("--vocab", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--unk", default="[UNK]")
    p.set_defaults(func=cmd_fertility)

    p = sub.add_parser("stats", help="word statistics of one corpus field")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--field", choices=("rup", "ron", "eng"), default="rup")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="stratified train/dev/test split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--ratio", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = PipelineConfig.from_ini(args.config) if args.config else PipelineConfig()
        return args.func(args, cfg)
    except UsageError as exc:
        _report({"error": str(exc), "kind": "usage"})
        return EXIT_USAGE
    except TransportError as exc:
        _report({"error": str(exc), "kind": "transport"})
        return EXIT_TRANSPORT
    except (ValueError, LookupError, OSError) as exc:
        _report({"error": str(exc), "kind": "data"})
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
