"""Command-line entry point.

Subcommands cover the whole pipeline: ``prepare`` (annotation cleanup),
``split``, ``tokenize``, ``extract``/``segment`` (EEBO XML to sentences),
``query`` (run suites, emit hit TSVs), ``score-brackets`` / ``score-ftags`` /
``score-queries``, and ``scan-impossible``.  Every file output gets a
``<name>.manifest.json`` sidecar recording inputs, configuration digest, and
tool version; reruns with the same inputs produce byte-identical outputs.

Exit codes: 0 success, 1 usage error, 2 data contract violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import DataError
from . import eebo, impossible, query as q, reports, scoring, tokenizer, transform, treebank

log = logging.getLogger("emetools")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# Helpers


def _read_corpus(paths) -> list[treebank.Sentence]:
    sentences = []
    for path in paths:
        sentences.extend(treebank.read_trees_file(path))
    return sentences


def _write_manifest(args, subcommand: str, inputs, outputs, settings: dict) -> None:
    digest = hashlib.sha256(
        json.dumps(settings, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()
    payload = {
        "subcommand": subcommand,
        "inputs": [str(p) for p in inputs],
        "configs": [str(p) for p in settings.get("config_files", [])],
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "config_digest": digest,
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    for out in outputs:
        Path(str(out) + ".manifest.json").write_text(text, encoding="utf-8")


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _tokenizer_config(args) -> tokenizer.TokenizerConfig:
    abbrev = tokenizer.DEFAULT_ABBREVIATIONS
    if getattr(args, "abbrev", None):
        abbrev = tokenizer.load_abbreviations(args.abbrev)
    return tokenizer.TokenizerConfig(
        abbreviations=abbrev,
        split_th_apostrophe=not getattr(args, "no_th_split", False),
        its_one_token=not getattr(args, "split_its", False),
        roman_numeral_j_variant=not getattr(args, "no_roman_j", False),
    )


# ---------------------------------------------------------------------------
# prepare


def cmd_prepare(args) -> int:
    cfg = transform.DEFAULT_CONFIG
    if args.retained_tags:
        cfg = transform.TransformConfig(
            retained_function_tags=frozenset(args.retained_tags.split(",")),
            excluded_rare_tags=frozenset(),
        )
    steps = args.steps.split(",") if args.steps else ["metadata", "tags", "ftags"]
    allowed = ["metadata", "tags", "ftags"]
    if [s for s in steps if s not in allowed]:
        raise _UsageError(f"--steps entries must be among {allowed}")
    steps = [s for s in allowed if s in steps]  # pipeline order is fixed

    dropped_rows = []
    outputs = []
    out_fh, close_out = _open_out(args.out)
    try:
        for path in args.trees:
            sentences = treebank.read_trees_file(path)
            if "metadata" in steps:
                sentences, dropped = transform.strip_metadata(sentences, cfg)
                for d in dropped:
                    dropped_rows.append((os.path.basename(path), d.sentence.id, d.reason))
            if "tags" in steps:
                sentences = [
                    treebank.make_sentence(s.id, transform.normalize_tags(s.tree), s.explicit_id)
                    for s in sentences
                ]
            if "ftags" in steps:
                sentences = [
                    treebank.make_sentence(
                        s.id, transform.filter_function_tags(s.tree, cfg), s.explicit_id
                    )
                    for s in sentences
                ]
            treebank.write_sentences(sentences, out_fh)
    finally:
        if close_out:
            out_fh.close()
            outputs.append(args.out)

    if args.drop_report:
        with open(args.drop_report, "w", encoding="utf-8") as fh:
            fh.write("file\tsentence_id\treason\n")
            for row in dropped_rows:
                fh.write("\t".join(row) + "\n")
        outputs.append(args.drop_report)
    if dropped_rows:
        log.info("dropped %d trees", len(dropped_rows))
    _write_manifest(
        args, "prepare", args.trees, outputs,
        {"steps": steps, "retained": sorted(cfg.retained_function_tags)},
    )
    return 0


# ---------------------------------------------------------------------------
# split


def cmd_split(args) -> int:
    assignments = transform.split_corpus(args.files)
    out_fh, close_out = _open_out(args.out)
    try:
        out_fh.write("file\tpartition\n")
        for a in assignments:
            out_fh.write(f"{a.file}\t{a.partition}\n")
    finally:
        if close_out:
            out_fh.close()
    counts = {"train": 0, "dev": 0, "test": 0}
    for a in assignments:
        counts[a.partition] += 1
    print(
        f"train {counts['train']}  dev {counts['dev']}  test {counts['test']}",
        file=sys.stderr,
    )
    if close_out:
        _write_manifest(args, "split", args.files, [args.out], {"rule": "l->dev, e->test"})
    return 0


# ---------------------------------------------------------------------------
# tokenize


def cmd_tokenize(args) -> int:
    cfg = _tokenizer_config(args)
    if args.input == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.input).read_text(encoding="utf-8")
    segments = [text] if args.raw else text.splitlines()
    out_fh, close_out = _open_out(args.out)
    try:
        for segment in segments:
            tokens = tokenizer.tokenize(segment, cfg).tokens
            if args.tokens_per_line:
                for tok in tokens:
                    out_fh.write(tok + "\n")
                out_fh.write("\n")
            else:
                out_fh.write(" ".join(tokens) + "\n")
    finally:
        if close_out:
            out_fh.close()
            _write_manifest(
                args, "tokenize", [args.input], [args.out],
                {"raw": args.raw, "config_files": [args.abbrev] if args.abbrev else [],
                 "abbrev": sorted(cfg.abbreviations), "th": cfg.split_th_apostrophe,
                 "its": cfg.its_one_token, "roman_j": cfg.roman_numeral_j_variant},
            )
    return 0


# ---------------------------------------------------------------------------
# extract / segment


def _extraction_config(args) -> eebo.ExtractionConfig:
    kwargs = {}
    if getattr(args, "rare_char_threshold", None):
        kwargs["rare_char_threshold"] = args.rare_char_threshold
    if getattr(args, "max_tokens", None):
        kwargs["max_sentence_tokens"] = args.max_tokens
    if getattr(args, "keep_elements", None):
        kwargs["keep_elements"] = frozenset(args.keep_elements.split(","))
    if getattr(args, "drop_elements", None):
        kwargs["drop_elements"] = frozenset(args.drop_elements.split(","))
    return eebo.ExtractionConfig(**kwargs)


def _extract_all(paths, cfg) -> list[eebo.Document]:
    docs = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            doc = eebo.extract_document(fh, cfg)
        if not doc.id:
            doc = eebo.Document(
                Path(path).stem, doc.title, doc.author, doc.date, doc.paragraphs
            )
        docs.append(doc)
    return docs


def cmd_extract(args) -> int:
    cfg = _extraction_config(args)
    docs = _extract_all(args.xml, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = []
    for path, doc in zip(args.xml, docs):
        out_path = Path(args.out_dir) / (Path(path).stem + ".txt")
        out_path.write_text("\n".join(doc.paragraphs) + "\n", encoding="utf-8")
        outputs.append(out_path)
    if args.meta:
        with open(args.meta, "w", encoding="utf-8") as fh:
            fh.write("id\ttitle\tauthor\tdate\tparagraphs\n")
            for doc in docs:
                fh.write(f"{doc.id}\t{doc.title}\t{doc.author}\t{doc.date}\t{len(doc.paragraphs)}\n")
        outputs.append(args.meta)
    _write_manifest(args, "extract", args.xml, outputs, {"keep": sorted(cfg.keep_elements)})
    return 0


def cmd_segment(args) -> int:
    cfg = _extraction_config(args)
    tok_cfg = _tokenizer_config(args)
    tok = lambda text: tokenizer.tokenize(text, tok_cfg).tokens
    docs = _extract_all(args.xml, cfg)

    global_table = None if args.per_file else eebo.build_char_table(docs)
    outputs = [args.out]
    kept_total = excluded_total = 0
    with open(args.out, "w", encoding="utf-8") as out_fh, open(
        args.exclusions, "w", encoding="utf-8"
    ) as exc_fh:
        exc_fh.write("doc_id\tsentence_id\treason\n")
        for doc in docs:
            table = eebo.build_char_table([doc]) if args.per_file else global_table
            kept, excluded = eebo.segment_sentences(doc, cfg, tok, table)
            for sent in kept:
                out_fh.write(" ".join(sent.tokens) + "\n")
            for exc in excluded:
                exc_fh.write(f"{doc.id}\t{exc.id}\t{exc.reason}\n")
            kept_total += len(kept)
            excluded_total += len(excluded)
    outputs.append(args.exclusions)

    if args.char_freq:
        table = global_table if global_table is not None else eebo.build_char_table(docs)
        with open(args.char_freq, "w", encoding="utf-8") as fh:
            fh.write("char\tcodepoint\tcount\n")
            for ch, count in sorted(table.counts.items(), key=lambda kv: (-kv[1], kv[0])):
                shown = ch if not ch.isspace() else repr(ch)
                fh.write(f"{shown}\tU+{ord(ch):04X}\t{count}\n")
        outputs.append(args.char_freq)

    print(f"kept {kept_total} sentences, excluded {excluded_total}", file=sys.stderr)
    _write_manifest(
        args, "segment", args.xml, outputs,
        {"rare_char_threshold": cfg.rare_char_threshold,
         "max_sentence_tokens": cfg.max_sentence_tokens, "per_file": args.per_file,
         "config_files": [args.abbrev] if args.abbrev else []},
    )
    return 0


# ---------------------------------------------------------------------------
# query / scan-impossible


def _load_suites(names) -> list[q.QuerySuite]:
    suites = []
    for name in names:
        if name in q.BUILTIN_SUITES:
            suites.append(q.builtin_suite(name))
        else:
            suites.append(q.load_suite(name))
    return suites


def cmd_query(args) -> int:
    if args.print_suite:
        if args.print_suite == "declarative":
            print(q.declarative_suite_text(), end="")
        elif args.print_suite == "questions":
            print(q.question_suite_text(), end="")
        else:
            raise _UsageError("--print-suite takes 'declarative' or 'questions'")
        return 0
    if not args.trees:
        raise _UsageError("no input tree files")
    if not args.suite:
        raise _UsageError("at least one --suite is required")
    suites = _load_suites(args.suite)
    hits = []
    for path in args.trees:
        for sentence in treebank.read_trees_file(path):
            for suite in suites:
                hits.extend(q.run_cascade(suite, sentence))
    out_fh, close_out = _open_out(args.out)
    try:
        scoring.write_hits(hits, out_fh)
    finally:
        if close_out:
            out_fh.close()
            _write_manifest(
                args, "query", args.trees, [args.out],
                {"suites": list(args.suite), "config_files": [s for s in args.suite
                                                              if s not in q.BUILTIN_SUITES]},
            )
    return 0


def cmd_scan_impossible(args) -> int:
    if args.print_rules:
        print(impossible.IMPOSSIBLE_RULES_TEXT, end="")
        return 0
    if not args.trees:
        raise _UsageError("no input tree files")
    rules = impossible.load_rules(args.rules) if args.rules else impossible.builtin_impossible_rules()
    corpus = _read_corpus(args.trees)
    found = impossible.scan(corpus, rules)
    out_fh, close_out = _open_out(args.out)
    try:
        out_fh.write("sentence_id\trule\tspan_start\tspan_end\n")
        for r in found:
            out_fh.write(f"{r.sentence_id}\t{r.rule}\t{r.span[0]}\t{r.span[1]}\n")
    finally:
        if close_out:
            out_fh.close()
            _write_manifest(args, "scan-impossible", args.trees, [args.out],
                            {"rules": args.rules or "builtin"})
    summary = impossible.summarize(found)
    for rule in rules:
        print(f"{rule.name}\t{summary.get(rule.name, 0)}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# scoring commands


def _eval_params(args) -> scoring.EvalParams:
    base = scoring.DEFAULT_PARAMS
    if getattr(args, "param_file", None):
        base = scoring.load_eval_params(args.param_file)
    kwargs = {
        "delete_pos_labels": base.delete_pos_labels,
        "strip_function_tags": base.strip_function_tags,
        "strip_coindices": base.strip_coindices,
    }
    if args.delete_pos:
        kwargs["delete_pos_labels"] = frozenset(args.delete_pos.split(","))
    if args.keep_function_tags:
        kwargs["strip_function_tags"] = False
    if args.keep_coindices:
        kwargs["strip_coindices"] = False
    return scoring.EvalParams(**kwargs)


def cmd_score_brackets(args) -> int:
    params = _eval_params(args)
    pairs = scoring.pair_sentences(_read_corpus(args.gold), _read_corpus(args.pred))
    report = scoring.score_bracket_corpus(
        [g for g, _ in pairs], [p for _, p in pairs], params
    )
    totals = report.totals
    recall, precision, f1 = scoring.prf(totals.matched, totals.gold_count, totals.pred_count)
    print(f"gold brackets    {totals.gold_count}")
    print(f"pred brackets    {totals.pred_count}")
    print(f"matched          {totals.matched}")
    print(f"recall           {recall:.2f}")
    print(f"precision        {precision:.2f}")
    print(f"F1               {f1:.2f}")
    if report.skipped:
        print(f"skipped          {len(report.skipped)} sentence(s) with yield mismatches")
        for sid, err in report.skipped:
            log.warning("skipped %s: %s", sid, err)
    outputs = []
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            fh.write("gold\tpred\tmatched\trecall\tprecision\tf1\tskipped\n")
            fh.write(
                f"{totals.gold_count}\t{totals.pred_count}\t{totals.matched}\t"
                f"{recall:.2f}\t{precision:.2f}\t{f1:.2f}\t{len(report.skipped)}\n"
            )
        outputs.append(args.tsv)
    if args.plot:
        reports.plot_bracket_score(totals, args.plot)
        outputs.append(args.plot)
    if outputs:
        _write_manifest(args, "score-brackets", args.gold + args.pred, outputs,
                        {"params": sorted(params.delete_pos_labels),
                         "strip_ftags": params.strip_function_tags})
    return 0


def cmd_score_ftags(args) -> int:
    params = _eval_params(args)
    pairs = scoring.pair_sentences(_read_corpus(args.gold), _read_corpus(args.pred))
    report = scoring.score_ftag_corpus(
        [g for g, _ in pairs], [p for _, p in pairs], params
    )
    score = report.totals
    print("tag\tmatch\tgold\tpred\trecall\tprec\tf1")
    for tag in score.tags():
        m, g, p = score.per_tag[tag]
        recall, precision, f1 = score.prf(tag)
        print(f"{tag}\t{m}\t{g}\t{p}\t{recall:.2f}\t{precision:.2f}\t{f1:.2f}")
    if report.skipped:
        print(f"# skipped {len(report.skipped)} sentence(s) with yield mismatches")
    outputs = []
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            fh.write("tag\tmatch\tgold\tpred\trecall\tprecision\tf1\n")
            for tag in score.tags():
                m, g, p = score.per_tag[tag]
                recall, precision, f1 = score.prf(tag)
                fh.write(f"{tag}\t{m}\t{g}\t{p}\t{recall:.2f}\t{precision:.2f}\t{f1:.2f}\n")
        outputs.append(args.tsv)
    if args.plot:
        reports.plot_ftag_scores(score, args.plot)
        outputs.append(args.plot)
    if outputs:
        _write_manifest(args, "score-ftags", args.gold + args.pred, outputs, {})
    return 0


def cmd_score_queries(args) -> int:
    with open(args.gold, encoding="utf-8") as fh:
        gold_hits = scoring.read_hits(fh)
    with open(args.pred, encoding="utf-8") as fh:
        pred_hits = scoring.read_hits(fh)
    diff = scoring.diff_query_hits(gold_hits, pred_hits)
    header = ("search", "gold-hits", "pred-hits", "match", "miss", "fa", "recall", "prec", "f1")
    print("\t".join(header))
    for name, counts in diff.per_query.items():
        recall, precision, f1 = counts.prf()
        print(
            f"{name}\t{counts.gold_hits}\t{counts.pred_hits}\t{counts.match}\t"
            f"{counts.miss}\t{counts.false_alarm}\t{recall:.2f}\t{precision:.2f}\t{f1:.2f}"
        )
    outputs = []
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as fh:
            fh.write("\t".join(header) + "\n")
            for name, counts in diff.per_query.items():
                recall, precision, f1 = counts.prf()
                fh.write(
                    f"{name}\t{counts.gold_hits}\t{counts.pred_hits}\t{counts.match}\t"
                    f"{counts.miss}\t{counts.false_alarm}\t"
                    f"{recall:.2f}\t{precision:.2f}\t{f1:.2f}\n"
                )
        outputs.append(args.tsv)
    if args.plot:
        reports.plot_query_diff(diff, args.plot)
        outputs.append(args.plot)
    if outputs:
        _write_manifest(args, "score-queries", [args.gold, args.pred], outputs, {})
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> _Parser:
    parser = _Parser(prog="emetools", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"emetools {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("prepare", help="normalize annotation: metadata, tags, function-tag filter")
    p.add_argument("trees", nargs="+", help="bracketed tree files")
    p.add_argument("--out", default="-", help="output tree file (default stdout)")
    p.add_argument("--drop-report", help="TSV of dropped trees (file, sentence id, reason)")
    p.add_argument("--steps", help="comma subset of metadata,tags,ftags (order is fixed)")
    p.add_argument("--retained-tags", help="override the retained function-tag set")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("split", help="assign files to train/dev/test by name prefix")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", default="-", help="assignment TSV (default stdout)")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("tokenize", help="tokenize Early Modern English text")
    p.add_argument("input", help="text file or - for stdin")
    p.add_argument("--out", default="-")
    p.add_argument("--raw", action="store_true", help="treat the whole input as one segment")
    p.add_argument("--tokens-per-line", action="store_true",
                   help="one token per line, blank line between segments")
    p.add_argument("--abbrev", help="abbreviation list file, one entry per line")
    p.add_argument("--split-its", action="store_true", help="split 'its' into 'it s'")
    p.add_argument("--no-th-split", action="store_true", help="keep th' prefixes attached")
    p.add_argument("--no-roman-j", action="store_true", help="disallow j in Roman numerals")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("extract", help="extract paragraph text from EEBO-style XML")
    p.add_argument("xml", nargs="+")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--meta", help="TSV of document metadata")
    p.add_argument("--keep-elements", help="comma list (default P)")
    p.add_argument("--drop-elements", help="comma list (default NOTE,SPEAKER,L)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("segment", help="extract, tokenize, and sentence-segment XML")
    p.add_argument("xml", nargs="+")
    p.add_argument("--out", required=True, help="one sentence per line of space-joined tokens")
    p.add_argument("--exclusions", required=True, help="exclusion report TSV")
    p.add_argument("--char-freq", help="character frequency TSV")
    p.add_argument("--rare-char-threshold", type=int)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--per-file", action="store_true",
                   help="count characters per file instead of corpus-wide")
    p.add_argument("--keep-elements")
    p.add_argument("--drop-elements")
    p.add_argument("--abbrev")
    p.add_argument("--split-its", action="store_true")
    p.add_argument("--no-th-split", action="store_true")
    p.add_argument("--no-roman-j", action="store_true")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("query", help="run query suites over trees, emit hit TSV")
    p.add_argument("trees", nargs="*")
    p.add_argument("--suite", action="append", default=[],
                   help="built-in name (declarative, questions) or suite file; repeatable")
    p.add_argument("--out", default="-")
    p.add_argument("--print-suite", help="print a built-in suite definition and exit")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("score-brackets", help="evalb-style labeled-bracket scoring")
    p.add_argument("--gold", nargs="+", required=True)
    p.add_argument("--pred", nargs="+", required=True)
    p.add_argument("--param-file", help="evalb-style parameter file (DELETE_LABEL lines)")
    p.add_argument("--delete-pos", help="comma list of POS tags deleted before scoring")
    p.add_argument("--keep-function-tags", action="store_true")
    p.add_argument("--keep-coindices", action="store_true")
    p.add_argument("--tsv")
    p.add_argument("--plot", help="write a score figure (PNG/PDF by extension)")
    p.set_defaults(func=cmd_score_brackets)

    p = sub.add_parser("score-ftags", help="function-tag scoring on matched brackets")
    p.add_argument("--gold", nargs="+", required=True)
    p.add_argument("--pred", nargs="+", required=True)
    p.add_argument("--param-file", help="evalb-style parameter file (DELETE_LABEL lines)")
    p.add_argument("--delete-pos")
    p.add_argument("--keep-function-tags", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--keep-coindices", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--tsv")
    p.add_argument("--plot")
    p.set_defaults(func=cmd_score_ftags)

    p = sub.add_parser("score-queries", help="diff gold and predicted query hits")
    p.add_argument("--gold", required=True, help="gold hit TSV")
    p.add_argument("--pred", required=True, help="predicted hit TSV")
    p.add_argument("--tsv")
    p.add_argument("--plot")
    p.set_defaults(func=cmd_score_queries)

    p = sub.add_parser("scan-impossible", help="flag unattested structures in parser output")
    p.add_argument("trees", nargs="*")
    p.add_argument("--rules", help="rule file (same format as query suites)")
    p.add_argument("--out", default="-")
    p.add_argument("--print-rules", action="store_true",
                   help="print the built-in rules and exit")
    p.set_defaults(func=cmd_scan_impossible)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
