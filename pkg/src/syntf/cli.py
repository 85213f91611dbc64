"""Command-line front end: build-vocab, synthesize, privacy-report, bound-curves, evaluate."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import secrets
import sys
from pathlib import Path

from . import __version__
from .embeddings import EmbeddingTable, drop_missing, load_embeddings
from .evaluation import (
    STAGES,
    LabeledCorpus,
    Resources,
    ScenarioConfig,
    SynParams,
    run_scenario,
)
from .fixture import bundled_path
from .mechanism import DEFAULT_OUTPUT_LENGTH, PrivacyParams, build_tables, synthesize_corpus
from .privacy import bound_curves, privacy_report
from .rating import RatingParams, build_rating_matrix, cached_rating_matrix, vocab_hash
from .vectorize import EmptyDocumentError, tfidf_transform, to_composition, vectorize
from .vocab import (
    DEFAULT_STOPWORDS,
    VocabOptions,
    Vocabulary,
    build_vocabulary,
    load_lemmas,
    load_stopwords,
    load_synonyms,
    read_corpus,
)

log = logging.getLogger("syntf")


class CLIError(Exception):
    pass


# ---- config handling ----

def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment, quotes around values are stripped."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise CLIError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[key.replace("-", "_")] = value
    return out


def _parse_bool(value: str) -> bool:
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise CLIError(f"not a boolean: {value!r}")


def _apply_config(sub: argparse.ArgumentParser, config: dict) -> None:
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in config.items():
        if key not in known:
            raise CLIError(f"unknown config key {key!r} for this subcommand")
        action = known[key]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[key] = _parse_bool(value)
        else:
            defaults[key] = value  # argparse converts string defaults with the action's type
    sub.set_defaults(**defaults)


def _seed(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _float_range(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive stop) or a comma list."""
    if ":" in spec:
        start, stop, step = (float(x) for x in spec.split(":"))
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return [float(x) for x in spec.split(",")]


# ---- parser ----

def _add_vocab_flags(p):
    g = p.add_argument_group("vocabulary")
    g.add_argument("--corpus", help="JSON Lines corpus ({id, text, label?, author?})")
    g.add_argument("--vocab", help="use this vocabulary file instead of building one")
    g.add_argument("--morphology", choices=("lemma", "lower", "orth"), default="lemma")
    g.add_argument("--lemmas", help="surface<TAB>lemma dictionary")
    g.add_argument("--use-synonyms", action="store_true")
    g.add_argument("--synonyms", help="term<TAB>syn,syn,... table")
    g.add_argument("--stopwords", help="whitespace-separated stop-word file (default: built-in list)")
    g.add_argument("--min-token-length", type=int, default=2)
    g.add_argument("--keep-numbers", action="store_true")


def _add_embedding_flags(p):
    g = p.add_argument_group("embeddings")
    g.add_argument("--embeddings", help="word vectors, 'word v1 ... vd' per line")
    g.add_argument("--limit", type=int, help="read only the first N embedding lines")
    g.add_argument("--cache-dir", help="directory for rating-matrix caches")


def _add_mechanism_flags(p):
    g = p.add_argument_group("mechanism")
    g.add_argument("--epsilon", type=float, default=47.5)
    g.add_argument("--n", type=int, default=DEFAULT_OUTPUT_LENGTH, help="output length")
    g.add_argument("--s", type=float, default=0.3, help="bigram overlap impact factor")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="syntf", description=__doc__)
    ap.add_argument("--version", action="version", version=f"syntf {__version__}")
    ap.add_argument("--config", help="key = value file; flags override it")
    ap.add_argument("--json-errors", action="store_true", help="report errors as JSON on stderr")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("-v", "--verbose", action="store_true")
    subs = ap.add_subparsers(dest="command", required=True)

    p = subs.add_parser("build-vocab", help="build a vocabulary file from a corpus")
    _add_vocab_flags(p)
    _add_embedding_flags(p)
    p.add_argument("--out", required=True, help="vocabulary file (one term per line)")
    p.add_argument("--stats", help="write statistics JSON here (default: stdout)")
    p.set_defaults(func=cmd_build_vocab)

    p = subs.add_parser("synthesize", help="produce synthetic term-frequency vectors")
    _add_vocab_flags(p)
    _add_embedding_flags(p)
    _add_mechanism_flags(p)
    p.add_argument("--seed", type=_seed, help="master seed (generated and printed if omitted)")
    p.add_argument("--composition", choices=("tf", "tfidf"), default="tf")
    p.add_argument("--skip-empty", action="store_true",
                   help="skip documents without in-vocabulary terms instead of failing")
    p.add_argument("--out", required=True, help="synthetic vectors, JSON Lines")
    p.add_argument("--report", help="privacy report JSON")
    p.set_defaults(func=cmd_synthesize)

    p = subs.add_parser("privacy-report", help="loss bounds for a vocabulary and parameters")
    _add_vocab_flags(p)
    _add_embedding_flags(p)
    _add_mechanism_flags(p)
    p.add_argument("--out", help="JSON output (default: stdout)")
    p.set_defaults(func=cmd_privacy_report)

    p = subs.add_parser("bound-curves", help="standard vs improved per-word bound grid (CSV)")
    p.add_argument("--epsilons", default="0:50:0.5", help="start:stop:step or comma list")
    p.add_argument("--sizes", default="2,100,30000", help="comma list of output-space sizes L")
    p.add_argument("--out", help="CSV output (default: stdout)")
    p.set_defaults(func=cmd_bound_curves)

    p = subs.add_parser("evaluate", help="utility vs attack scores on a labeled corpus")
    _add_vocab_flags(p)
    _add_embedding_flags(p)
    _add_mechanism_flags(p)
    p.add_argument("--suspects", type=int, default=4)
    p.add_argument("--multi-group", action="store_true")
    p.add_argument("--stage", choices=STAGES, default="synthetic")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--composition", choices=("tf", "tfidf"), default="tf")
    p.add_argument("--char-features", action="store_true",
                   help="append letter-bigram counts of the (reverse-vectorized) text")
    p.add_argument("--attack-train-on-original", action="store_true",
                   help="synthetic stage: the attacker trains on vectorized originals")
    p.add_argument("--out", help="EvalReport JSON (default: stdout)")
    p.add_argument("--runs-csv", help="per-repetition scores as CSV")
    p.set_defaults(func=cmd_evaluate)
    return ap


def parse_args(argv):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        config = read_config(args.config)
        subparser = ap._subparsers._group_actions[0].choices[args.command]
        _apply_config(subparser, config)
        args = ap.parse_args(argv)
    return args


# where output goes and how fast it is produced do not change the output itself
_NOT_ECHOED = {"func", "out", "report", "stats", "runs_csv", "threads", "verbose", "json_errors"}


def resolved_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}


# ---- shared resource loading ----

def vocab_options(args) -> VocabOptions:
    lemmas = load_lemmas(args.lemmas) if args.lemmas else {}
    synonyms = load_synonyms(args.synonyms) if args.synonyms else {}
    if args.use_synonyms and not args.synonyms:
        raise CLIError("--use-synonyms requires --synonyms")
    stopwords = load_stopwords(args.stopwords) if args.stopwords else DEFAULT_STOPWORDS
    return VocabOptions(morphology=args.morphology, use_synonyms=args.use_synonyms,
                        stopwords=stopwords, min_token_length=args.min_token_length,
                        remove_numbers=not args.keep_numbers, lemmas=lemmas, synonyms=synonyms)


def _corpus_records(args):
    if not args.corpus:
        raise CLIError("--corpus is required")
    try:
        return read_corpus(args.corpus)
    except OSError as exc:
        raise CLIError(f"cannot read corpus {args.corpus}: {exc.strerror or exc}") from None


def _embeddings(args) -> EmbeddingTable:
    if not args.embeddings:
        raise CLIError("--embeddings is required")
    try:
        return load_embeddings(args.embeddings, limit=args.limit)
    except OSError as exc:
        raise CLIError(f"cannot read embeddings {args.embeddings}: {exc.strerror or exc}") from None


def _vocabulary(args, options, records, table=None):
    if args.vocab:
        vocab = Vocabulary.load(args.vocab)
    else:
        vocab = build_vocabulary([r["text"] for r in records], options)
    dropped = []
    if table is not None:
        vocab, dropped = drop_missing(vocab, table)
    return vocab, dropped


def _ratings(args, vocab, table):
    params = RatingParams(args.s)
    if args.cache_dir:
        return cached_rating_matrix(vocab, table, params, args.embeddings, args.cache_dir)
    return build_rating_matrix(vocab, table, params)


def _write_text(path, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _ensure_seed(args) -> None:
    if args.seed is None:
        args.seed = secrets.randbits(64)
        print(f"syntf: generated seed {args.seed}", file=sys.stderr)


# ---- subcommands ----

def cmd_build_vocab(args) -> int:
    options = vocab_options(args)
    records = _corpus_records(args)
    table = _embeddings(args) if args.embeddings else None
    vocab, dropped = _vocabulary(args, options, records, table)
    vocab.save(args.out)
    stats = {"config": resolved_config(args), "K": len(vocab), "documents": len(records),
             "dropped_without_embedding": dropped, "vocab_hash": vocab_hash(vocab)}
    _write_text(args.stats, json.dumps(stats, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_synthesize(args) -> int:
    _ensure_seed(args)
    options = vocab_options(args)
    records = _corpus_records(args)
    table = _embeddings(args)
    vocab, dropped = _vocabulary(args, options, records, table)
    params = PrivacyParams(args.epsilon, args.n)

    tf = [(r["id"], vectorize(r["text"], vocab, options)) for r in records]
    empty = [doc_id for doc_id, v in tf if not v.entries]
    if empty and not args.skip_empty:
        raise EmptyDocumentError(
            f"{len(empty)} document(s) have no in-vocabulary terms and cannot be anonymized: "
            + ", ".join(empty)
        )
    for doc_id in empty:
        log.warning("skipping empty document %s", doc_id)
    tf = [(doc_id, v) for doc_id, v in tf if v.entries]
    if args.composition == "tfidf":
        weighted = tfidf_transform([v for _, v in tf])
        tf = [(doc_id, w) for (doc_id, _), w in zip(tf, weighted)]
    items = [(doc_id, to_composition(v)) for doc_id, v in tf]

    ratings = _ratings(args, vocab, table)
    tables = build_tables(ratings, params)
    synthetic = synthesize_corpus(items, tables, params, args.seed, threads=args.threads)
    report = privacy_report(tables, params, vocab.terms)

    buf = io.StringIO()
    header = {"header": {"config": resolved_config(args), "K": len(vocab),
                         "vocab_hash": vocab_hash(vocab), "dropped_without_embedding": dropped,
                         "skipped_empty": empty}}
    buf.write(json.dumps(header, sort_keys=True) + "\n")
    for (doc_id, _), syn in zip(items, synthetic):
        buf.write(syn.as_sparse().to_json(doc_id, n=params.n, epsilon=params.epsilon) + "\n")
    _write_text(args.out, buf.getvalue())
    if args.report:
        _write_text(args.report, json.dumps({"config": resolved_config(args), **report.to_dict()},
                                            indent=2, sort_keys=True) + "\n")
    return 0


def cmd_privacy_report(args) -> int:
    options = vocab_options(args)
    records = _corpus_records(args) if not args.vocab else []
    table = _embeddings(args)
    vocab, _ = _vocabulary(args, options, records, table)
    params = PrivacyParams(args.epsilon, args.n)
    tables = build_tables(_ratings(args, vocab, table), params)
    report = privacy_report(tables, params, vocab.terms)
    _write_text(args.out, json.dumps({"config": resolved_config(args), **report.to_dict()},
                                     indent=2, sort_keys=True) + "\n")
    return 0


def cmd_bound_curves(args) -> int:
    epsilons = _float_range(args.epsilons)
    sizes = [int(x) for x in args.sizes.split(",")]
    rows = bound_curves(epsilons, sizes)
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(resolved_config(args), sort_keys=True) + "\n")
    writer = csv.DictWriter(buf, fieldnames=["epsilon", "L", "standard", "improved"], lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    _write_text(args.out, buf.getvalue())
    return 0


def cmd_evaluate(args) -> int:
    _ensure_seed(args)
    if not args.corpus:
        args.corpus = str(bundled_path("corpus.jsonl"))
        args.embeddings = args.embeddings or str(bundled_path("embeddings.txt"))
        args.lemmas = args.lemmas or str(bundled_path("lemmas.tsv"))
        args.synonyms = args.synonyms or str(bundled_path("synonyms.tsv"))
    options = vocab_options(args)
    corpus = LabeledCorpus.from_records(_corpus_records(args))
    resources = Resources([d.text for d in corpus.documents], _embeddings(args), options)
    params = SynParams(args.morphology, args.use_synonyms, args.s, args.n, args.epsilon)
    report = run_scenario(corpus, ScenarioConfig(args.suspects, args.multi_group), args.stage,
                          resources, params, args.seed, args.repetitions,
                          char_features=args.char_features,
                          attack_train_on_original=args.attack_train_on_original,
                          composition_from=args.composition)
    out = {"config": resolved_config(args), **report.to_dict()}
    _write_text(args.out, json.dumps(out, indent=2, sort_keys=True) + "\n")
    if args.runs_csv:
        with open(args.runs_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["seed", "utility_f1", "utility_precision", "utility_recall",
                             "attack_f1", "attack_precision", "attack_recall"])
            for run in report.runs:
                u, a = run["utility"], run["attack"]
                writer.writerow([run["seed"], u["f1"], u["precision"], u["recall"],
                                 a["f1"], a["precision"], a["recall"]])
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    json_errors = "--json-errors" in argv
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except (CLIError, ValueError, LookupError, OSError, FloatingPointError) as exc:
        if json_errors:
            print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        else:
            print(f"syntf: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
