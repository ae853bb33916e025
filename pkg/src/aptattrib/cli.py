"""``aptattrib`` command line.

Exit codes: 0 success, 1 usage error, 2 data error, 3 network error.
Data goes to standard output (or ``--out``); diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .attribution import attribute, consensus
from .classifiers import ClassifierKind, Hyperparams
from .dataset import (
    DEFAULT_HASH_DIM,
    UnknownAttack,
    _records,
    parse_training_csv,
    parse_unknown_csv,
    render_unknown_csv,
)
from .errors import AttributionError, DataError, NetworkError, UsageError
from .intel_model import IndicatorRow, classify_indicator_kind, refang
from .kernels import BACKEND
from .rag_llm import (
    AliasTable,
    EndpointConfig,
    build_prompt,
    call_llm,
    index_corpus,
    load_corpus_dir,
    parse_llm_response,
    retrieve,
)
from .rag_llm.client import DEFAULT_ENDPOINT, DEFAULT_MODEL
from .rag_llm.prompt import DEFAULT_CONTEXT_BUDGET
from .report import (
    ReportBundle,
    classifier_chart,
    llm_chart,
    load_report,
    load_table_csv,
    mean_chart,
    render_report,
    render_svg_chart,
    render_table,
    report_consensus,
)

log = logging.getLogger("aptattrib")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NETWORK = 0, 1, 2, 3
FIXTURE_PREFIX = "fixtures/"
DEFAULT_UNKNOWN = "fixtures/whispergate_unknown.csv"


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to exit 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def resolve_path(name: str) -> Path:
    """Return ``name`` as a path; ``fixtures/...`` falls back to the bundled copy."""
    p = Path(name)
    if p.exists() or not name.startswith(FIXTURE_PREFIX):
        return p
    bundled = resources.files("aptattrib.fixtures").joinpath(name[len(FIXTURE_PREFIX):])
    return Path(str(bundled))


def _read(name: str) -> str:
    path = resolve_path(name)
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {name}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {out}: {exc}") from exc
    log.info("wrote %s", out)


def _timestamp(value: str | None) -> str | None:
    if value == "now":
        return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    return value


def _provenance(label: str, name: str) -> str:
    origin = "bundled reconstruction fixture" if not Path(name).exists() and name.startswith(FIXTURE_PREFIX) else "user file"
    return f"{label}: {name} ({origin})"


# -- subcommands --------------------------------------------------------------


def cmd_validate(args) -> int:
    text = _read(args.csv)
    first = next(_records(text), None)
    if first is not None and len(first[1]) == 3:
        train = parse_training_csv(text, args.csv)
        print(f"ok: training file, {len(train.rows)} rows, {len(train.actors)} actors")
    else:
        attack = parse_unknown_csv(text, Path(args.csv).stem, args.csv)
        print(f"ok: unknown-attack file, {len(attack.rows)} rows")
    return EXIT_OK


def cmd_refang(args) -> int:
    path = Path(args.input)
    if path.is_file():
        text = _read(args.input)
        sys.stdout.write("".join(refang(line) + "\n" for line in text.splitlines()))
    else:
        print(refang(args.input))
    return EXIT_OK


def cmd_ingest(args) -> int:
    rows = []
    for lineno, line in enumerate(_read(args.input).splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            if args.infer_kinds:
                value = refang(line)
                rows.append(IndicatorRow.make(classify_indicator_kind(value), value))
            else:
                kind, sep, value = line.partition(",")
                if not sep:
                    raise DataError("expected 'kind,value' (or pass --infer-kinds)")
                rows.append(IndicatorRow.make(kind.strip(), value.strip()))
        except DataError as exc:
            raise DataError(f"{args.input}:{lineno}: {exc}") from exc
    if not rows:
        raise DataError(f"{args.input}: no indicators found")
    _emit(render_unknown_csv(UnknownAttack(tuple(rows), Path(args.input).stem)), args.out)
    return EXIT_OK


def cmd_attribute(args) -> int:
    hp = Hyperparams().with_overrides(args.hp or [])
    train = parse_training_csv(_read(args.train), args.train)
    attack = parse_unknown_csv(_read(args.unknown), args.name or Path(args.unknown).stem, args.unknown)
    log.info("fitting %d classifiers on %d rows (%s kernels)", len(ClassifierKind), len(train.rows), BACKEND)
    votes, table = attribute(train, attack, hp, args.seed, hash_dim=args.hash_dim, jobs=args.jobs)
    report = ReportBundle(
        attack_name=attack.name,
        n_rows=len(attack.rows),
        seed=args.seed,
        timestamp=_timestamp(args.timestamp),
        table=table,
        votes={k.value: {a.display: c for a, c in col.items()} for k, col in votes.counts.items()},
        consensus=consensus(table),
        provenance=(_provenance("training", args.train), _provenance("unknown", args.unknown)),
        config={"hash_dim": args.hash_dim, "hyperparams": hp.to_dict()},
    )
    _emit(render_report(report), args.out)
    if args.out and args.verbose:
        sys.stderr.write(render_table(table, "text"))
    if args.chart:
        _emit(render_svg_chart(mean_chart(table)), args.chart)
    return EXIT_OK


def cmd_consensus(args) -> int:
    source = str(resolve_path(args.source))
    if source.lower().endswith(".csv"):
        summary = consensus(load_table_csv(source))
    else:
        summary = report_consensus(load_report(source))
    print(json.dumps(summary.to_dict(), sort_keys=True, indent=2))
    return EXIT_OK


def cmd_rag_index(args) -> int:
    corpus = index_corpus(load_corpus_dir(resolve_path(args.dir)))
    doc = {
        "documents": [{"doc_id": d.doc_id, "title": d.title, "terms": len(v)} for d, v in zip(corpus.documents, corpus.vectors)],
        "vocabulary": len(corpus.idf),
    }
    print(json.dumps(doc, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_rag_query(args) -> int:
    if args.k < 1:
        raise UsageError("-k must be at least 1")
    corpus = index_corpus(load_corpus_dir(resolve_path(args.dir)))
    for doc_id, score in retrieve(corpus, args.text, args.k):
        print(f"{doc_id}\t{score:.6f}\t{corpus.document(doc_id).title}")
    return EXIT_OK


def cmd_llm_attribute(args) -> int:
    if args.transcript and not args.no_llm:
        raise UsageError("--transcript is only used with --no-llm")
    if args.no_llm and not args.transcript:
        raise UsageError("--no-llm needs --transcript <file>")
    attack = parse_unknown_csv(_read(args.unknown), args.name or Path(args.unknown).stem, args.unknown)
    provenance = [_provenance("unknown", args.unknown)]
    retrieved = []
    if args.train_context:
        corpus = index_corpus(load_corpus_dir(resolve_path(args.train_context)))
        query = " ".join(r.value for r in attack.rows)
        hits = retrieve(corpus, query, args.k)
        retrieved = [(doc_id, corpus.document(doc_id).body) for doc_id, _ in hits]
        provenance.append("context: " + (", ".join(d for d, _ in hits) or "none retrieved"))
    else:
        provenance.append("context: none (--no-rag)")
    bundle = build_prompt(attack, retrieved, args.budget)
    if args.print_prompt:
        sys.stderr.write(bundle.user_content() + "\n")

    if args.no_llm:
        text = _read(args.transcript)
        provenance.append(f"response: recorded transcript {args.transcript} (no network)")
    else:
        config = EndpointConfig(url=args.endpoint, model=args.model, temperature=args.temperature)
        text = call_llm(bundle, config)
        provenance.append(f"response: live call to {args.endpoint} model {args.model}")

    aliases = AliasTable.from_file(resolve_path(args.aliases)) if args.aliases else AliasTable.bundled()
    llm = parse_llm_response(text, aliases)
    for note in llm.notes:
        log.info("parse note: %s", note)
    report = ReportBundle(
        attack_name=attack.name,
        n_rows=len(attack.rows),
        timestamp=_timestamp(args.timestamp),
        llm=llm,
        provenance=tuple(provenance),
        config={"budget": args.budget, "k": args.k, "rag": bool(args.train_context)},
    )
    _emit(render_report(report), args.out)
    if args.chart:
        _emit(render_svg_chart(llm_chart(llm)), args.chart)
    return EXIT_OK


def cmd_chart(args) -> int:
    report = load_report(resolve_path(args.report))
    if args.llm:
        if report.llm is None:
            raise DataError("report has no LLM attribution section")
        spec = llm_chart(report.llm, args.color or "violet")
    else:
        if report.table is None:
            raise DataError("report has no attribution table")
        kind = ClassifierKind.parse(args.classifier)
        if kind not in report.table.classifiers:
            raise DataError(f"report table has no {kind.value} column")
        spec = classifier_chart(report.table, kind, args.color or "lightblue")
    _emit(render_svg_chart(spec), args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aptattrib", description="Threat-actor attribution from indicators of compromise.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="schema-check a training or unknown-attack CSV")
    s.add_argument("csv")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("refang", help="undo defanging of a string or of each line of a file")
    s.add_argument("input")
    s.set_defaults(func=cmd_refang)

    s = sub.add_parser("ingest", help="turn a list of indicators into an unknown-attack CSV")
    s.add_argument("input", help="one indicator per line ('kind,value', or bare values with --infer-kinds)")
    s.add_argument("--infer-kinds", action="store_true", help="refang and classify bare values")
    s.add_argument("--out")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("attribute", help="run the eight classifiers and tally per-row votes")
    s.add_argument("--train", required=True)
    s.add_argument("--unknown", required=True)
    s.add_argument("--name", help="attack name (default: unknown file stem)")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--hash-dim", type=int, default=DEFAULT_HASH_DIM)
    s.add_argument("--hp", nargs="+", metavar="KEY=VAL", help="hyperparameter overrides")
    s.add_argument("--jobs", type=int, default=1, help="fit classifiers in this many threads")
    s.add_argument("--timestamp", help="timestamp to embed ('now' for the current UTC time)")
    s.add_argument("--out", help="report JSON path (default: standard output)")
    s.add_argument("--chart", help="write an SVG of the mean per-actor percentage")
    s.set_defaults(func=cmd_attribute)

    s = sub.add_parser("consensus", help="per-classifier winners and plurality from a report or table CSV")
    s.add_argument("source")
    s.set_defaults(func=cmd_consensus)

    rag = sub.add_parser("rag", help="intelligence corpus retrieval")
    rsub = rag.add_subparsers(dest="rag_command", required=True, parser_class=_Parser)
    s = rsub.add_parser("index", help="index a corpus directory and summarize it")
    s.add_argument("dir")
    s.set_defaults(func=cmd_rag_index)
    s = rsub.add_parser("query", help="rank corpus documents against a query")
    s.add_argument("dir")
    s.add_argument("text")
    s.add_argument("-k", type=int, default=3)
    s.set_defaults(func=cmd_rag_query)

    llm = sub.add_parser("llm", help="LLM-assisted attribution")
    lsub = llm.add_subparsers(dest="llm_command", required=True, parser_class=_Parser)
    s = lsub.add_parser("attribute", help="prompt an LLM (or replay a transcript) and parse its ranking")
    ctx = s.add_mutually_exclusive_group()
    ctx.add_argument("--train-context", metavar="DIR", help="corpus directory for retrieved context")
    ctx.add_argument("--no-rag", action="store_true", help="send the bare prompt (default)")
    s.add_argument("--unknown", default=DEFAULT_UNKNOWN, help=f"unknown-attack CSV (default: {DEFAULT_UNKNOWN})")
    s.add_argument("--name")
    s.add_argument("--no-llm", action="store_true", help="replay --transcript instead of calling an endpoint")
    s.add_argument("--transcript")
    s.add_argument("--endpoint", default=DEFAULT_ENDPOINT)
    s.add_argument("--model", default=DEFAULT_MODEL)
    s.add_argument("--temperature", type=float, default=0.0)
    s.add_argument("--aliases", help="alias table JSON (default: bundled)")
    s.add_argument("-k", type=int, default=3, help="documents to retrieve")
    s.add_argument("--budget", type=int, default=DEFAULT_CONTEXT_BUDGET, help="context budget in characters")
    s.add_argument("--print-prompt", action="store_true", help="echo the assembled prompt to standard error")
    s.add_argument("--timestamp")
    s.add_argument("--out")
    s.add_argument("--chart", help="write an SVG of the parsed likelihoods")
    s.set_defaults(func=cmd_llm_attribute)

    s = sub.add_parser("chart", help="render an SVG bar chart from a report")
    s.add_argument("report")
    which = s.add_mutually_exclusive_group(required=True)
    which.add_argument("--classifier", metavar="KIND")
    which.add_argument("--llm", action="store_true")
    s.add_argument("--color")
    s.add_argument("--out")
    s.set_defaults(func=cmd_chart)
    return p


def cli_main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NetworkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except AttributionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(cli_main())
