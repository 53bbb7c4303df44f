"""Command-line entry point orchestrating the pipeline end to end."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .adapt import (
    DEFAULT_CONSENSUS_FRACTION,
    DEFAULT_OCCUPANCY_FLOOR,
    adapt_baum_welch,
    adapt_viterbi,
)
from .bundle import ModelBundle, bundle_to_document, load_bundle, save_bundle
from .corpus import (
    GeneratorConfig,
    file_digest,
    generate_corpus,
    load_kpi_table,
    load_log,
    write_log,
    write_manifest,
)
from .evaluate import EvalConfig, ValueTolerance, confusion, format_confusion
from .hmm import FitConfig
from .parsing import KpiTable
from .pipeline import parse_records, preprocess_corpus, train
from .preprocess import DEFAULT_STOPWORDS, load_stopwords


class CliError(Exception):
    pass


def _atomic_write(path: Path, writer) -> None:
    """Write via temp file + rename so readers never see partial output."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_records(path):
    result = load_log(path)
    for lineno, reason, _ in result.rejects:
        print(f"warning: {path}:{lineno}: {reason}", file=sys.stderr)
    if not result.records:
        raise CliError(f"no usable events in {path}")
    return result.records


def _stopwords(args):
    if getattr(args, "stopwords", None):
        return load_stopwords(args.stopwords)
    return DEFAULT_STOPWORDS


def cmd_gen(args) -> int:
    config = GeneratorConfig(
        seed=args.seed,
        n_events=args.events,
        kpi_line_fraction=args.kpi_fraction,
        drift_profile=args.drift,
        kpi_name=args.kpi,
    )
    records, truth = generate_corpus(config)
    out = Path(args.output)
    log_path, truth_path = out / "log.tsv", out / "truth.csv"
    _atomic_write(log_path, lambda tmp: write_log(records, tmp))
    _atomic_write(truth_path, lambda tmp: truth.write_csv(tmp))
    _atomic_write(
        out / "manifest.json",
        lambda tmp: write_manifest(tmp, config, {"log.tsv": log_path, "truth.csv": truth_path}),
    )
    print(f"wrote {len(records)} events ({len(truth.rows)} KPI rows) to {out}")
    return 0


def cmd_train(args) -> int:
    records = _load_records(args.log)
    truth = load_kpi_table(args.truth)
    bundle = train(
        records,
        truth,
        kpi_name=args.kpi,
        threshold=args.threshold,
        aliases=args.alias or None,
        stopwords=_stopwords(args),
        provenance=f"sha256:{file_digest(args.log)}",
    )
    _atomic_write(Path(args.output), lambda tmp: save_bundle(bundle, tmp))
    print(f"cluster ({len(bundle.pattern.required_tokens)} tokens): "
          + " ".join(sorted(bundle.pattern.required_tokens)))
    print(f"trigger: {bundle.pattern.trigger}")
    print(f"states: {len(bundle.hmm.states)}, emissions: {len(bundle.hmm.emissions)}")
    return 0


def cmd_parse(args) -> int:
    bundle = load_bundle(args.bundle)
    records = _load_records(args.log)
    table = parse_records(bundle.pattern, records, _stopwords(args))
    _atomic_write(Path(args.output), lambda tmp: table.write_csv(tmp))
    print(f"parsed {len(table.rows)} rows from {len(records)} lines")
    return 0


def cmd_adapt(args) -> int:
    bundle = load_bundle(args.bundle)
    records = _load_records(args.log)
    corpus = preprocess_corpus(records, _stopwords(args))
    if args.strategy == "baum-welch":
        model, pattern, report = adapt_baum_welch(
            bundle.hmm,
            bundle.pattern,
            corpus,
            FitConfig(max_iterations=args.max_iterations),
            occupancy_floor=args.occupancy_floor,
        )
    else:
        model, pattern, report = adapt_viterbi(
            bundle.hmm, bundle.pattern, corpus, consensus_fraction=args.consensus
        )
    adapted = ModelBundle(model, pattern, bundle.mining_config, bundle.provenance)
    _atomic_write(Path(args.output), lambda tmp: save_bundle(adapted, tmp))
    report_doc = {
        "strategy": report.strategy.value,
        "required_tokens_before": sorted(report.pattern_before.required_tokens),
        "required_tokens_after": sorted(report.pattern_after.required_tokens),
        "loglik_trace": list(report.loglik_trace),
    }

    def write_report(tmp):
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report_doc, fh, indent=2, sort_keys=True)
            fh.write("\n")

    report_path = Path(args.report or (str(args.output) + ".report.json"))
    _atomic_write(report_path, write_report)
    before, after = report.pattern_before, report.pattern_after
    print(f"strategy: {report.strategy.value}")
    print(f"required tokens: {len(before.required_tokens)} -> {len(after.required_tokens)}")
    print(f"trigger: {before.trigger} -> {after.trigger}")
    if report.loglik_trace:
        print(f"log-likelihood: {report.loglik_trace[0]:.3f} -> {report.loglik_trace[-1]:.3f} "
              f"in {len(report.loglik_trace)} iterations")
    return 0


def cmd_eval(args) -> int:
    with open(args.parsed, encoding="utf-8", newline="") as fh:
        parsed = KpiTable.from_csv(fh.read())
    truth = load_kpi_table(args.truth)
    tolerance = ValueTolerance.EXACT_STRING if args.tolerance == "exact" else ValueTolerance.ROUNDED_TWO_DECIMALS
    cm = confusion(parsed, truth, args.universe, EvalConfig(tolerance))
    print(format_confusion(cm))
    if args.csv:
        _atomic_write(
            Path(args.csv),
            lambda tmp: Path(tmp).write_text(
                "tp,fp,fn,tn\n" + f"{cm.tp},{cm.fp},{cm.fn},{cm.tn}\n", encoding="utf-8"
            ),
        )
    return 0


def cmd_inspect(args) -> int:
    bundle = load_bundle(args.bundle)
    if args.json:
        print(json.dumps(bundle_to_document(bundle), indent=2, sort_keys=True))
        return 0
    print(f"format version: {bundle.format_version}")
    print(f"provenance: {bundle.provenance}")
    print(f"kpi: {bundle.pattern.kpi_name}")
    print(f"trigger: {bundle.pattern.trigger} (aliases: {', '.join(bundle.pattern.trigger_aliases)})")
    print(f"mining threshold: {bundle.mining_config.threshold}")
    print(f"required tokens ({len(bundle.pattern.required_tokens)}):")
    for token in sorted(bundle.pattern.required_tokens):
        print(f"  {token}")
    print(f"states: {len(bundle.hmm.states)}, emission alphabet: {len(bundle.hmm.emissions)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftparse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus plus ground truth")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--events", type=int, required=True)
    p.add_argument("--drift", choices=("none", "system_b"), default="none")
    p.add_argument("--kpi", default="ctdi")
    p.add_argument("--kpi-fraction", type=float, default=0.35)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="learn a parsing pattern from logs plus truth")
    p.add_argument("log")
    p.add_argument("truth")
    p.add_argument("--kpi", default="ctdi")
    p.add_argument("--threshold", type=int, default=None,
                   help="mining threshold (default: number of truth rows)")
    p.add_argument("--alias", action="append", help="additional trigger alias token")
    p.add_argument("--stopwords", help="newline-delimited stopword file")
    p.add_argument("-o", "--output", required=True, help="bundle output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="extract KPI values with a trained bundle")
    p.add_argument("bundle")
    p.add_argument("log")
    p.add_argument("--stopwords")
    p.add_argument("-o", "--output", required=True, help="KPI CSV output path")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("adapt", help="adapt a bundle to a drifted corpus")
    p.add_argument("bundle")
    p.add_argument("log")
    p.add_argument("--strategy", choices=("baum-welch", "viterbi"), required=True)
    p.add_argument("--stopwords")
    p.add_argument("--max-iterations", type=int, default=50)
    p.add_argument("--occupancy-floor", type=float, default=DEFAULT_OCCUPANCY_FLOOR)
    p.add_argument("--consensus", type=float, default=DEFAULT_CONSENSUS_FRACTION)
    p.add_argument("--report", help="report path (default: <output>.report.json)")
    p.add_argument("-o", "--output", required=True, help="adapted bundle output path")
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("eval", help="score a parsed table against ground truth")
    p.add_argument("parsed")
    p.add_argument("truth")
    p.add_argument("--universe", type=int, required=True,
                   help="total number of candidate extraction slots")
    p.add_argument("--tolerance", choices=("exact", "round2"), default="round2")
    p.add_argument("--csv", help="also write counts to this CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", help="print a bundle in human-readable form")
    p.add_argument("bundle")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
