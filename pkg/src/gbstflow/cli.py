"""Command-line pipelines: ingest, synth, train, eval, stats, importance, predict."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import boost, evalkit, ingest, modelio, testkit
from .flowmodel import Label

logger = logging.getLogger("gbstflow")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
DEFAULT_VAL_FRACTION = 0.2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _threshold(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"threshold must lie in (0, 1), got {v}")
    return v


def _prefix_list(text: str) -> list[int]:
    return [_positive_int(p) for p in text.split(",") if p.strip()]


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=1, allow_nan=False)
    sys.stdout.write("\n")


def _require_file(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    return p


def cmd_ingest(args) -> int:
    pcap = _require_file(args.pcap)
    labels = ingest.read_labels_csv(_require_file(args.labels))
    cap = ingest.parse_capture(pcap)
    rec = ingest.reconstruct_flows(cap.events, labels)
    n = ingest.write_flows_jsonl(args.out, rec.flows)
    volume = ingest.volume_report(rec.flows, os.path.getsize(pcap) or None)
    print(f"matched {len(cap.events) - rec.unmatched} packets into {n} flows; "
          f"unmatched {rec.unmatched}; skipped non-IPv4/TCP/UDP {cap.skipped}", file=sys.stderr)
    _emit({
        "flows": n,
        "matched_packets": len(cap.events) - rec.unmatched,
        "unmatched_packets": rec.unmatched,
        "skipped_frames": cap.skipped,
        "empty_label_rows": rec.empty_labels,
        "truncated": cap.truncated,
        "volume": volume.to_dict(),
    })
    return EXIT_OK


def cmd_synth(args) -> int:
    rule = testkit.SynthRule.make(args.rule, noise=args.noise)
    flows = testkit.generate(rule, args.n, args.seed)
    ingest.write_flows_jsonl(args.out, flows)
    print(f"wrote {len(flows)} flows to {args.out}", file=sys.stderr)
    return EXIT_OK


def _class_counts(flows) -> tuple[int, int]:
    attack = sum(f.label is Label.ATTACK for f in flows)
    return len(flows) - attack, attack


def cmd_train(args) -> int:
    flows = ingest.read_flows_jsonl(_require_file(args.flows))
    if args.balance:
        spec = ingest.SplitSpec.parse(args.balance, seed=args.seed)
        train, val, test = ingest.balance_split(flows, spec)
        if args.test_out:
            ingest.write_flows_jsonl(args.test_out, test)
    else:
        benign, attack = _class_counts(flows)
        if benign != attack:
            logger.warning("corpus is unbalanced (%d benign, %d attack) and no --balance given", benign, attack)
        train, val = ingest.holdout_split(flows, args.val_fraction, args.seed)
    config = boost.BoostConfig(n_trees=args.trees, learning_rate=args.lr, max_depth=args.max_depth,
                               attention_window=args.attention_window, reg_lambda=args.reg_lambda,
                               min_samples_leaf=args.min_samples_leaf, seed=args.seed)
    model = boost.fit(train, val or None, config)
    for i, loss in enumerate(model.val_loss, start=1):
        print(f"round {i}: validation loss {loss:.6f}", file=sys.stderr)
    modelio.save_model(model, args.out)
    print(f"trained {model.n_trees} trees on {len(train)} flows; model written to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = modelio.load_model(_require_file(args.model))
    flows = ingest.read_flows_jsonl(_require_file(args.flows))
    report = evalkit.evaluate(model, flows, args.prefix, per_vector=args.per_vector,
                              balance=not args.no_balance, seed=args.seed, threshold=args.threshold)
    _emit(report.to_dict())
    return EXIT_OK


def cmd_stats(args) -> int:
    flows = ingest.read_flows_jsonl(_require_file(args.flows))
    stats = evalkit.duration_stats(flows, args.prefix)
    if args.cdf_out:
        evalkit.write_cdf_tables(stats, args.cdf_out)
        evalkit.write_summary_csv(stats, Path(args.cdf_out) / "summary.csv")
    _emit(stats.to_dict())
    return EXIT_OK


def cmd_importance(args) -> int:
    model = modelio.load_model(_require_file(args.model))
    ranked = boost.feature_importance(model).ranked()
    _emit({name: v for name, v in ranked if args.all or v > 0})
    return EXIT_OK


def cmd_predict(args) -> int:
    model = modelio.load_model(_require_file(args.model))
    flows = ingest.read_flows_jsonl(_require_file(args.flows))
    if not flows:
        return EXIT_OK
    scores = boost.predict_scores(model, flows)
    labels = boost.classify_scores(scores, args.threshold)
    for f, s, lab in zip(flows, scores, labels):
        sys.stdout.write(json.dumps({"key": f.key.to_dict(), "start_ts_us": f.start_ts,
                                     "score": float(s), "label": lab.value}) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gbstflow", description="Packet-header Set-Tree boosting for flow classification.")
    p.add_argument("-v", "--verbose", action="store_true", help="log per-round training progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="pcap + label CSV -> flow JSONL")
    s.add_argument("--pcap", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("synth", help="write a synthetic rule-labeled corpus")
    s.add_argument("--rule", required=True, choices=testkit.RULE_NAMES)
    s.add_argument("--n", required=True, type=_positive_int, help="flows per class")
    s.add_argument("--seed", required=True, type=_nonneg_int)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("train", help="fit a boosted Set-Tree model")
    s.add_argument("--flows", required=True)
    s.add_argument("--trees", type=_nonneg_int, default=10)
    s.add_argument("--max-depth", type=_nonneg_int, default=10)
    s.add_argument("--attention-window", type=_nonneg_int, default=5)
    s.add_argument("--lr", type=float, default=0.1)
    s.add_argument("--lambda", dest="reg_lambda", type=float, default=1.0)
    s.add_argument("--min-samples-leaf", type=_positive_int, default=1)
    s.add_argument("--seed", required=True, type=_nonneg_int)
    s.add_argument("--balance", metavar="SPEC",
                   help="benign:attack counts for train,val,test, e.g. 32000:31996,8000:8000,40000:39996")
    s.add_argument("--val-fraction", type=float, default=DEFAULT_VAL_FRACTION,
                   help="validation share when --balance is absent")
    s.add_argument("--test-out", help="write the sampled test partition here (with --balance)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="score a model on labeled flows")
    s.add_argument("--model", required=True)
    s.add_argument("--flows", required=True)
    s.add_argument("--prefix", type=_positive_int)
    s.add_argument("--per-vector", action="store_true")
    s.add_argument("--no-balance", action="store_true", help="per-vector reports use all benign flows")
    s.add_argument("--seed", type=_nonneg_int, default=0, help="benign sampling for per-vector reports")
    s.add_argument("--threshold", type=_threshold, default=0.5)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("stats", help="packet-count and duration statistics")
    s.add_argument("--flows", required=True)
    s.add_argument("--prefix", type=_prefix_list, default=[2, 4, 14])
    s.add_argument("--cdf-out", metavar="DIR")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("importance", help="gain-based feature importance")
    s.add_argument("--model", required=True)
    s.add_argument("--all", action="store_true", help="include zero-importance features")
    s.set_defaults(func=cmd_importance)

    s = sub.add_parser("predict", help="per-flow attack scores as JSON lines")
    s.add_argument("--model", required=True)
    s.add_argument("--flows", required=True)
    s.add_argument("--threshold", type=_threshold, default=0.5)
    s.set_defaults(func=cmd_predict)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as e:
        print(f"gbstflow: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
