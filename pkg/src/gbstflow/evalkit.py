"""Detection metrics, packet-prefix evaluation and flow duration statistics."""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .boost import GBSTModel, classify_scores, predict_scores
from .flowmodel import FlowStream, Label, flow_duration

# durations of single-packet flows are 0; they are plotted at this floor on the log axis
MIN_CDF_DURATION_S = 1e-6


def truncate(flow: FlowStream, p: int) -> FlowStream:
    """The sub-stream of the first `p` packets.

    The new last packet's trailing IATs are reset to 0, as for any final packet.
    """
    if p < 1:
        raise ValueError(f"prefix length must be >= 1, got {p}")
    if p >= len(flow.packets):
        return flow
    head = list(flow.packets[:p])
    head[-1] = head[-1]._replace(iat_after=0.0, iat_after_dir=0.0)
    return flow.with_packets(head)


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int
    recall: float
    precision: float
    accuracy: float
    f1: float
    # metrics whose denominator was zero (reported as 0)
    undefined: tuple[str, ...] = ()
    prefix: Optional[int] = None
    per_vector: Optional[dict[str, "EvalReport"]] = None

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        d = {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "recall": self.recall, "precision": self.precision,
            "accuracy": self.accuracy, "f1": self.f1,
            "undefined": list(self.undefined), "prefix": self.prefix,
        }
        if self.per_vector is not None:
            d["per_vector"] = {k: v.to_dict() for k, v in sorted(self.per_vector.items())}
        return d


def _ratio(num: float, den: float, name: str, undefined: list) -> float:
    if den == 0:
        undefined.append(name)
        return 0.0
    return num / den


def metrics_from_counts(tp: int, fp: int, tn: int, fn: int, prefix: Optional[int] = None) -> EvalReport:
    if min(tp, fp, tn, fn) < 0:
        raise ValueError("confusion counts must be >= 0")
    undefined: list[str] = []
    recall = _ratio(tp, tp + fn, "recall", undefined)
    precision = _ratio(tp, tp + fp, "precision", undefined)
    accuracy = _ratio(tp + tn, tp + fp + tn + fn, "accuracy", undefined)
    f1 = _ratio(2 * recall * precision, recall + precision, "f1", undefined)
    return EvalReport(tp, fp, tn, fn, recall, precision, accuracy, f1, tuple(undefined), prefix)


def _as_positive(v) -> bool:
    if isinstance(v, Label):
        return v is Label.ATTACK
    return bool(v)


def compute_metrics(predictions, labels, prefix: Optional[int] = None) -> EvalReport:
    """Confusion counts and derived metrics; Attack (or truthy) is the positive class."""
    predictions, labels = list(predictions), list(labels)
    if len(predictions) != len(labels):
        raise ValueError(f"{len(predictions)} predictions for {len(labels)} labels")
    tp = fp = tn = fn = 0
    for pred, true in zip(predictions, labels):
        p, t = _as_positive(pred), _as_positive(true)
        if p and t:
            tp += 1
        elif p:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    return metrics_from_counts(tp, fp, tn, fn, prefix)


def _vector_subsets(flows: Sequence[FlowStream], balance: bool, seed: int) -> dict[str, np.ndarray]:
    benign = np.array([i for i, f in enumerate(flows) if f.label is Label.BENIGN], dtype=np.intp)
    by_tag: dict[str, list[int]] = defaultdict(list)
    for i, f in enumerate(flows):
        if f.label is Label.ATTACK:
            by_tag[f.vector_tag or "Attack"].append(i)
    rng = np.random.default_rng(seed)
    out = {}
    for tag in sorted(by_tag):
        attack = np.array(by_tag[tag], dtype=np.intp)
        if balance:
            k = min(len(attack), len(benign))
            attack = np.sort(rng.choice(attack, k, replace=False))
            others = np.sort(rng.choice(benign, k, replace=False))
        else:
            others = benign
        out[tag] = np.concatenate((others, attack))
    return out


def evaluate(model: GBSTModel, flows: Sequence[FlowStream], prefix: Optional[int] = None,
             per_vector: bool = False, balance: bool = True, seed: int = 0,
             threshold: float = 0.5) -> EvalReport:
    """Classify every flow (cut to its first `prefix` packets) with one model.

    With `per_vector`, each attack vector also gets a report over its flows and
    benign flows; `balance` samples both sides down to equal size.
    """
    if not flows:
        raise ValueError("no flows to evaluate")
    if prefix is not None:
        flows = [truncate(f, prefix) for f in flows]
    preds = classify_scores(predict_scores(model, flows), threshold)
    labels = [f.label for f in flows]
    report = compute_metrics(preds, labels, prefix)
    if not per_vector:
        return report
    subs = {}
    for tag, idx in _vector_subsets(flows, balance, seed).items():
        subs[tag] = compute_metrics([preds[i] for i in idx], [labels[i] for i in idx], prefix)
    return replace(report, per_vector=subs)


def time_saving(d: float, D: float) -> float:
    """Percent of the full-flow waiting time saved by deciding after duration `d`."""
    if D <= 0:
        raise ValueError("full duration D must be > 0")
    if d < 0:
        raise ValueError("prefix duration d must be >= 0")
    return 100.0 * (1.0 - d / D)


def lower_median(values) -> float:
    s = sorted(values)
    if not s:
        raise ValueError("median of an empty sample")
    return s[(len(s) - 1) // 2]


def cdf_points(durations_s) -> list[tuple[float, float]]:
    """Empirical CDF over log10(duration), one point per distinct value."""
    d = np.maximum(np.asarray(durations_s, dtype=np.float64), MIN_CDF_DURATION_S)
    x = np.log10(np.sort(d))
    n = len(x)
    pts = []
    for i in range(n):
        if i + 1 == n or x[i + 1] != x[i]:
            pts.append((float(x[i]), (i + 1) / n))
    return pts


PrefixKey = Union[int, str]
FULL = "full"


@dataclass(frozen=True)
class GroupStats:
    n_flows: int
    mean_packets: float
    median_packets: float
    mean_duration_ms: dict[PrefixKey, float]
    cdf: dict[PrefixKey, list[tuple[float, float]]] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "n_flows": self.n_flows,
            "mean_packets": self.mean_packets,
            "median_packets": self.median_packets,
            "mean_duration_ms": {str(k): v for k, v in self.mean_duration_ms.items()},
        }


@dataclass(frozen=True)
class DurationStats:
    prefix_sizes: tuple[int, ...]
    by_class: dict[str, GroupStats]
    by_vector: dict[str, GroupStats]

    def to_dict(self) -> dict:
        return {
            "prefix_sizes": list(self.prefix_sizes),
            "by_class": {k: v.to_dict() for k, v in sorted(self.by_class.items())},
            "by_vector": {k: v.to_dict() for k, v in sorted(self.by_vector.items())},
        }


def _group_stats(flows: list[FlowStream], prefix_sizes: tuple[int, ...]) -> GroupStats:
    counts = [len(f) for f in flows]
    means, cdfs = {}, {}
    for key in prefix_sizes + (FULL,):
        p = None if key == FULL else key
        d = [flow_duration(f, p) for f in flows]
        means[key] = 1000.0 * math.fsum(d) / len(d)
        cdfs[key] = cdf_points(d)
    return GroupStats(len(flows), math.fsum(counts) / len(counts), float(lower_median(counts)), means, cdfs)


def duration_stats(flows: Sequence[FlowStream], prefix_sizes: Sequence[int] = ()) -> DurationStats:
    """Packet-count and duration summaries per class and per vector tag."""
    if not flows:
        raise ValueError("no flows")
    sizes = tuple(int(p) for p in prefix_sizes)
    if any(p < 1 for p in sizes):
        raise ValueError("prefix sizes must be >= 1")
    by_class: dict[str, list] = defaultdict(list)
    by_vector: dict[str, list] = defaultdict(list)
    for f in flows:
        by_class[f.label.value].append(f)
        by_vector[f.vector_tag or f.label.value].append(f)
    return DurationStats(
        sizes,
        {k: _group_stats(v, sizes) for k, v in by_class.items()},
        {k: _group_stats(v, sizes) for k, v in by_vector.items()},
    )


def write_cdf_csv(path, points: Sequence[tuple[float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["log10_duration_s", "cdf"])
        for x, c in points:
            w.writerow([repr(x), repr(c)])


def write_cdf_tables(stats: DurationStats, out_dir) -> list[Path]:
    """One CSV per (vector tag, prefix size or full flow)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for tag, group in sorted(stats.by_vector.items()):
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in tag)
        for key, pts in group.cdf.items():
            path = out / f"cdf_{safe}_{key}.csv"
            write_cdf_csv(path, pts)
            written.append(path)
    return written


def write_summary_csv(stats: DurationStats, path) -> None:
    """One row per vector tag: flow count, packet counts and mean durations."""
    keys = list(stats.prefix_sizes) + [FULL]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vector", "n_flows", "mean_packets", "median_packets"]
                   + [f"mean_duration_ms_{k}" for k in keys])
        for tag, g in sorted(stats.by_vector.items()):
            w.writerow([tag, g.n_flows, repr(g.mean_packets), repr(g.median_packets)]
                       + [repr(g.mean_duration_ms[k]) for k in keys])
