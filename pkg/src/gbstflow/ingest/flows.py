"""Label tables, packet-to-flow matching and the JSON-lines flow format."""
from __future__ import annotations

import bisect
import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..flowmodel import (
    FEATURE_NAMES,
    FlowKey,
    FlowStream,
    Label,
    RawPacket,
    binarize_label,
    build_stream,
    record_from_numbers,
    record_to_numbers,
)
from .pcap import PacketEvent

LABEL_COLUMNS = ("src_ip", "dst_ip", "src_port", "dst_port", "protocol", "start_ts_us", "label")


@dataclass(frozen=True)
class LabelRow:
    key: FlowKey
    start_ts: int
    raw_label: str


def read_labels_csv(path) -> list[LabelRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(LABEL_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: label table lacks columns {sorted(missing)}")
        for line, r in enumerate(reader, start=2):
            try:
                key = FlowKey(r["src_ip"].strip(), r["dst_ip"].strip(), int(r["src_port"]),
                              int(r["dst_port"]), int(r["protocol"]))
                rows.append(LabelRow(key, int(r["start_ts_us"]), r["label"].strip()))
            except ValueError as e:
                raise ValueError(f"{path}:{line}: {e}") from None
    return rows


def write_labels_csv(path, rows: Iterable[LabelRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LABEL_COLUMNS)
        for r in rows:
            k = r.key
            w.writerow([k.src_ip, k.dst_ip, k.src_port, k.dst_port, k.protocol, r.start_ts, r.raw_label])


@dataclass
class Reconstruction:
    flows: list[FlowStream] = field(default_factory=list)
    unmatched: int = 0
    # label rows that received no packet
    empty_labels: int = 0


class _LabelIndex:
    def __init__(self, labels: Sequence[LabelRow]):
        by_key: dict[FlowKey, list[LabelRow]] = defaultdict(list)
        seen = set()
        for row in labels:
            ident = (row.key, row.start_ts)
            if ident in seen:
                raise ValueError(f"duplicate label row for {row.key} at {row.start_ts}")
            seen.add(ident)
            by_key[row.key].append(row)
        self.rows = {k: sorted(v, key=lambda r: r.start_ts) for k, v in by_key.items()}
        self.starts = {k: [r.start_ts for r in v] for k, v in self.rows.items()}

    def _latest(self, key: FlowKey, ts: int):
        starts = self.starts.get(key)
        if not starts:
            return None
        i = bisect.bisect_right(starts, ts) - 1
        return self.rows[key][i] if i >= 0 else None

    def match(self, key: FlowKey, ts: int):
        """(row, is_forward) for the latest row started at or before ts in either orientation."""
        fwd = self._latest(key, ts)
        rev = self._latest(key.reversed(), ts)
        if fwd is None and rev is None:
            return None
        if rev is None or (fwd is not None and fwd.start_ts >= rev.start_ts):
            return fwd, True
        return rev, False


def reconstruct_flows(events: Iterable[PacketEvent], labels: Sequence[LabelRow]) -> Reconstruction:
    """Group packet events into labeled flow streams.

    An event joins the label row of the same five-tuple (either direction)
    with the greatest start timestamp not after the event.  Its direction is
    relative to that row's key.  Events without such a row are counted as
    unmatched.
    """
    index = _LabelIndex(labels)
    buckets: dict[LabelRow, list[RawPacket]] = {}
    out = Reconstruction()
    for ev in events:
        key = FlowKey(ev.src_ip, ev.dst_ip, ev.src_port, ev.dst_port, ev.protocol)
        hit = index.match(key, ev.ts_us)
        if hit is None:
            out.unmatched += 1
            continue
        row, forward = hit
        buckets.setdefault(row, []).append(
            RawPacket(ev.ts_us, forward, ev.src_port, ev.dst_port, ev.protocol, ev.length,
                      ev.tcp_window, ev.tcp_flags))
    for row in sorted(buckets, key=lambda r: (r.start_ts, r.key)):
        label = binarize_label(row.raw_label)
        flow = build_stream(row.key, buckets[row], label, row.raw_label)
        # the label row, not the first packet, fixes the flow's identity
        out.flows.append(FlowStream(row.key, row.start_ts, flow.packets, label, row.raw_label))
    out.empty_labels = len(labels) - len(buckets)
    return out


def flow_to_json(flow: FlowStream) -> str:
    packets = [record_to_numbers(p) for p in flow.packets]
    return json.dumps({
        "key": flow.key.to_dict(),
        "start_ts_us": int(flow.start_ts),
        "label": flow.label.value,
        "vector": flow.vector_tag,
        "packets": packets,
    }, separators=(",", ":"))


def _parse_label(s: str) -> Label:
    try:
        return Label(s)
    except ValueError:
        return binarize_label(s)


def flow_from_json(line: str) -> FlowStream:
    d = json.loads(line)
    packets = d["packets"]
    if any(len(p) != len(FEATURE_NAMES) for p in packets):
        raise ValueError(f"packets must carry {len(FEATURE_NAMES)} features")
    return FlowStream(FlowKey.from_dict(d["key"]), int(d["start_ts_us"]),
                      tuple(record_from_numbers(p) for p in packets),
                      _parse_label(d["label"]), d.get("vector"))


def write_flows_jsonl(path, flows: Iterable[FlowStream]) -> int:
    n = 0
    with open(path, "w") as fh:
        for f in flows:
            fh.write(flow_to_json(f) + "\n")
            n += 1
    return n


def read_flows_jsonl(path) -> list[FlowStream]:
    flows = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                flows.append(flow_from_json(line))
            except (ValueError, KeyError, TypeError) as e:
                raise ValueError(f"{path}:{line_no}: bad flow record ({e})") from None
    return flows
